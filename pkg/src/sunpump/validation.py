"""
Reported-number validation registry.

Every numeric claim the source analyses make about the systems modeled
here is registered with the recomputation that checks it.  Rows never
raise: a disagreement is data (status DEVIATES), and claims that exist
only as plot features carry status QUALITATIVE.  Each row stores its own
tolerance: 1e-3 absolute for pole locations, 15% relative for
figure-readout step metrics and margins, 0.1% for analytic identities.

Several source gain values are internally inconsistent (a tracking-loop
gain written 1e4 times larger than the loop it describes, a printed
characteristic polynomial whose low-order coefficients are 100x the
assembled loop's, first-order pump step metrics inconsistent with the
stated time constant).  Those rows recompute both the literal reading
and, where one exists, the reconstruction that reproduces the claim;
the notes column records the derivation path taken.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import pv
from .lti import (Polynomial, TransferFunction, error_constants,
                  frequency_response, poly_roots, routh_table,
                  ss_error_vs_gain, stability_margins,
                  stability_verdict_from_roots, step_metrics, step_response,
                  tf_feedback_gain)
from .plants import (MOTOR_PAPER, PidParams, cascade_plant, cascade_system,
                     metering_pump_tf, motor_tf, MotorParams, pid_tf,
                     pump_tf, tank_second_order)

TOL_POLE_ABS = 1e-3
TOL_READOUT_REL = 0.15
TOL_ANALYTIC_REL = 1e-3

# Stable row-id listing (kept in sync with build_report by a test) so the
# CLI help can document the registry without recomputing it.
REGISTRY_IDS = (
    "tank2nd_pole_re", "tank2nd_pole_im", "motor_tf_den_s2",
    "motor_K1e5_rise", "motor_K1e5_overshoot", "motor_K1e5_peak_time",
    "motor_K1e6_rise", "motor_K1e6_overshoot", "motor_K1e6_peak",
    "motor_K1e6_peak_time", "motor_K1e6_settling", "motor_bode_mag_116",
    "motor_bode_phase_893", "motor_K1e6_gm", "motor_K1e6_gm_freq",
    "motor_K1e6_pm", "motor_K1e6_pm_freq", "motor_K_for_e01",
    "motor_K_for_e001", "motor_K_cl_e01", "motor_K_cl_e001",
    "charpoly_s3", "charpoly_s2", "charpoly_s1", "charpoly_s0",
    "tableII_verdict", "charpoly_actual_stability", "tuned_motor_rise",
    "tuned_motor_settling", "tuned_motor_overshoot", "tuned_motor_peak",
    "pump_rise", "pump_settling", "pump_time_constant", "pump_Kp",
    "pump_Kv", "pump_Ka", "pump_e_step", "cascade_num",
    "cascade_pole_fast", "cascade_pole_slow", "tableIII_all_K",
    "cascade_K_for_e01", "cascade_K_for_e001", "cascade_e_at_K1",
    "pid2_rise", "pid2_overshoot", "pid2_peak", "pid2_peak_time",
    "pid2_settling", "pid2_zero", "metering_dc_gain",
    "metering_pole_slow", "cascade_tuned1_rise", "cascade_tuned1_settling",
    "cascade_tuned1_overshoot", "cascade_tuned1_peak",
    "cascade_tuned2_rise", "cascade_tuned2_settling",
    "cascade_tuned2_overshoot", "cascade_tuned2_peak", "cascade_tuned2_gm",
    "cascade_tuned2_gm_freq", "cascade_tuned2_pm", "cascade_tuned2_pm_freq",
    "pv_power_vs_temp", "pv_mpp_vs_irradiance",
)


@dataclass(frozen=True)
class ReportedClaim:
    id: str
    description: str
    claimed_value: float
    unit: str
    computed_value: float
    abs_dev: float
    rel_dev: float
    status: str           # MATCH | DEVIATES | QUALITATIVE
    tolerance: float
    tolerance_kind: str   # "abs" | "rel" | "none"
    note: str = ""


def _row(rid, desc, claimed, unit, computed, tol, kind, note=""):
    if claimed is None or computed is None or kind == "none":
        status = "QUALITATIVE"
        abs_dev = rel_dev = float("nan")
        if claimed is not None and computed is not None:
            abs_dev = abs(computed - claimed)
            rel_dev = abs_dev / abs(claimed) if claimed != 0 else float("inf")
    else:
        abs_dev = abs(computed - claimed)
        rel_dev = abs_dev / abs(claimed) if claimed != 0 else (
            0.0 if abs_dev == 0.0 else float("inf"))
        if kind == "abs":
            status = "MATCH" if abs_dev <= tol else "DEVIATES"
        else:
            dev = rel_dev if claimed != 0 else abs_dev
            status = "MATCH" if dev <= tol else "DEVIATES"
    return ReportedClaim(rid, desc, claimed, unit, computed,
                          abs_dev, rel_dev, status, tol, kind, note)


def _loop_metrics(loop_tf, t_end=None):
    """Unity-feedback closed-loop step metrics of an open-loop system."""
    closed = tf_feedback_gain(loop_tf, 1.0)
    if t_end is None:
        poles = closed.poles()
        stable = poles[poles.real < -1e-12]
        t_end = 10.0 / abs(stable.real.max()) if stable.size else 1.0
    return step_metrics(step_response(closed, t_end))


def build_report():
    """Recompute every registered claim; returns a list of ReportedClaim."""
    rows = []
    add = rows.append

    # ----- second-order tank poles -------------------------------------
    r = poly_roots(Polynomial([1.0, 0.02241, 5.0]))
    osc = max(r, key=lambda z: z.imag)
    add(_row("tank2nd_pole_re", "sensor-feedback tank pole, real part",
             -0.0112, "1/s", osc.real, TOL_POLE_ABS, "abs"))
    add(_row("tank2nd_pole_im", "sensor-feedback tank pole, imag part",
             2.236, "rad/s", osc.imag, TOL_POLE_ABS, "abs"))

    # ----- motor transfer function: bullets vs printed numerics --------
    sym = motor_tf(MotorParams())
    printed = MOTOR_PAPER
    add(_row("motor_tf_den_s2", "motor TF s^2 coefficient from listed "
             "parameters vs printed system (both normalized to s^3)",
             printed.den.coeffs[1], "-", sym.den.coeffs[1],
             TOL_ANALYTIC_REL, "rel",
             note="printed numeric system is not reproducible from the "
                  "listed motor parameters; both kept as presets"))

    # ----- tracking loop step metrics (gain scale reconstruction) ------
    for k_label, k_claimed, claims in (
        ("1e5", 1e5, dict(rise=0.156, overshoot=2.79, peak_time=0.325)),
        ("1e6", 1e6, dict(rise=0.0264, overshoot=51.7, peak=1.52,
                          peak_time=0.0687, settling=0.419)),
    ):
        k_eff = k_claimed * 1e-4
        literal_stable = stability_verdict_from_roots(
            tf_feedback_gain(k_claimed * MOTOR_PAPER, 1.0).den)
        note = (f"literal K={k_label} loop is {literal_stable}; metrics "
                f"reproduce at effective gain K*1e-4 = {k_eff:g}, which is "
                f"the reading recomputed here")
        m = _loop_metrics(k_eff * MOTOR_PAPER, t_end=1.5)
        claim_map = dict(rise=(m.rise_time_s, "s"),
                         overshoot=(m.overshoot_pct, "%"),
                         peak=(m.peak, "-"),
                         peak_time=(m.peak_time_s, "s"),
                         settling=(m.settling_time_s, "s"))
        for name, claimed in claims.items():
            computed, unit = claim_map[name]
            add(_row(f"motor_K{k_label}_{name}",
                     f"tracking loop K={k_label} step {name}",
                     claimed, unit, computed, TOL_READOUT_REL, "rel", note))

    # ----- Bode point and margins of the tracking loop -----------------
    grid = np.geomspace(1e-1, 1e4, 4000)
    fr10 = frequency_response(10.0 * MOTOR_PAPER, grid)
    mag116 = float(np.interp(np.log(116.0), np.log(grid), fr10.magnitude_db))
    add(_row("motor_bode_mag_116", "open-loop gain at 116 rad/s (K=1e5 "
             "read at effective gain 10)", -36.3, "dB", mag116,
             TOL_READOUT_REL, "rel",
             note="literal K=1e5 gives +43.7 dB; effective gain K*1e-4 "
                  "reproduces the Bode figure"))
    ph893 = float(np.interp(np.log(8.93), np.log(grid), fr10.phase_deg))
    add(_row("motor_bode_phase_893", "open-loop phase at 8.93 rad/s "
             "(claim read as 180 deg + phase)", 67.4, "deg", 180.0 + ph893,
             TOL_READOUT_REL, "rel",
             note="claimed 'phase magnitude' matches the phase measured "
                  "up from -180 deg"))
    m100 = stability_margins(frequency_response(100.0 * MOTOR_PAPER, grid))
    add(_row("motor_K1e6_gm", "gain margin of the K=1e6 loop (effective "
             "gain 100)", 16.3, "dB", m100.gain_margin_db,
             TOL_READOUT_REL, "rel"))
    add(_row("motor_K1e6_gm_freq", "gain-margin frequency", 116.0, "rad/s",
             m100.gm_freq_rad_s, TOL_READOUT_REL, "rel"))
    add(_row("motor_K1e6_pm", "phase margin of the K=1e6 loop (effective "
             "gain 100)", 23.0, "deg", m100.phase_margin_deg,
             TOL_READOUT_REL, "rel"))
    add(_row("motor_K1e6_pm_freq", "phase-margin frequency", 43.8, "rad/s",
             m100.pm_freq_rad_s, TOL_READOUT_REL, "rel"))

    # ----- steady-state error vs gain on the tracking loop -------------
    gains = np.geomspace(1e-2, 1e7, 400)
    _, _, targets = ss_error_vs_gain(MOTOR_PAPER, gains, error_kind="ramp")
    add(_row("motor_K_for_e01", "gain for steady-state error 0.1 "
             "(type-1 loop: ramp-error reading)", 9.36, "-", targets[0.1],
             TOL_READOUT_REL, "rel",
             note="step error of the type-1 loop is 0 for every gain; the "
                  "claim matches the ramp-error constant Kv"))
    add(_row("motor_K_for_e001", "gain for steady-state error 0.01 "
             "(type-1 loop: ramp-error reading)", 102.9, "-", targets[0.01],
             TOL_READOUT_REL, "rel",
             note="ramp-error reading, as above"))
    for rid, claimed, target in (("motor_K_cl_e01", 57582.0, 0.1),
                                 ("motor_K_cl_e001", 633400.0, 0.01)):
        add(_row(rid, f"closed-loop gain for steady-state error {target}",
                 claimed, "-", float("nan"), TOL_READOUT_REL, "rel",
                 note="not reproducible: the unity-feedback loop on the "
                      "tracking motor is type 1, so its step error is 0 "
                      "for every positive gain and no finite gain maps to "
                      "this target"))

    # ----- characteristic quartic and its stability table --------------
    pid = PidParams(K_p=9.51202, K_i=5.6443, K_d=0.00022)
    char = (MOTOR_PAPER.den * pid_tf(pid).den
            + MOTOR_PAPER.num * pid_tf(pid).num).monic()
    printed_quartic = Polynomial([1.0, 625.8, 1.382e4, 1.239e7, 7.349e6])
    for idx, name in ((1, "s3"), (2, "s2"), (3, "s1"), (4, "s0")):
        add(_row(f"charpoly_{name}", f"characteristic polynomial {name} "
                 "coefficient: computed loop vs printed",
                 printed_quartic.coeffs[idx], "-", char.coeffs[idx],
                 TOL_READOUT_REL, "rel",
                 note="printed s^1 and s^0 coefficients are 100x the "
                      "assembled PID+motor loop"))
    routh_printed = routh_table(printed_quartic)
    oracle_printed = stability_verdict_from_roots(printed_quartic)
    add(_row("tableII_verdict", "printed quartic claimed stable; Routh "
             "verdict on the printed coefficients (1 = stable)",
             1.0, "-", 1.0 if routh_printed.verdict == "stable" else 0.0,
             TOL_ANALYTIC_REL, "rel",
             note=f"Routh says {routh_printed.verdict} with "
                  f"{routh_printed.sign_changes} sign changes; root oracle "
                  f"agrees ({oracle_printed}); the printed table lists the "
                  "raw coefficients rather than computed Routh entries"))
    add(_row("charpoly_actual_stability", "assembled PID+motor loop "
             "stability (1 = stable, matching the stated conclusion)",
             1.0, "-",
             1.0 if routh_table(char).verdict == "stable" else 0.0,
             TOL_ANALYTIC_REL, "rel",
             note="the conclusion 'the system is stable' holds for the "
                  "assembled loop even though the printed quartic is "
                  "unstable"))

    # ----- PID-tuned motor table ---------------------------------------
    tuned = PidParams(K_p=-69.94, K_i=-729.46, K_d=-1.651, N_filter=4558.36)
    tuned_loop = pid_tf(tuned) * MOTOR_PAPER
    tuned_verdict = stability_verdict_from_roots(
        tf_feedback_gain(tuned_loop, 1.0).den)
    for rid, desc, claimed, unit in (
            ("tuned_motor_rise", "tuned motor loop rise time", 0.0303, "s"),
            ("tuned_motor_settling", "tuned motor loop settling time",
             0.179, "s"),
            ("tuned_motor_overshoot", "tuned motor loop overshoot",
             23.2, "%"),
            ("tuned_motor_peak", "tuned motor loop peak", 1.23, "-")):
        add(_row(rid, desc, claimed, unit, float("nan"),
                 TOL_READOUT_REL, "rel",
                 note=f"closed loop with the printed negative gains is "
                      f"{tuned_verdict}; no step metrics exist for the "
                      "printed controller"))

    # ----- water pump (storage preset) ----------------------------------
    tau = 475.0
    add(_row("pump_rise", "storage pump rise time", 174.0, "s",
             tau * math.log(9.0), TOL_READOUT_REL, "rel",
             note="analytic first-order rise tau*ln 9"))
    add(_row("pump_settling", "storage pump settling time", 310.0, "s",
             tau * math.log(50.0), TOL_READOUT_REL, "rel",
             note="analytic first-order 2% settling tau*ln 50"))
    add(_row("pump_time_constant", "storage pump time constant", 112.0, "s",
             tau, TOL_READOUT_REL, "rel",
             note="the stated transfer function fixes tau = 475 s"))
    ec = error_constants(pump_tf(5.0, tau))
    add(_row("pump_Kp", "storage pump position constant", 5.0, "-",
             ec.Kp_pos, TOL_ANALYTIC_REL, "rel"))
    add(_row("pump_Kv", "storage pump velocity constant", 0.0, "-",
             ec.Kv_vel, TOL_ANALYTIC_REL, "rel"))
    add(_row("pump_Ka", "storage pump acceleration constant", 0.0, "-",
             ec.Ka_acc, TOL_ANALYTIC_REL, "rel"))
    add(_row("pump_e_step", "storage pump steady-state step error",
             0.833, "-", ec.e_step, TOL_READOUT_REL, "rel",
             note="claim uses 5/(1+lim G); the standard 1/(1+Kp) gives "
                  "0.1667"))

    # ----- cascade plant and its error/stability analysis ---------------
    plant = cascade_plant()
    add(_row("cascade_num", "cascade plant numerator", 0.05, "-",
             plant.num.coeffs[0] * 0.1, TOL_ANALYTIC_REL, "rel",
             note="num coefficient recovered after monic normalization"))
    poles = poly_roots(plant.den)
    add(_row("cascade_pole_fast", "cascade plant fast pole", -10.0, "1/s",
             poles.real.min(), TOL_POLE_ABS, "abs"))
    add(_row("cascade_pole_slow", "cascade plant slow pole", -1.0, "1/s",
             poles.real.max(), TOL_POLE_ABS, "abs"))
    all_stable = all(
        routh_table(tf_feedback_gain(k * plant, 1.0).den).verdict == "stable"
        and stability_verdict_from_roots(
            tf_feedback_gain(k * plant, 1.0).den) == "stable"
        for k in (0.1, 1.0, 10.0, 100.0, 1000.0, 1e6))
    add(_row("tableIII_all_K", "cascade loop stable for all sampled K > 0 "
             "(1 = stable, Routh and root oracle)", 1.0, "-",
             1.0 if all_stable else 0.0, TOL_ANALYTIC_REL, "rel"))
    gains = np.geomspace(1e-2, 1e6, 300)
    _, _, tgt = ss_error_vs_gain(plant, gains, error_kind="step")
    add(_row("cascade_K_for_e01", "cascade gain for step error 0.1",
             180.0, "-", tgt[0.1], TOL_ANALYTIC_REL, "rel"))
    add(_row("cascade_K_for_e001", "cascade gain for step error 0.01",
             1980.0, "-", tgt[0.01], TOL_ANALYTIC_REL, "rel"))
    e1 = error_constants(plant).e_step
    add(_row("cascade_e_at_K1", "cascade unity-gain steady-state error",
             0.048, "-", e1, TOL_READOUT_REL, "rel",
             note="claimed value equals the steady-state OUTPUT "
                  "G(0)/(1+G(0)) = 0.0476, not the error 1/(1+Kp) = 0.952"))

    # ----- oscillatory tank loop with the two-zero compensator ----------
    comp_num = 747.5 * np.convolve([0.12, 1.0], [0.12, 1.0])
    comp = TransferFunction(comp_num, [1.0, 0.0])
    loop2 = comp * tank_second_order(1.0)
    m2 = _loop_metrics(loop2, t_end=1.5)
    for rid, desc, claimed, unit, computed in (
            ("pid2_rise", "compensated tank loop rise time", 0.0204, "s",
             m2.rise_time_s),
            ("pid2_overshoot", "compensated tank loop overshoot", 14.4, "%",
             m2.overshoot_pct),
            ("pid2_peak", "compensated tank loop peak", 1.14, "-", m2.peak),
            ("pid2_peak_time", "compensated tank loop peak time", 0.059,
             "s", m2.peak_time_s),
            ("pid2_settling", "compensated tank loop settling time",
             0.165, "s", m2.settling_time_s)):
        add(_row(rid, desc, claimed, unit, computed, TOL_READOUT_REL, "rel",
                 note="loop: 747.5(1+0.12s)^2/s on 5/(s^2+0.02241s+5), "
                      "unity feedback"))
    z2 = poly_roots(loop2.num)
    add(_row("pid2_zero", "compensator double zero location", -8.24, "1/s",
             float(z2.real.mean()), TOL_READOUT_REL, "rel",
             note="zeros of 747.5(1+0.12s)^2 sit at -1/0.12 = -8.33"))

    # ----- metering pump -------------------------------------------------
    mp = metering_pump_tf()
    add(_row("metering_dc_gain", "metering pump DC gain", None, "-",
             mp.dc_gain(), 0.0, "none",
             note="no numeric claim; recorded for reference"))
    mp_poles = poly_roots(mp.den)
    add(_row("metering_pole_slow", "metering pump slow pole", None, "1/s",
             mp_poles.real.max(), 0.0, "none",
             note="quadratic-formula poles -0.0373 and -12.283"))

    # ----- tuned cascade (sensor gain 50) --------------------------------
    for label, pidp, claims in (
        ("cascade_tuned1", PidParams(0.653, 1.085, 0.03, 19.23),
         dict(rise=0.812, settling=3.04, overshoot=7.47, peak=1.07)),
        ("cascade_tuned2", PidParams(4.67, 3.91, -0.0047, 1002.69),
         dict(rise=0.146, settling=0.796, overshoot=18.1, peak=1.18)),
    ):
        sys = cascade_system(50.0, pidp)
        m = step_metrics(step_response(sys.closed_loop_unity, 12.0))
        claim_map = dict(rise=(m.rise_time_s, "s"),
                         settling=(m.settling_time_s, "s"),
                         overshoot=(m.overshoot_pct, "%"),
                         peak=(m.peak, "-"))
        for name, claimed in claims.items():
            computed, unit = claim_map[name]
            add(_row(f"{label}_{name}", f"tuned cascade loop step {name}",
                     claimed, unit, computed, TOL_READOUT_REL, "rel",
                     note="normalized loop step L/(1+L) with "
                          "L = C * G * 50"))
    sys2 = cascade_system(50.0, PidParams(4.67, 3.91, -0.0047, 1002.69))
    marg = stability_margins(frequency_response(
        sys2.open_loop, np.geomspace(1e-2, 1e5, 6000)))
    add(_row("cascade_tuned2_gm", "tuned cascade gain margin", 38.9, "dB",
             marg.gain_margin_db, TOL_READOUT_REL, "rel"))
    add(_row("cascade_tuned2_gm_freq", "tuned cascade gain-margin "
             "frequency", 101.0, "rad/s", marg.gm_freq_rad_s,
             TOL_READOUT_REL, "rel"))
    add(_row("cascade_tuned2_pm", "tuned cascade phase margin", 49.3, "deg",
             marg.phase_margin_deg, TOL_READOUT_REL, "rel"))
    add(_row("cascade_tuned2_pm_freq", "tuned cascade phase-margin "
             "frequency", 8.77, "rad/s", marg.pm_freq_rad_s,
             TOL_READOUT_REL, "rel"))

    # ----- PV qualitative claims -----------------------------------------
    hot = pv.default_array(1000.0, t_c=318.0)
    cold = pv.default_array(1000.0, t_c=298.0)
    p_hot = 35.0 * pv.array_current(hot, 35.0)
    p_cold = 35.0 * pv.array_current(cold, 35.0)
    add(_row("pv_power_vs_temp", "array power at 35 V decreases with cell "
             "temperature (1 = holds)", 1.0, "-",
             1.0 if p_hot < p_cold else 0.0, TOL_ANALYTIC_REL, "rel",
             note=f"P(35V, 318K) = {p_hot:.1f} W vs P(35V, 298K) = "
                  f"{p_cold:.1f} W on the default array"))
    mpps = [pv.find_mpp(pv.default_array(g)).P_mpp for g in (200.0, 600.0,
                                                             1000.0)]
    add(_row("pv_mpp_vs_irradiance", "maximum power rises with irradiance "
             "(1 = holds)", 1.0, "-",
             1.0 if mpps[0] < mpps[1] < mpps[2] else 0.0,
             TOL_ANALYTIC_REL, "rel",
             note="P_mpp at 200/600/1000 W/m2: "
                  + ", ".join(f"{p:.1f} W" for p in mpps)))

    return rows


def report_rows_for_csv(rows):
    header = ["id", "description", "claimed", "unit", "computed",
              "abs_dev", "rel_dev", "status", "tolerance",
              "tolerance_kind", "note"]
    data = [[r.id, r.description,
             float("nan") if r.claimed_value is None else r.claimed_value,
             r.unit, r.computed_value, r.abs_dev, r.rel_dev, r.status,
             r.tolerance, r.tolerance_kind, r.note] for r in rows]
    return header, data


def format_report(rows):
    """Human-readable fixed-width table, deterministic ordering."""
    lines = []
    lines.append(f"{'id':34} {'claimed':>12} {'computed':>12} "
                 f"{'rel_dev':>9} status")
    lines.append("-" * 78)
    for r in rows:
        claimed = "-" if r.claimed_value is None else f"{r.claimed_value:.6g}"
        computed = ("-" if r.computed_value is None
                    or (isinstance(r.computed_value, float)
                        and math.isnan(r.computed_value))
                    else f"{r.computed_value:.6g}")
        rel = "-" if math.isnan(r.rel_dev) else f"{r.rel_dev:8.2%}"
        lines.append(f"{r.id:34} {claimed:>12} {computed:>12} "
                     f"{rel:>9} {r.status}")
    n_match = sum(1 for r in rows if r.status == "MATCH")
    n_dev = sum(1 for r in rows if r.status == "DEVIATES")
    n_qual = sum(1 for r in rows if r.status == "QUALITATIVE")
    lines.append("-" * 78)
    lines.append(f"{len(rows)} rows: {n_match} MATCH, {n_dev} DEVIATES, "
                 f"{n_qual} QUALITATIVE")
    return "\n".join(lines)
