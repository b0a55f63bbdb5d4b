"""
Command-line entry point.

Subcommands::

    pv-curve      I-V / P-V characteristic of the default array
    solar-angles  per-timestamp solar and tracker angle table
    track-sim     closed-loop LDR tracking along a synthetic sun arc
    mppt-run      MPPT trajectory on the default array
    tf            analyze | step | bode | rlocus | routh | errors
    scenario      run a whole-system scenario from a config file
    validate      recompute every registered reported-number claim

Exit codes: 0 success, 1 usage error, 2 config error, 3 numeric failure.
All outputs are deterministic; CSV files land in --out (default '.').
"""

import argparse
import os
import sys

import numpy as np

from . import csvio, mppt, pv, validation
from .config import parse_config
from .lti import (NotSettledError, error_constants, frequency_response,
                  poly_roots, root_locus, routh_table, ss_error_vs_gain,
                  stability_margins, stability_verdict_from_roots,
                  step_metrics, step_response, tf_feedback_gain, tf_from_text)
from .plants import PRESETS, preset
from .scenario import ConfigError, ScenarioConfig, run_scenario
from .solar import (SunPosition, TrackerOrientation, UndefinedDirectionError,
                    angle_of_incidence, declination, incidence_direction,
                    optimal_orientation, zenith_and_elevation)
from .tracking import TrackingThresholds, tracking_sim


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_span(text, parts=3):
    """Parse 'a:b' or 'a:b:n' into floats."""
    bits = text.split(":")
    if len(bits) != parts:
        raise UsageError(f"expected {parts} colon-separated values, got "
                         f"{text!r}")
    try:
        return [float(b) for b in bits]
    except ValueError:
        raise UsageError(f"unparsable number in {text!r}")


def _gain_grid(spec):
    a, b, n = _parse_span(spec, 3)
    n = int(n)
    if n < 1 or b <= a:
        raise UsageError("gains must be 'a:b:n' with b > a and n >= 1")
    if a > 0:
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def _resolve_tf(args):
    if getattr(args, "tf_text", None):
        return tf_from_text(args.tf_text)
    name = getattr(args, "preset", None) or "motor_paper"
    try:
        return preset(name)
    except KeyError as exc:
        raise UsageError(str(exc))


def _out_path(args, name):
    out_dir = getattr(args, "out", None) or "."
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def _cmd_pv_curve(args):
    ap = pv.default_array(args.g_t, t_c=args.t_c)
    voc = pv.open_circuit_voltage(ap)
    grid = np.linspace(0.0, voc, args.points)
    curve = pv.iv_curve(ap, grid)
    path = _out_path(args, "pv_curve.csv")
    csvio.emit_csv(["v", "i", "p"],
                   zip(curve.voltages.tolist(), curve.currents.tolist(),
                       curve.powers.tolist()), path)
    m = pv.find_mpp(ap)
    print(f"wrote {path} ({len(curve.voltages)} points, Voc = {voc:.3f} V)")
    print(f"MPP: V = {m.V_mpp:.3f} V, I = {m.I_mpp:.3f} A, "
          f"P = {m.P_mpp:.2f} W")
    return 0


def _cmd_solar_angles(args):
    st0, st1, n = _parse_span(args.hour_angles)
    az0, az1 = _parse_span(args.azimuth, 2)
    n = int(n)
    delta = declination(args.day)
    rows = []
    for k in range(n):
        st = st0 + (st1 - st0) * k / max(n - 1, 1)
        theta_z, theta_e = zenith_and_elevation(args.lat, delta, st)
        theta_sa = az0 + (az1 - az0) * k / max(n - 1, 1)
        row = [args.day, st, delta, theta_e, theta_z, theta_sa]
        if theta_e > 0:
            sol = optimal_orientation(SunPosition(theta_e, theta_sa),
                                      args.alpha_target, args.beta_target)
            to = sol.orientation
            alpha = angle_of_incidence(SunPosition(theta_e, theta_sa), to)
            try:
                beta = incidence_direction(SunPosition(theta_e, theta_sa), to)
            except UndefinedDirectionError:
                beta = 0.0
            row += [to.theta_TE, to.theta_TA, alpha, beta]
        else:
            row += [0.0, theta_sa, 90.0, 0.0]
        rows.append(row)
    path = _out_path(args, "solar_angles.csv")
    csvio.emit_csv(["n", "ST", "delta", "theta_e", "theta_z", "theta_SA",
                    "theta_TE", "theta_TA", "alpha", "beta"], rows, path)
    print(f"wrote {path} ({n} rows, declination {delta:.3f} deg)")
    return 0


def _cmd_track_sim(args):
    e0, e1 = _parse_span(args.elevation, 2)
    a0, a1 = _parse_span(args.azimuth, 2)
    n = args.steps
    path_pts = [SunPosition(e0 + (e1 - e0) * k / max(n - 1, 1),
                            a0 + (a1 - a0) * k / max(n - 1, 1))
                for k in range(n)]
    start = None
    if args.start:
        te, ta = _parse_span(args.start, 2)
        start = TrackerOrientation(te, ta)
    records = tracking_sim(path_pts, TrackingThresholds(),
                           motor_step_deg=args.motor_step,
                           irradiance=args.irradiance, start=start)
    rows = [[r.step, r.orientation.theta_TE, r.orientation.theta_TA,
             r.alpha, r.readings.top_left, r.readings.top_right,
             r.readings.bottom_left, r.readings.bottom_right,
             r.command.azimuth_move, r.command.elevation_move]
            for r in records]
    path = _out_path(args, "track_sim.csv")
    csvio.emit_csv(["step", "theta_TE", "theta_TA", "alpha", "tl", "tr",
                    "bl", "br", "az_cmd", "el_cmd"], rows, path)
    print(f"wrote {path}; final AOI = {records[-1].alpha:.2f} deg")
    return 0


def _cmd_mppt_run(args):
    ap = pv.default_array(args.g_t)
    v0 = args.start_v
    if v0 is None:
        v0 = 0.5 * pv.open_circuit_voltage(ap)
    st0 = mppt.initial_state(v0, args.dv_step)
    _, rows = mppt.mppt_run(ap, args.algo, st0, args.steps)
    path = _out_path(args, f"mppt_{args.algo}.csv")
    csvio.emit_csv(["iter", "v_ref", "i", "p"], rows, path)
    best = pv.find_mpp(ap)
    print(f"wrote {path}; final P = {rows[-1][3]:.2f} W "
          f"(model MPP {best.P_mpp:.2f} W)")
    return 0


def _cmd_tf(args):
    if getattr(args, "config", None):
        from .config import AnalysisRequest
        req = parse_config(args.config)
        if not isinstance(req, AnalysisRequest):
            raise ConfigError(
                f"{args.config} holds a scenario, not an [analysis] request")
        args.mode = args.mode or req.kind
        for name in ("preset", "tf_text", "t_end", "dt", "gains"):
            if getattr(args, name, None) is None:
                setattr(args, name, getattr(req, name))
    if args.mode is None:
        raise UsageError("tf needs a mode argument or --config with kind")
    tf = _resolve_tf(args)
    mode = args.mode
    if mode == "analyze":
        poles = poly_roots(tf.den)
        print(f"system: num degree {tf.num.degree}, den degree "
              f"{tf.den.degree}, proper: {tf.proper}")
        print(f"DC gain: {tf.dc_gain() if abs(tf.den(0)) > 0 else 'inf'}")
        print("poles:", ", ".join(f"{p:.6g}" for p in poles))
        if tf.num.degree >= 1:
            print("zeros:", ", ".join(f"{z:.6g}" for z in poly_roots(tf.num)))
        print("routh verdict:", routh_table(tf.den).verdict)
        print("root-sign verdict:", stability_verdict_from_roots(tf.den))
        return 0
    if mode == "step":
        t_end = args.t_end
        if t_end is None:
            poles = poly_roots(tf.den)
            stable = poles[poles.real < -1e-12]
            t_end = 8.0 / abs(stable.real.max()) if stable.size else 10.0
        closed = tf_feedback_gain(tf, 1.0) if args.closed else tf
        trace = step_response(closed, t_end, args.dt)
        path = _out_path(args, "step.csv")
        csvio.emit_csv(["t", "y"], zip(trace.t.tolist(), trace.y.tolist()),
                       path)
        print(f"wrote {path} ({len(trace.t)} samples, t_end {t_end:.4g} s)")
        try:
            m = step_metrics(trace)
            print(f"rise {m.rise_time_s:.4g} s, settling "
                  f"{m.settling_time_s:.4g} s, overshoot "
                  f"{m.overshoot_pct:.3g}%, peak {m.peak:.4g} at "
                  f"{m.peak_time_s:.4g} s, steady state "
                  f"{m.steady_state_value:.4g}")
        except NotSettledError:
            print("trace did not settle; no metrics "
                  f"(diverged = {trace.diverged})")
        return 0
    if mode == "bode":
        fr = frequency_response(tf)
        path = _out_path(args, "bode.csv")
        csvio.emit_csv(["omega_rad_s", "magnitude_db", "phase_deg"],
                       zip(fr.omegas.tolist(), fr.magnitude_db.tolist(),
                           fr.phase_deg.tolist()), path)
        m = stability_margins(fr)
        print(f"wrote {path}")
        gm = ("absent" if m.gain_margin_db is None
              else f"{m.gain_margin_db:.3g} dB @ {m.gm_freq_rad_s:.4g} rad/s")
        pm = ("absent" if m.phase_margin_deg is None
              else f"{m.phase_margin_deg:.3g} deg @ "
                   f"{m.pm_freq_rad_s:.4g} rad/s")
        print(f"gain margin: {gm}\nphase margin: {pm}")
        return 0
    if mode == "rlocus":
        gains = _gain_grid(args.gains or "0.01:1000:60")
        locus = root_locus(tf, gains)
        rows = []
        for gi, k in enumerate(gains):
            for p in locus[gi]:
                rows.append([k, p.real, p.imag])
        path = _out_path(args, "rlocus.csv")
        csvio.emit_csv(["gain", "re", "im"], rows, path)
        print(f"wrote {path} ({len(gains)} gains x {locus.shape[1]} poles)")
        return 0
    if mode == "routh":
        res = routh_table(tf.den)
        for i, row in enumerate(res.table):
            print(f"s^{tf.den.degree - i:<2d} " +
                  "  ".join(f"{v: .6g}" for v in row))
        print(f"sign changes: {res.sign_changes}; verdict: {res.verdict}")
        return 0
    if mode == "errors":
        ec = error_constants(tf)
        print(f"system type {ec.system_type}: Kp = {ec.Kp_pos:.6g}, "
              f"Kv = {ec.Kv_vel:.6g}, Ka = {ec.Ka_acc:.6g}")
        print(f"e_step = {ec.e_step:.6g}, e_ramp = {ec.e_ramp:.6g}, "
              f"e_parabola = {ec.e_parabola:.6g}")
        if args.gains:
            gains = _gain_grid(args.gains)
            ks, errs, targets = ss_error_vs_gain(tf, gains)
            path = _out_path(args, "ss_error.csv")
            csvio.emit_csv(["gain", "e_step"], zip(ks.tolist(),
                                                   errs.tolist()), path)
            print(f"wrote {path}")
            for tgt, k in targets.items():
                where = "unreachable on range" if k is None else f"K = {k:.6g}"
                print(f"error {tgt}: {where}")
        return 0
    raise UsageError(f"unknown tf mode {mode!r}")


def _cmd_scenario(args):
    if args.action != "run":
        raise UsageError("scenario supports: run")
    cfg = parse_config(args.config) if args.config else ScenarioConfig()
    if args.dt is not None:
        from dataclasses import replace
        cfg = replace(cfg, dt_s=args.dt)
    if args.t_end is not None:
        from dataclasses import replace
        cfg = replace(cfg, duration_s=args.t_end)
    cfg.validate()
    trace, summary = run_scenario(cfg)
    path = _out_path(args, "scenario_trace.csv")
    csvio.emit_csv(trace.COLUMNS, csvio.trace_rows(trace), path)
    print(f"wrote {path} ({len(trace)} steps)")
    print(f"final SOC: {summary.final_soc_pct:.2f}%")
    print(f"pump1: {summary.pump1_cycles} cycles, "
          f"{summary.pump1_on_steps} on-steps")
    print(f"pump2: {summary.pump2_cycles} cycles, "
          f"{summary.pump2_on_steps} on-steps")
    print(f"water delivered to soil: {summary.water_delivered_L:.3f} L")
    print(f"energy harvested: {summary.energy_harvested_Wh:.3f} Wh")
    return 0


def _cmd_validate(args):
    rows = validation.build_report()
    print(validation.format_report(rows))
    path = _out_path(args, "validation_report.csv")
    header, data = validation.report_rows_for_csv(rows)
    csvio.emit_csv(header, data, path)
    print(f"wrote {path}")
    return 0


def build_parser():
    p = _Parser(prog="sunpump", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("pv-curve", help="emit the array I-V/P-V curve")
    q.add_argument("--points", type=int, default=200)
    q.add_argument("--g-t", type=float, default=1000.0,
                   help="irradiance W/m2")
    q.add_argument("--t-c", type=float, default=298.0,
                   help="cell temperature K")
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_pv_curve)

    q = sub.add_parser("solar-angles", help="solar/tracker angle table")
    q.add_argument("--day", type=int, default=172, help="day of year")
    q.add_argument("--lat", type=float, default=45.0)
    q.add_argument("--hour-angles", default="-60:60:25",
                   help="start:stop:count, degrees")
    q.add_argument("--azimuth", default="110:250",
                   help="linear solar azimuth profile start:stop")
    q.add_argument("--alpha-target", type=float, default=0.0)
    q.add_argument("--beta-target", type=float, default=0.0)
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_solar_angles)

    q = sub.add_parser("track-sim", help="LDR tracking along a sun arc")
    q.add_argument("--steps", type=int, default=200)
    q.add_argument("--elevation", default="30:60", help="start:stop deg")
    q.add_argument("--azimuth", default="90:270", help="start:stop deg")
    q.add_argument("--irradiance", type=float, default=1000.0)
    q.add_argument("--motor-step", type=float, default=1.8)
    q.add_argument("--start", help="initial orientation te:ta")
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_track_sim)

    q = sub.add_parser("mppt-run", help="MPPT trajectory")
    q.add_argument("--algo", choices=("po", "ic"), default="po")
    q.add_argument("--steps", type=int, default=120)
    q.add_argument("--g-t", type=float, default=1000.0)
    q.add_argument("--dv-step", type=float, default=0.5)
    q.add_argument("--start-v", type=float)
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_mppt_run)

    q = sub.add_parser("tf", help="transfer-function analyses")
    q.add_argument("mode", nargs="?", choices=("analyze", "step", "bode",
                                               "rlocus", "routh", "errors"))
    q.add_argument("--config",
                   help="config file with an [analysis] section")
    q.add_argument("--preset", help="named system: "
                   + ", ".join(sorted(PRESETS)))
    q.add_argument("--tf-text", help="'num: ... / den: ...' literal system")
    q.add_argument("--closed", action="store_true",
                   help="close unity feedback before the step response")
    q.add_argument("--dt", type=float)
    q.add_argument("--t-end", type=float)
    q.add_argument("--gains", help="a:b:n sweep (log-spaced when a > 0)")
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_tf)

    q = sub.add_parser("scenario", help="whole-system scenario")
    q.add_argument("action", choices=("run",))
    q.add_argument("--config", help="key = value config file")
    q.add_argument("--dt", type=float)
    q.add_argument("--t-end", type=float)
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_scenario)

    registry_doc = "registry rows:\n" + "\n".join(
        "  " + rid for rid in validation.REGISTRY_IDS)
    q = sub.add_parser(
        "validate", help="recompute registered reported-number claims",
        epilog=registry_doc,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_validate)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
