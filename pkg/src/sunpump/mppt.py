"""
Maximum-power-point tracking update laws and the boost-converter ratio.

Both hill-climbing laws are pure step functions (state in, state out):
Perturb-and-Observe moves the voltage reference by one fixed step in the
direction that last increased power, Incremental-Conductance compares
dI/dV against -I/V and holds exactly at the equality.
"""

from dataclasses import dataclass, replace

from . import pv


class InvalidDutyError(ValueError):
    """Boost converter duty cycle outside [0, 1)."""


@dataclass(frozen=True)
class ConverterSetting:
    duty_D: float

    def __post_init__(self):
        if not 0.0 <= self.duty_D < 1.0:
            raise InvalidDutyError("duty cycle must lie in [0, 1)")


def boost_ratio(cs):
    """Ideal boost conversion ratio ``Vout/Vin = 1 / (1 - D)``."""
    return 1.0 / (1.0 - cs.duty_D)


def duty_for_ratio(v_in, v_out, d_max=0.95):
    """Duty cycle stepping v_in up to v_out, clamped to [0, d_max]."""
    if v_in <= 0:
        return 0.0
    return min(max(1.0 - v_out / v_in, 0.0), d_max)


@dataclass(frozen=True)
class MpptState:
    """Tracker memory: previous operating point plus the voltage command."""

    V_prev: float
    I_prev: float
    P_prev: float
    V_ref: float
    dV_step: float = 0.5
    iteration: int = 0
    flag: str = ""

    def __post_init__(self):
        if self.dV_step <= 0:
            raise ValueError("perturbation step must be > 0")
        if self.iteration < 0:
            raise ValueError("iteration must be >= 0")


def initial_state(v_ref, dv_step=0.5):
    return MpptState(V_prev=v_ref, I_prev=0.0, P_prev=0.0,
                     V_ref=v_ref, dV_step=dv_step)


def po_step(st, v_now, i_now, printed_variant=False):
    """
    One Perturb-and-Observe update.

    The standard law: move the reference up when the last power change
    and voltage change share a sign, down when they differ, hold when
    power did not change.  ``printed_variant=True`` flips the move
    directions (a non-converging variant kept for comparison only).
    """
    p_now = v_now * i_now
    dp = p_now - st.P_prev
    dv = v_now - st.V_prev
    if dp == 0.0:
        move = 0.0
    elif dp * dv > 0.0:
        move = st.dV_step
    else:
        move = -st.dV_step
    if printed_variant:
        move = -move
    return replace(st, V_prev=v_now, I_prev=i_now, P_prev=p_now,
                   V_ref=st.V_ref + move, iteration=st.iteration + 1,
                   flag="")


def ic_step(st, v_now, i_now, rel_tol=1e-6):
    """
    One Incremental-Conductance update.

    Branches: with no voltage change the current change alone steers the
    move; otherwise dI/dV is compared against -I/V and the reference
    holds at equality (tested with relative tolerance ``rel_tol``).
    """
    dv = v_now - st.V_prev
    di = i_now - st.I_prev
    move = 0.0
    flag = ""
    if dv == 0.0:
        if di > 0.0:
            move = st.dV_step
        elif di < 0.0:
            move = -st.dV_step
    elif v_now == 0.0:
        flag = "conductance-undefined"
    else:
        inc = di / dv
        ref = -i_now / v_now
        scale = max(abs(inc), abs(ref), 1e-12)
        if abs(inc - ref) <= rel_tol * scale:
            move = 0.0
        elif inc > ref:
            move = st.dV_step
        else:
            move = -st.dV_step
    return replace(st, V_prev=v_now, I_prev=i_now, P_prev=v_now * i_now,
                   V_ref=st.V_ref + move, iteration=st.iteration + 1,
                   flag=flag)


def mppt_run(ap, algo, st0, steps, measure=None):
    """
    Closed-loop MPPT against the PV array model.

    Each iteration measures ``I = array_current(V_ref)``, applies the
    chosen update law, and records ``(iteration, V_ref, I, P)``.

    Parameters
    ----------
    ap : PvArrayParams
    algo : "po" | "ic"
    st0 : MpptState
    steps : int, >= 1
    measure : callable, optional
        Replacement for the array model: ``measure(v) -> i``.  Used by
        tests to climb synthetic power curves.

    Returns
    -------
    (states, trajectory) where trajectory rows are (iter, v_ref, i, p).
    """
    if steps < 1:
        raise ValueError("need at least one step")
    step_fn = {"po": po_step, "ic": ic_step}[algo]
    if measure is None:
        measure = lambda v: pv.array_current(ap, v)
    st = st0
    rows = []
    states = [st]
    for _ in range(steps):
        v = st.V_ref
        try:
            i = measure(v)
        except pv.PvSolverError:
            break
        st = step_fn(st, v, i)
        rows.append((st.iteration, v, i, v * i))
        states.append(st)
    return states, rows
