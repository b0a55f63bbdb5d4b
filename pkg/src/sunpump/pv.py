"""
Double-diode photovoltaic cell and array model.

The cell current solves the implicit circuit equation

    I = I_ph - I_o1 (exp((V + I Rs)/Vt1) - 1)
             - I_o2 (exp((V + I Rs)/Vt2) - 1) - (V + I Rs)/Rp

with Vt_k = a_k * kB * T / q.  The array version scales voltages by the
series count and currents by the parallel count.  All solves are
safeguarded scalar root finds with a 1e-9 A residual contract.
"""

from dataclasses import dataclass, replace
import math

import numpy as np
from scipy.optimize import brentq

BOLTZMANN_J_PER_K = 1.381e-23
ELECTRON_CHARGE_C = 1.602e-19

# Saturation-current temperature law (cubed-power diode model), silicon gap.
# The reference temperature matches the default cell temperature so the
# model reduces to the plain two-diode equation there.
BANDGAP_SILICON_EV = 1.12
T_REFERENCE_K = 298.0
_BOLTZMANN_EV_PER_K = 8.617333262e-5


class PvSolverError(RuntimeError):
    """Implicit current solve failed to bracket or converge."""


class UndefinedEfficiencyError(ValueError):
    """Efficiency requested at zero irradiance."""


def thermal_voltage(a, t_c):
    """Diode thermal voltage ``a * kB * T / q`` in volts."""
    if a <= 0 or t_c < 0:
        raise ValueError("ideality factor must be > 0 and temperature >= 0")
    return a * BOLTZMANN_J_PER_K * t_c / ELECTRON_CHARGE_C


@dataclass(frozen=True)
class PvCellParams:
    """Double-diode cell parameters (photocurrent at the given irradiance)."""

    I_ph: float
    I_o1: float
    I_o2: float
    R_s: float
    R_p: float
    a1: float
    a2: float
    T_c: float

    def __post_init__(self):
        if self.I_ph < 0:
            raise ValueError("photocurrent must be >= 0")
        if self.I_o1 <= 0 or self.I_o2 <= 0:
            raise ValueError("saturation currents must be > 0")
        if self.R_s < 0 or self.R_p <= 0:
            raise ValueError("R_s must be >= 0 and R_p > 0")
        if not (0.5 <= self.a1 <= 3.0 and 0.5 <= self.a2 <= 3.0):
            raise ValueError("ideality factors must lie in [0.5, 3]")
        if self.T_c <= 0:
            raise ValueError("cell temperature must be > 0")


@dataclass(frozen=True)
class PvArrayParams:
    """A cell replicated N_s in series and N_p in parallel."""

    cell: PvCellParams
    N_s: int = 1
    N_p: int = 1
    area_A: float = 1.0
    irradiance_G_T: float = 1000.0

    def __post_init__(self):
        if self.N_s < 1 or self.N_p < 1:
            raise ValueError("module counts must be >= 1")
        if int(self.N_s) != self.N_s or int(self.N_p) != self.N_p:
            raise ValueError("module counts must be integers")
        if self.area_A <= 0:
            raise ValueError("array area must be > 0")
        if self.irradiance_G_T < 0:
            raise ValueError("irradiance must be >= 0")

    def at_irradiance(self, g_t):
        """Same array with photocurrent scaled linearly to irradiance."""
        scale_old = self.irradiance_G_T / 1000.0
        i_ph_stc = self.cell.I_ph / scale_old if scale_old > 0 else self.cell.I_ph
        cell = replace(self.cell, I_ph=i_ph_stc * g_t / 1000.0)
        return replace(self, cell=cell, irradiance_G_T=g_t)


def default_array(g_t=1000.0, t_c=T_REFERENCE_K):
    """
    Illustrative default array (not ground truth from any datasheet):
    I_ph 8 A at 1000 W/m2, I_o1 1e-10 A, I_o2 1e-6 A, R_s 0.01, R_p 100,
    a1 1, a2 2, 36 series cells, 0.5 m2.
    """
    cell = PvCellParams(I_ph=8.0 * g_t / 1000.0, I_o1=1e-10, I_o2=1e-6,
                        R_s=0.01, R_p=100.0, a1=1.0, a2=2.0, T_c=t_c)
    return PvArrayParams(cell=cell, N_s=36, N_p=1, area_A=0.5,
                         irradiance_G_T=g_t)


def _saturation_at_temperature(i_o_ref, t_c):
    """Cubed-power-law diode saturation current at cell temperature."""
    if t_c == T_REFERENCE_K:
        return i_o_ref
    expo = (BANDGAP_SILICON_EV / _BOLTZMANN_EV_PER_K) * (
        1.0 / T_REFERENCE_K - 1.0 / t_c)
    return i_o_ref * (t_c / T_REFERENCE_K) ** 3 * math.exp(min(expo, 700.0))


def _exp(x):
    """exp with the argument capped so brackets stay finite."""
    return math.exp(min(x, 700.0))


def _array_mismatch(p, n_s, n_p, v, i):
    """f(I) = I - RHS(I): strictly increasing in I, zero at the solution."""
    vt1 = thermal_voltage(p.a1, p.T_c)
    vt2 = thermal_voltage(p.a2, p.T_c)
    io1 = _saturation_at_temperature(p.I_o1, p.T_c)
    io2 = _saturation_at_temperature(p.I_o2, p.T_c)
    u = v / n_s + i * p.R_s / n_p
    rhs = (n_p * p.I_ph
           - n_p * io1 * (_exp(u / vt1) - 1.0)
           - n_p * io2 * (_exp(u / vt2) - 1.0)
           - (n_p / p.R_p) * u)
    return i - rhs


def _solve_current(p, n_s, n_p, v):
    if p.R_s == 0.0:
        # current appears only through I*Rs; the equation is explicit
        return -_array_mismatch(p, n_s, n_p, v, 0.0)
    hi = n_p * p.I_ph + 1.0
    lo = -(n_p * p.I_ph + abs(v) / p.R_p + 10.0)
    f = lambda i: _array_mismatch(p, n_s, n_p, v, i)
    if f(lo) * f(hi) > 0:
        lo, hi = lo * 10 - 10, hi * 10 + 10   # widen once
        if f(lo) * f(hi) > 0:
            raise PvSolverError(
                f"no sign change bracketing the current at V={v}")
    i = brentq(f, lo, hi, xtol=1e-13, rtol=8.882e-16, maxiter=200)
    if abs(f(i)) > 1e-9:
        raise PvSolverError(f"residual {f(i):.2e} A exceeds contract at V={v}")
    return i


def cell_current(p, v_c):
    """Cell output current solving the implicit double-diode equation."""
    return _solve_current(p, 1, 1, v_c)


def current_residual(ap, v_a, i_a):
    """Mismatch of the array equation at (V, I); |.| < 1e-9 A when solved."""
    return _array_mismatch(ap.cell, ap.N_s, ap.N_p, v_a, i_a)


def array_current(ap, v_a):
    """Array output current; reduces to :func:`cell_current` at 1x1."""
    return _solve_current(ap.cell, ap.N_s, ap.N_p, v_a)


def open_circuit_voltage(ap):
    """Array open-circuit voltage located by bisection on I(V) = 0."""
    p = ap.cell
    if p.I_ph <= 0:
        return 0.0
    io1 = _saturation_at_temperature(p.I_o1, p.T_c)
    io2 = _saturation_at_temperature(p.I_o2, p.T_c)
    vt1 = thermal_voltage(p.a1, p.T_c)
    vt2 = thermal_voltage(p.a2, p.T_c)
    bound = ap.N_s * min(vt1 * math.log(p.I_ph / io1 + 1.0),
                         vt2 * math.log(p.I_ph / io2 + 1.0)) + 1.0
    f = lambda v: array_current(ap, v)
    if f(0.0) <= 0:
        return 0.0
    return brentq(f, 0.0, bound, xtol=1e-10)


@dataclass(frozen=True)
class IvCurve:
    """Sampled I-V and P-V characteristic."""

    voltages: np.ndarray
    currents: np.ndarray
    powers: np.ndarray
    skipped: tuple = ()   # grid indices where the solver failed


def iv_curve(ap, v_grid):
    """Pointwise array currents and powers over an ascending voltage grid."""
    v_grid = np.asarray(v_grid, dtype=float)
    if np.any(np.diff(v_grid) <= 0):
        raise ValueError("voltage grid must be ascending")
    volts, amps, skipped = [], [], []
    for idx, v in enumerate(v_grid):
        try:
            amps.append(array_current(ap, v))
            volts.append(v)
        except PvSolverError:
            skipped.append(idx)
    volts = np.asarray(volts)
    amps = np.asarray(amps)
    return IvCurve(volts, amps, volts * amps, tuple(skipped))


@dataclass(frozen=True)
class MppResult:
    V_mpp: float
    I_mpp: float
    P_mpp: float
    unimodal: bool = True


def find_mpp(ap, tol_v=1e-4):
    """
    Maximum power point by golden-section search on P(V) over [0, Voc].

    A coarse scan first checks unimodality; if several local maxima show
    up the global scan maximum is returned with ``unimodal=False``.
    """
    voc = open_circuit_voltage(ap)
    if voc <= 0:
        return MppResult(0.0, 0.0, 0.0)

    def power(v):
        return v * array_current(ap, v)

    scan_v = np.linspace(0.0, voc, 201)
    scan_p = np.array([power(v) for v in scan_v])
    interior = scan_p[1:-1]
    peaks = np.sum((interior > scan_p[:-2]) & (interior >= scan_p[2:]))
    if peaks > 1:
        k = int(np.argmax(scan_p))
        return MppResult(scan_v[k], scan_p[k] / max(scan_v[k], 1e-12),
                         scan_p[k], unimodal=False)

    k = int(np.argmax(scan_p))
    lo = scan_v[max(k - 1, 0)]
    hi = scan_v[min(k + 1, len(scan_v) - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = power(c), power(d)
    while (b - a) > tol_v:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = power(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = power(d)
    v = 0.5 * (a + b)
    i = array_current(ap, v)
    return MppResult(v, i, v * i)


def pv_efficiency(v_a, i_a, area_a, g_t):
    """Conversion efficiency ``V I / (A G_T)``."""
    if area_a <= 0:
        raise ValueError("area must be > 0")
    if g_t <= 0:
        raise UndefinedEfficiencyError("efficiency undefined at zero irradiance")
    return v_a * i_a / (area_a * g_t)
