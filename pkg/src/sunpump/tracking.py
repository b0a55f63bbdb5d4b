"""
Four-quadrant LDR sensing model and the tracking state machine.

The sensor model projects the sun direction onto four quadrant normals
(the panel normal tilted 45 degrees toward each in-face half-axis) and
quantizes to 10-bit ADC counts, full scale at 1000 W/m2 normal
incidence.  The state machine compares pairwise averages against a
deadband and commands one motor step per axis per cycle.

Command labels follow the tracking algorithm's printed branches
(left-brighter commands "right"); the simulation maps "right" to a
negative azimuth step so the loop converges either way.
"""

from dataclasses import dataclass
import math

import numpy as np

from .solar import SunPosition, TrackerOrientation, angle_of_incidence, \
    sun_vector, tracker_basis

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class LdrReadings:
    """Quadrant ADC counts, each in [0, 1023]."""

    top_left: int
    top_right: int
    bottom_left: int
    bottom_right: int

    def __post_init__(self):
        for v in (self.top_left, self.top_right,
                  self.bottom_left, self.bottom_right):
            if not 0 <= v <= 1023:
                raise ValueError("ADC count out of [0, 1023]")


@dataclass(frozen=True)
class TrackingThresholds:
    avgsum_min: float = 8.0
    diff_deadband: float = 10.0

    def __post_init__(self):
        if self.avgsum_min <= 0 or self.diff_deadband <= 0:
            raise ValueError("thresholds must be positive")


@dataclass(frozen=True)
class TrackerCommand:
    azimuth_move: str   # "left" | "right" | "hold"
    elevation_move: str  # "up" | "down" | "hold"
    park: bool = False


def ldr_model(sp, to, irradiance):
    """
    Quadrant sensor counts for a sun position and tracker orientation.

    Each reading is ``round(1023 * irradiance/1000 * max(0, cos angle))``
    between the sun vector and that quadrant's normal, where the
    quadrant normals are the panel normal tilted 45 degrees toward the
    four diagonal in-face directions.
    """
    if irradiance < 0:
        raise ValueError("irradiance must be >= 0")
    s = sun_vector(sp)
    x_m, normal, z_m = tracker_basis(to)
    scale = 1023.0 * irradiance / 1000.0

    def count(diag):
        quad_normal = _SQRT_HALF * (normal + diag)
        c = max(0.0, float(s @ quad_normal))
        return int(min(1023, round(scale * c)))

    up = _SQRT_HALF * z_m
    right = _SQRT_HALF * x_m
    return LdrReadings(
        top_left=count(up - right),
        top_right=count(up + right),
        bottom_left=count(-up - right),
        bottom_right=count(-up + right),
    )


def tracking_step(r, th):
    """
    One pass of the tracking state machine.

    Pairwise averages feed two difference signals; below the light
    threshold the tracker parks, inside the deadband an axis holds,
    otherwise the printed branch directions apply (positive azimuth
    difference commands "right", positive elevation difference "up").
    """
    avg_top = (r.top_left + r.top_right) / 2.0
    avg_bottom = (r.bottom_left + r.bottom_right) / 2.0
    avg_left = (r.top_left + r.bottom_left) / 2.0
    avg_right = (r.top_right + r.bottom_right) / 2.0
    avgsum = (avg_top + avg_bottom + avg_left + avg_right) / 4.0
    if avgsum < th.avgsum_min:
        return TrackerCommand("hold", "hold", park=True)
    diff_azi = avg_left - avg_right
    diff_elev = avg_top - avg_bottom
    if abs(diff_azi) <= th.diff_deadband:
        azi = "hold"
    else:
        azi = "right" if diff_azi > 0 else "left"
    if abs(diff_elev) <= th.diff_deadband:
        elev = "hold"
    else:
        elev = "up" if diff_elev > 0 else "down"
    return TrackerCommand(azi, elev, park=False)


# command label -> signed orientation increment, in motor steps
_AZI_STEP = {"left": +1.0, "right": -1.0, "hold": 0.0}
_ELEV_STEP = {"up": +1.0, "down": -1.0, "hold": 0.0}


def apply_command(to, cmd, motor_step_deg, initial=None):
    """Orientation after one command; park snaps to the initial position."""
    if cmd.park:
        return initial if initial is not None else to
    te = to.theta_TE + _ELEV_STEP[cmd.elevation_move] * motor_step_deg
    ta = to.theta_TA + _AZI_STEP[cmd.azimuth_move] * motor_step_deg
    te = min(max(te, 0.0), 180.0)
    return TrackerOrientation(te, ta)


@dataclass(frozen=True)
class TrackingRecord:
    step: int
    orientation: TrackerOrientation
    alpha: float
    readings: LdrReadings
    command: TrackerCommand


def tracking_sim(sun_path, th, motor_step_deg=1.8, irradiance=1000.0,
                 start=None):
    """
    Closed-loop tracking along a list of sun positions.

    Per step: sense quadrant counts, run the state machine, move at most
    one motor step per axis (elevation clamped to [0, 180]).

    Parameters
    ----------
    sun_path : list of SunPosition
    th : TrackingThresholds
    motor_step_deg : float, > 0
    irradiance : float or sequence, W/m2 (scalar is broadcast)
    start : TrackerOrientation, optional (defaults to face-up at the
        first sun azimuth)

    Returns
    -------
    list of TrackingRecord
    """
    if motor_step_deg <= 0:
        raise ValueError("motor step must be > 0")
    if len(sun_path) == 0:
        raise ValueError("sun path must be nonempty")
    irr = np.broadcast_to(np.asarray(irradiance, dtype=float),
                          (len(sun_path),))
    if start is None:
        start = TrackerOrientation(90.0, sun_path[0].theta_SA)
    orientation = start
    records = []
    for k, sp in enumerate(sun_path):
        readings = ldr_model(sp, orientation, irr[k])
        cmd = tracking_step(readings, th)
        orientation = apply_command(orientation, cmd, motor_step_deg,
                                    initial=start)
        records.append(TrackingRecord(
            k, orientation, angle_of_incidence(sp, orientation),
            readings, cmd))
    return records
