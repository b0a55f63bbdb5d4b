"""Solar-tracked PV water-pumping simulator and analysis toolkit."""

from .lti import (Polynomial, TransferFunction, poly_roots, tf_feedback,
                  step_response, step_metrics, routh_table,
                  frequency_response, stability_margins, root_locus,
                  error_constants, ss_error_vs_gain)
from .pv import (PvCellParams, PvArrayParams, default_array, cell_current,
                 array_current, iv_curve, find_mpp, pv_efficiency,
                 thermal_voltage)
from .solar import (SunPosition, TrackerOrientation, declination,
                    zenith_and_elevation, sun_vector, tracker_basis,
                    angle_of_incidence, incidence_direction,
                    quartic_even_roots, optimal_orientation)
from .mppt import (MpptState, ConverterSetting, boost_ratio, po_step,
                   ic_step, mppt_run)
from .tracking import (LdrReadings, TrackingThresholds, TrackerCommand,
                       ldr_model, tracking_step, tracking_sim)
from .plants import (MotorParams, PidParams, TankParams, ValveParams,
                     motor_tf, pid_tf, closed_loop_char_poly, pump_tf,
                     tank_tf, valve_linearize, tank_loop_tf,
                     tank_second_order, cascade_system, metering_pump_tf,
                     preset, PRESETS)
from .scenario import (ScenarioConfig, RelayState, control_logic_step,
                       run_scenario)
from .config import parse_config
from .validation import build_report

__version__ = "0.1.0"
