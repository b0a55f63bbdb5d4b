"""
Line-oriented ``key = value`` configuration files with ``[section]``
headers.

The parser keeps line numbers so diagnostics can point at the offending
line; unknown keys and duplicate keys are hard errors.  Profiles are
comma-separated breakpoint lists, e.g.::

    [environment]
    irradiance_profile = 0:100, 3600:950, 7200:60
    sun_path = 0:30:95, 3600:60:180, 7200:30:265
"""

from dataclasses import dataclass, fields

from .scenario import ConfigError, ScenarioConfig

# section -> config field; scalar fields parse as float
_SCHEMA = {
    "scenario": ("duration_s", "dt_s"),
    "environment": ("irradiance_profile", "sun_path"),
    "battery": ("battery_capacity_Wh", "soc_init_pct",
                "battery_min_soc_pct"),
    "tanks": ("tank1_volume_L", "tank2_volume_L", "tank1_init_pct",
              "tank2_init_pct", "tank_low_pct", "tank_full_pct"),
    "pumps": ("pump_flow_Lpm", "pump_tau_s", "pump1_power_W",
              "pump2_power_W"),
    "soil": ("soil_init_pct", "soil_dry_pct", "soil_wet_pct",
             "soil_gain_pct_per_L", "soil_decay_pct_per_hr"),
    "tracking": ("motor_step_deg", "tracker_init_elev", "tracker_init_azi"),
    "mppt": ("mppt_algo", "mppt_dv_step"),
    "analysis": ("kind", "preset", "tf_text", "t_end", "dt", "gains"),
}
_PROFILE_KEYS = {"irradiance_profile": 2, "sun_path": 3}
_STRING_KEYS = {"mppt_algo", "kind", "preset", "tf_text", "gains"}
_ANALYSIS_KINDS = ("analyze", "step", "bode", "rlocus", "routh", "errors")


@dataclass(frozen=True)
class AnalysisRequest:
    """A transfer-function analysis described by a config file."""

    kind: str
    preset: str = None
    tf_text: str = None
    t_end: float = None
    dt: float = None
    gains: str = None

    def validate(self):
        if self.kind not in _ANALYSIS_KINDS:
            raise ConfigError(
                f"analysis kind must be one of {', '.join(_ANALYSIS_KINDS)}")
        if self.preset is None and self.tf_text is None:
            raise ConfigError("analysis needs a preset or a tf_text system")
        return self


def _parse_profile(key, raw, lineno, width):
    points = []
    for chunk in raw.split(","):
        parts = chunk.strip().split(":")
        if len(parts) != width:
            raise ConfigError(
                f"line {lineno}: {key} expects {width} colon-separated "
                f"numbers per breakpoint, got {chunk.strip()!r}")
        try:
            points.append(tuple(float(p) for p in parts))
        except ValueError:
            raise ConfigError(
                f"line {lineno}: unparsable number in {chunk.strip()!r}")
    return tuple(points)


def parse_config_text(text, defaults=None):
    """
    Parse configuration text.

    Returns a validated :class:`ScenarioConfig`, or an
    :class:`AnalysisRequest` when an ``[analysis]`` section is present.
    """
    key_section = {}
    for section, keys in _SCHEMA.items():
        for key in keys:
            key_section[key] = section

    seen = {}       # key -> first line number
    values = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(
                    f"line {lineno}: unknown section [{section}]; known: "
                    + ", ".join(sorted(_SCHEMA)))
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got "
                              f"{line!r}")
        key, _, raw_value = line.partition("=")
        key, raw_value = key.strip(), raw_value.strip()
        if key not in key_section:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if section is not None and key_section[key] != section:
            raise ConfigError(
                f"line {lineno}: key {key!r} belongs in "
                f"[{key_section[key]}], not [{section}]")
        if key in seen:
            raise ConfigError(
                f"duplicate key {key!r} on lines {seen[key]} and {lineno}")
        seen[key] = lineno
        if key in _PROFILE_KEYS:
            values[key] = _parse_profile(key, raw_value, lineno,
                                         _PROFILE_KEYS[key])
        elif key in _STRING_KEYS:
            values[key] = raw_value
        else:
            try:
                values[key] = float(raw_value)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: unparsable number {raw_value!r} "
                    f"for key {key!r}")

    analysis_keys = set(_SCHEMA["analysis"])
    picked_analysis = {k: v for k, v in values.items() if k in analysis_keys}
    if picked_analysis:
        scenario_keys = set(values) - analysis_keys
        if scenario_keys:
            raise ConfigError(
                "config mixes [analysis] with scenario keys: "
                + ", ".join(sorted(scenario_keys)))
        if "kind" not in picked_analysis:
            raise ConfigError("[analysis] requires a 'kind' key")
        return AnalysisRequest(**picked_analysis).validate()

    base = defaults if defaults is not None else ScenarioConfig()
    merged = {f.name: getattr(base, f.name) for f in fields(ScenarioConfig)}
    merged.update(values)
    return ScenarioConfig(**merged).validate()


def parse_config(path, defaults=None):
    """Parse a configuration file; diagnostics carry line numbers."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return parse_config_text(text, defaults=defaults)
