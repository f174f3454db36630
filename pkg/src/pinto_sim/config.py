"""JSON experiment documents.

Every physical quantity carries its unit in the key name (``mass_kg``,
``release_angle_rad``). Any ``*_rad`` key may be given as ``*_deg`` instead;
it is converted on load and always written back in radians. Missing keys
take the reference values, so ``{}`` is the reference configuration.

Layout::

    {"robot": {..., "motor": {...}, "tsa": {...}, "springs": [{..., "strip": {...}}],
               "leg": {...}, "latch": {...}, "band": {...}},
     "output": {"dir": "out", "svg": true},
     "sweep": {"param": null, "values": [], "metric": "takeoff_energy"}}
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .actuation import AntagonistBand, MotorSpec, TwistedStringActuator
from .errors import ConfigError, PintoSimError
from .jumpdyn import RobotConfig
from .lamsa import ActuationMode, LatchPhase, LatchState
from .linkage import LegGeometry, SpringLinkGeometry
from .spring import SpringAssembly, StripSpec

__all__ = [
    "ExperimentConfig",
    "OutputOptions",
    "SweepOptions",
    "load_config",
    "parse_config",
    "config_to_dict",
    "dump_config",
    "reference_document",
    "set_key",
    "METRICS",
]

METRICS = ("takeoff_energy", "propulsion_time", "apex_height", "liftoff_velocity",
           "loading_time", "avg_dc_power", "electrical_energy")


@dataclass(frozen=True)
class OutputOptions:
    dir: str = "out"
    svg: bool = True


@dataclass(frozen=True)
class SweepOptions:
    param: Optional[str] = None
    values: tuple = ()
    metric: str = "takeoff_energy"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))


@dataclass(frozen=True)
class ExperimentConfig:
    robot: RobotConfig = field(default_factory=RobotConfig)
    output: OutputOptions = field(default_factory=OutputOptions)
    sweep: SweepOptions = field(default_factory=SweepOptions)


# (json key, attribute, kind); kinds: float, int, bool, str, mode, pair, floats
_MOTOR = [
    ("kv_rpm_per_v", "kv", "float"),
    ("winding_resistance_ohm", "winding_resistance", "float"),
    ("v_bus_v", "v_bus", "float"),
    ("i_max_a", "i_max", "float"),
    ("rotor_inertia_kg_m2", "rotor_inertia", "float"),
]
_TSA = [
    ("string_length_m", "string_length", "float"),
    ("string_radius_m", "string_radius", "float"),
    ("pulley_radius_m", "pulley_radius", "float"),
    ("theta_0_rad", "theta_0", "float"),
    ("theta_m_rad", "theta_m", "float"),
]
_STRIP = [
    ("width_m", "width", "float"),
    ("thickness_m", "thickness", "float"),
    ("free_length_m", "free_length", "float"),
    ("youngs_modulus_pa", "youngs_modulus", "float"),
    ("count", "count", "int"),
]
_ARMS = [
    ("L1_m", "L1", "float"),
    ("L2_m", "L2", "float"),
    ("phi_rest_rad", "phi_rest", "float"),
    ("phi_min_rad", "phi_min", "float"),
]
_LEG = [
    ("l_C_m", "l_C", "float"),
    ("l_D_m", "l_D", "float"),
    ("l_E_m", "l_E", "float"),
    ("l_F_m", "l_F", "float"),
    ("l_G_m", "l_G", "float"),
    ("elbow", "elbow", "int"),
    ("q_C_range_rad", "q_C_range", "pair"),
    ("q_D_range_rad", "q_D_range", "pair"),
]
_LATCH = [
    ("release_angle_rad", "release_angle", "float"),
    ("reset_angle_rad", "reset_angle", "float"),
    ("latch_angle_rad", "latch_angle", "float"),
]
_BAND = [
    ("stiffness_n_m_per_rad", "stiffness", "float"),
    ("rest_angle_rad", "rest_angle", "float"),
]
_ROBOT = [
    ("mass_kg", "mass", "float"),
    ("gravity_m_s2", "gravity", "float"),
    ("mode", "mode", "mode"),
    ("n_motors", "n_motors", "int"),
    ("bushing_mu", "bushing_mu", "float"),
    ("bushing_radius_m", "bushing_radius", "float"),
    ("viscous_damping_n_m_s_per_rad", "viscous_damping", "float"),
    ("string_efficiency", "string_efficiency", "float"),
    ("string_stiffness_n_per_m", "string_stiffness", "float"),
    ("input_inertia_kg_m2", "input_inertia", "float"),
    ("stop_stiffness_n_m_per_rad", "stop_stiffness", "float"),
    ("duty_times_s", "duty_times", "floats"),
    ("duty_values", "duty_values", "floats"),
    ("kp_per_rad", "kp", "float"),
    ("kp_target_rad", "kp_target", "float"),
    ("dt_s", "dt", "float"),
    ("t_max_s", "t_max", "float"),
    ("event_tol_s", "event_tol", "float"),
    ("record_dt_s", "record_dt", "float"),
    ("energy_check", "energy_check", "bool"),
    ("energy_check_tol", "energy_check_tol", "float"),
]
_ROBOT_NESTED = ("motor", "tsa", "springs", "leg", "latch", "band")


def _convert(value, kind, where):
    def bad(expect):
        return ConfigError(f"{where}: expected {expect}, got {value!r}")

    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad("a number")
        if not math.isfinite(value):
            raise bad("a finite number")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise bad("an integer")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise bad("true or false")
        return value
    if kind == "optstr" and value is None:
        return None
    if kind in ("str", "optstr"):
        if not isinstance(value, str):
            raise bad("a string")
        return value
    if kind == "mode":
        try:
            return ActuationMode.parse(value)
        except PintoSimError as e:
            raise ConfigError(f"{where}: {e}") from None
    if kind in ("pair", "floats"):
        if not isinstance(value, list):
            raise bad("a list of numbers")
        out = tuple(_convert(v, "float", where) for v in value)
        if kind == "pair" and len(out) != 2:
            raise bad("two numbers")
        return out
    raise AssertionError(kind)


def _angle(value, kind, where):
    v = _convert(value, kind, where)
    if isinstance(v, tuple):
        return tuple(math.radians(x) for x in v)
    return math.radians(v)


def _read_section(doc, spec, where, nested=()):
    """Map a JSON object onto attribute values; ``nested`` keys are skipped."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object, got {doc!r}")
    by_key = {k: (a, kind) for k, a, kind in spec}
    out = {}
    for key, value in doc.items():
        path = f"{where}.{key}"
        if key in nested:
            continue
        if key in by_key:
            attr, kind = by_key[key]
            conv = _convert(value, kind, path)
        elif key.endswith("_deg") and key[:-4] + "_rad" in by_key:
            attr, kind = by_key[key[:-4] + "_rad"]
            if key[:-4] + "_rad" in doc:
                raise ConfigError(f"{path}: both {key} and {key[:-4]}_rad given")
            conv = _angle(value, kind, path)
        else:
            raise ConfigError(f"{path}: unknown key")
        out[attr] = conv
    return out


def _build(cls, base, values, spec, where):
    """``replace(base, **values)``; errors name the offending JSON key."""
    try:
        return replace(base, **values) if base is not None else cls(**values)
    except PintoSimError as e:
        raise ConfigError(f"{where}: {_blame(str(e), spec)}{e}") from None
    except TypeError as e:
        raise ConfigError(f"{where}: {e}") from None


def _blame(msg, spec):
    hits = []
    for key, attr, _ in spec:
        m = re.search(r"\b%s\b" % re.escape(attr), msg)
        if m:
            hits.append((m.start(), key))
    return f"{min(hits)[1]}: " if hits else ""


def _spring_from(doc, base: SpringAssembly, where):
    vals = _read_section(doc, _ARMS, where, nested=("strip",))
    strip_doc = doc.get("strip", {})
    strip = _build(StripSpec, base.strip, _read_section(strip_doc, _STRIP, where + ".strip"),
                   _STRIP, where + ".strip")
    geom = _build(SpringLinkGeometry, base.geometry, vals, _ARMS, where)
    return _build(SpringAssembly, None, {"geometry": geom, "strip": strip},
                  _ARMS + [("strip.free_length_m", "free_length", "")], where)


def _robot_from(doc, where="robot") -> RobotConfig:
    base = RobotConfig()
    vals = _read_section(doc, _ROBOT, where, nested=_ROBOT_NESTED)
    for key, cls, spec in (("motor", MotorSpec, _MOTOR), ("tsa", TwistedStringActuator, _TSA),
                           ("leg", LegGeometry, _LEG), ("band", AntagonistBand, _BAND)):
        if key in doc:
            sub = _read_section(doc[key], spec, f"{where}.{key}")
            vals[key] = _build(cls, getattr(base, key), sub, spec, f"{where}.{key}")
    if "latch" in doc:
        sub = _read_section(doc["latch"], _LATCH, f"{where}.latch")
        sub.update(phase=LatchPhase.LATCHED, armed=True)
        vals["latch"] = _build(LatchState, base.latch, sub, _LATCH, f"{where}.latch")
    if "springs" in doc:
        items = doc["springs"]
        if not isinstance(items, list):
            raise ConfigError(f"{where}.springs: expected a list of spring objects")
        # entries override the reference springs position by position
        springs = []
        for i, item in enumerate(items):
            tmpl = base.springs[min(i, len(base.springs) - 1)]
            springs.append(_spring_from(item, tmpl, f"{where}.springs[{i}]"))
        vals["springs"] = tuple(springs)
    nested_spec = _ROBOT + [("latch.release_angle_rad", "latch", ""), ("leg", "leg", "")]
    return _build(RobotConfig, base, vals, nested_spec, where)


def parse_config(doc: Any) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from an already-decoded document."""
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected an object")
    for key in doc:
        if key not in ("robot", "output", "sweep"):
            raise ConfigError(f"{key}: unknown key")
    robot = _robot_from(doc.get("robot", {}))
    out = _read_section(doc.get("output", {}), [("dir", "dir", "str"), ("svg", "svg", "bool")],
                        "output")
    sw_doc = doc.get("sweep", {})
    sw = _read_section(sw_doc, [("param", "param", "optstr"), ("values", "values", "floats"),
                                ("metric", "metric", "str")], "sweep")
    if sw.get("metric", "takeoff_energy") not in METRICS:
        raise ConfigError(f"sweep.metric: {sw['metric']!r} not one of {', '.join(METRICS)}")
    return ExperimentConfig(robot, OutputOptions(**out), SweepOptions(**sw))


def _decode(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None
    return parse_config(_decode(text, str(path)))


def _section(obj, spec):
    out = {}
    for key, attr, kind in spec:
        v = getattr(obj, attr)
        if kind == "mode":
            v = v.value
        elif kind in ("pair", "floats"):
            v = list(v)
        out[key] = v
    return out


def config_to_dict(cfg: ExperimentConfig) -> dict:
    r = cfg.robot
    robot = _section(r, _ROBOT)
    robot["motor"] = _section(r.motor, _MOTOR)
    robot["tsa"] = _section(r.tsa, _TSA)
    robot["springs"] = [dict(_section(a.geometry, _ARMS), strip=_section(a.strip, _STRIP))
                        for a in r.springs]
    robot["leg"] = _section(r.leg, _LEG)
    robot["latch"] = _section(r.latch, _LATCH)
    robot["band"] = _section(r.band, _BAND)
    return {
        "robot": robot,
        "output": {"dir": cfg.output.dir, "svg": cfg.output.svg},
        "sweep": {"param": cfg.sweep.param, "values": list(cfg.sweep.values),
                  "metric": cfg.sweep.metric},
    }


def dump_config(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


def reference_document() -> dict:
    """The committed reference configuration as a JSON object."""
    text = resources.files("pinto_sim").joinpath("data/reference_config.json").read_text("utf-8")
    return _decode(text, "reference_config.json")


def set_key(doc: dict, dotted: str, value) -> dict:
    """Return a copy of ``doc`` with ``a.b.c`` (or ``springs[*].strip.count``)
    set to ``value``. ``[*]`` applies the value to every list entry."""
    doc = json.loads(json.dumps(doc))
    parts = dotted.split(".")

    def walk(node, parts):
        head, rest = parts[0], parts[1:]
        m = re.fullmatch(r"(\w+)\[(\*|\d+)\]", head)
        if m:
            name, idx = m.groups()
            lst = node.get(name)
            if not isinstance(lst, list):
                raise ConfigError(f"{dotted}: {name} is not a list")
            targets = lst if idx == "*" else [lst[int(idx)]] if int(idx) < len(lst) else None
            if targets is None:
                raise ConfigError(f"{dotted}: index {idx} out of range")
            for t in targets:
                walk(t, rest) if rest else None
            if not rest:
                raise ConfigError(f"{dotted}: cannot replace a whole list entry")
            return
        if not rest:
            node.pop(_twin(head), None)
            node[head] = value
            return
        nxt = node.setdefault(head, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"{dotted}: {head} is not an object")
        walk(nxt, rest)

    walk(doc, parts)
    return doc


def _twin(key):
    if key.endswith("_deg"):
        return key[:-4] + "_rad"
    if key.endswith("_rad"):
        return key[:-4] + "_deg"
    return key
