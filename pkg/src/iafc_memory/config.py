"""Run configuration files: strict YAML with an explicit unit on every quantity.

Unit rule for frequencies: ``Hz``/``kHz``/``MHz``/``GHz``/``THz`` are ordinary
frequencies and are multiplied by 2 pi; ``rad/s`` (with k/M/G prefixes) and
inverse times (``/s``, ``/us``, ``/ns``, ``1/ns``, ``ns^-1`` ...) are taken
as angular rates as written.  So ``300 MHz`` becomes ``2 pi 3e8 rad/s`` while
``7 /ns`` stays ``7e9 s^-1``.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .sweep import PARAMETER_ALIASES

__all__ = [
    "ConfigError",
    "RunConfig",
    "MODES",
    "load_config",
    "parse_config",
    "dump_config",
    "config_hash",
    "parse_quantity",
]

MODES = ("comb", "echo", "absorption", "sweep", "optimize")
TWO_PI = 2 * math.pi


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


# unit -> (scale, multiply by 2 pi)
_FREQUENCY = {
    "Hz": (1.0, True), "kHz": (1e3, True), "MHz": (1e6, True), "GHz": (1e9, True),
    "THz": (1e12, True),
    "rad/s": (1.0, False), "krad/s": (1e3, False), "Mrad/s": (1e6, False),
    "Grad/s": (1e9, False),
}
for _t, _s in {"s": 1.0, "ms": 1e3, "us": 1e6, "ns": 1e9}.items():
    for _form in (f"/{_t}", f"1/{_t}", f"{_t}^-1"):
        _FREQUENCY[_form] = (_s, False)

UNITS = {
    "frequency": _FREQUENCY,
    "time": {"s": (1.0, False), "ms": (1e-3, False), "us": (1e-6, False),
             "ns": (1e-9, False), "ps": (1e-12, False)},
    "field": {"T": (1.0, False), "mT": (1e-3, False), "uT": (1e-6, False), "G": (1e-4, False)},
    "length": {"m": (1.0, False), "mm": (1e-3, False), "um": (1e-6, False), "nm": (1e-9, False)},
    "volume": {"m3": (1.0, False), "m^3": (1.0, False), "mm3": (1e-9, False),
               "mm^3": (1e-9, False), "um3": (1e-18, False), "um^3": (1e-18, False)},
}
# unit written by dump_config; parses back without any arithmetic
CANONICAL = {"frequency": "rad/s", "time": "s", "field": "T", "length": "m", "volume": "m3"}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S+)\s*$")

REQUIRED = object()

# section -> key -> (kind, default)
SCHEMA = {
    "comb.ideal": {
        "n_teeth": ("int", 7),
        "spacing": ("frequency", REQUIRED),
        "linewidth": ("frequency", REQUIRED),
        "coupling": ("frequency", REQUIRED),
    },
    "comb.atomic": {
        "atom": ("str", REQUIRED),
        "field": ("field", REQUIRED),
        "polarization": ("int", 1),
        "carrier_offset": ("frequency", None),
        "data": ("str", None),
    },
    "cavity": {
        "kappa": ("frequency", REQUIRED),
        "detuning": ("frequency", 0.0),
        "mode_volume": ("volume", None),
    },
    "pulse": {
        "width": ("width", "optimize"),
        "center": ("time", None),
    },
    "grid": {
        "samples_cap": ("int", None),
        "echo_spacing": ("frequency", None),
    },
    "absorption": {
        "start": ("frequency", None),
        "stop": ("frequency", None),
        "points": ("int", 4001),
    },
    "sweep": {
        "parameter": ("str", REQUIRED),
        "start": ("sweep", None),
        "stop": ("sweep", None),
        "points": ("int", 2),
        "scale": ("str", "linear"),
        "values": ("sweep_list", None),
        "optimize_pulse": ("bool", True),
    },
    "optimize": {
        "coupling": ("range", REQUIRED),
        "kappa": ("range", REQUIRED),
        "refine": ("bool", True),
    },
    "output": {
        "dir": ("str", None),
    },
}
TOP_LEVEL = ("mode", "comb", "cavity", "pulse", "grid", "absorption", "sweep", "optimize", "output")

# kind of each sweepable estimator parameter
SWEEP_KINDS = {
    "coupling": "frequency",
    "kappa": "frequency",
    "cavity_detuning": "frequency",
    "pulse_width": "frequency",
    "linewidth": "frequency",
    "spacing": "frequency",
    "carrier_offset": "frequency",
    "field": "field",
    "mode_volume": "volume",
    "finesse": "number",
}


def parse_quantity(text, kind: str, key: str = "value") -> float:
    """``"300 MHz"`` -> internal SI value (rad/s, s, T, m or m^3)."""
    if kind == "number":
        if isinstance(text, bool) or not isinstance(text, (int, float)):
            raise ConfigError(f"{key}: expected a plain number, got {text!r}")
        return float(text)
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        raise ConfigError(
            f"{key}: {text!r} has no unit; write it as e.g. '{text} {CANONICAL[kind]}'"
        )
    match = _QUANTITY.match(str(text))
    if not match:
        raise ConfigError(f"{key}: cannot parse quantity {text!r}")
    number, unit = match.groups()
    table = UNITS[kind]
    if unit not in table:
        raise ConfigError(
            f"{key}: unit {unit!r} is not a {kind} unit (expected one of {', '.join(table)})"
        )
    scale, angular = table[unit]
    value = float(number)
    if scale != 1.0:
        value *= scale
    if angular:
        value *= TWO_PI
    return value


def format_quantity(value: float, kind: str) -> str | float:
    if kind == "number":
        return float(value)
    return f"{float(value)!r} {CANONICAL[kind]}"


@dataclass
class RunConfig:
    """Fully resolved run description; every quantity in SI / rad s^-1."""

    mode: str
    comb_source: str
    comb: dict
    cavity: dict
    pulse: dict
    grid: dict
    absorption: dict = field(default_factory=dict)
    sweep: dict | None = None
    optimize: dict | None = None
    output_dir: str | None = None

    def estimator_params(self) -> dict:
        """Keyword arguments for :class:`CavityMemory`."""
        params = {
            "comb": self.comb_source,
            "kappa": self.cavity["kappa"],
            "cavity_detuning": self.cavity["detuning"],
            "mode_volume": self.cavity["mode_volume"],
            "pulse_width": self.pulse["width"],
            "pulse_center": self.pulse["center"],
            "echo_spacing": self.grid["echo_spacing"],
        }
        if self.grid["samples_cap"] is not None:
            params["samples_cap"] = self.grid["samples_cap"]
        if self.comb_source == "ideal":
            params.update(n_teeth=self.comb["n_teeth"], spacing=self.comb["spacing"],
                          linewidth=self.comb["linewidth"], coupling=self.comb["coupling"])
        else:
            params.update(atom=self.comb["atom"], field=self.comb["field"],
                          polarization=self.comb["polarization"],
                          carrier_offset=self.comb["carrier_offset"],
                          atom_data=self.comb["data"])
        return params


# ------------------------------------------------------------------ parsing

def _section(raw, name: str, schema: dict, extra_kinds: dict | None = None) -> dict:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected a mapping, got {type(raw).__name__}")
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]}: unknown key (allowed: {', '.join(schema)})")
    out = {}
    for key, (kind, default) in schema.items():
        path = f"{name}.{key}"
        if key not in raw or raw[key] is None:
            if default is REQUIRED:
                raise ConfigError(f"{path}: missing required key")
            out[key] = default
            continue
        kind = (extra_kinds or {}).get(kind, kind)
        out[key] = _value(raw[key], kind, path)
    return out


def _value(value, kind: str, path: str):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if kind == "width":
        if value == "optimize":
            return value
        return parse_quantity(value, "frequency", path)
    if kind == "range":
        if not isinstance(value, dict) or set(value) != {"start", "stop", "points"}:
            raise ConfigError(f"{path}: expected a mapping with start, stop and points")
        return (parse_quantity(value["start"], "frequency", f"{path}.start"),
                parse_quantity(value["stop"], "frequency", f"{path}.stop"),
                _value(value["points"], "int", f"{path}.points"))
    if kind.endswith("_list"):
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{path}: expected a non-empty list")
        return tuple(parse_quantity(v, kind[:-5], f"{path}[{i}]") for i, v in enumerate(value))
    return parse_quantity(value, kind, path)


def parse_config(raw: dict, mode: str | None = None) -> RunConfig:
    """Validate a parsed YAML mapping.  ``mode`` (from the command line) wins
    over a missing ``mode`` key and must agree with a present one."""
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    if "tool" in raw and "config" in raw:
        # a run manifest: rerun the configuration it recorded
        raw = raw["config"]
    unknown = sorted(set(raw) - set(TOP_LEVEL))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key (allowed: {', '.join(TOP_LEVEL)})")

    file_mode = raw.get("mode")
    if file_mode is not None and mode is not None and file_mode != mode:
        raise ConfigError(f"mode: file says {file_mode!r} but the command is {mode!r}")
    mode = mode or file_mode
    if mode is None:
        raise ConfigError("mode: missing required key")
    if mode not in MODES:
        raise ConfigError(f"mode: must be one of {', '.join(MODES)}, got {mode!r}")

    comb_raw = raw.get("comb")
    if not isinstance(comb_raw, dict):
        raise ConfigError("comb: missing required block (comb.ideal or comb.atomic)")
    sources = [k for k in ("ideal", "atomic") if k in comb_raw]
    unknown = sorted(set(comb_raw) - {"ideal", "atomic"})
    if unknown:
        raise ConfigError(f"comb.{unknown[0]}: unknown key (allowed: ideal, atomic)")
    if len(sources) != 1:
        if sources:
            raise ConfigError("comb.ideal and comb.atomic: give exactly one comb source, not both")
        raise ConfigError("comb: needs one of comb.ideal or comb.atomic")
    source = sources[0]
    comb = _section(comb_raw[source], f"comb.{source}", SCHEMA[f"comb.{source}"])

    cavity = _section(raw.get("cavity"), "cavity", SCHEMA["cavity"])
    if source == "atomic":
        if cavity["mode_volume"] is None:
            raise ConfigError("cavity.mode_volume: required for an atomic comb")
        if comb["polarization"] not in (-1, 0, 1):
            raise ConfigError("comb.atomic.polarization: must be -1, 0 or 1")
        from .atomic import get_atom

        try:
            get_atom(comb["atom"], comb["data"])
        except (KeyError, OSError) as exc:
            raise ConfigError(f"comb.atomic.atom: {exc}") from None
    elif cavity["mode_volume"] is not None:
        raise ConfigError("cavity.mode_volume: only meaningful for an atomic comb")

    pulse = _section(raw.get("pulse"), "pulse", SCHEMA["pulse"])
    grid = _section(raw.get("grid"), "grid", SCHEMA["grid"])
    absorption = _section(raw.get("absorption"), "absorption", SCHEMA["absorption"])

    sweep = None
    if raw.get("sweep") is not None or mode == "sweep":
        if raw.get("sweep") is None:
            raise ConfigError("sweep: block required in sweep mode")
        param = raw["sweep"].get("parameter") if isinstance(raw["sweep"], dict) else None
        target = PARAMETER_ALIASES.get(param, param)
        if target not in SWEEP_KINDS:
            raise ConfigError(
                f"sweep.parameter: cannot sweep {param!r} (choose from {', '.join(SWEEP_KINDS)})"
            )
        kind = SWEEP_KINDS[target]
        sweep = _section(raw["sweep"], "sweep", SCHEMA["sweep"],
                         {"sweep": kind, "sweep_list": f"{kind}_list"})
        if sweep["values"] is None and (sweep["start"] is None or sweep["stop"] is None):
            raise ConfigError("sweep.values: give either values or start/stop/points")
        if sweep["values"] is not None and (sweep["start"] is not None or sweep["stop"] is not None):
            raise ConfigError("sweep.values and sweep.start: give values or a range, not both")

    optimize = None
    if raw.get("optimize") is not None or mode == "optimize":
        if raw.get("optimize") is None:
            raise ConfigError("optimize: block required in optimize mode")
        if source != "ideal":
            raise ConfigError("optimize: the (coupling, kappa) search needs comb.ideal")
        optimize = _section(raw["optimize"], "optimize", SCHEMA["optimize"])

    output = _section(raw.get("output"), "output", SCHEMA["output"])
    return RunConfig(mode=mode, comb_source=source, comb=comb, cavity=cavity, pulse=pulse,
                     grid=grid, absorption=absorption, sweep=sweep, optimize=optimize,
                     output_dir=output["dir"])


def load_config(path, mode: str | None = None) -> RunConfig:
    """Read and validate a YAML config (or a run manifest) from ``path``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: {path} is not valid YAML: {exc}") from None
    return parse_config(raw, mode)


# ------------------------------------------------------------------ writing

def _dump_section(values: dict, schema: dict, extra_kinds: dict | None = None) -> dict:
    out = {}
    for key, (kind, _) in schema.items():
        value = values.get(key)
        if value is None:
            continue
        kind = (extra_kinds or {}).get(kind, kind)
        if kind in ("int", "bool", "str") or (kind == "width" and value == "optimize"):
            out[key] = value
        elif kind == "width":
            out[key] = format_quantity(value, "frequency")
        elif kind == "range":
            out[key] = {"start": format_quantity(value[0], "frequency"),
                        "stop": format_quantity(value[1], "frequency"), "points": value[2]}
        elif kind.endswith("_list"):
            out[key] = [format_quantity(v, kind[:-5]) for v in value]
        else:
            out[key] = format_quantity(value, kind)
    return out


def config_to_dict(cfg: RunConfig) -> dict:
    """Canonical mapping that :func:`parse_config` maps back to ``cfg`` exactly."""
    out = {"mode": cfg.mode,
           "comb": {cfg.comb_source: _dump_section(cfg.comb, SCHEMA[f"comb.{cfg.comb_source}"])},
           "cavity": _dump_section(cfg.cavity, SCHEMA["cavity"]),
           "pulse": _dump_section(cfg.pulse, SCHEMA["pulse"])}
    for name in ("grid", "absorption"):
        section = _dump_section(getattr(cfg, name), SCHEMA[name])
        if section:
            out[name] = section
    if cfg.sweep is not None:
        kind = SWEEP_KINDS[PARAMETER_ALIASES.get(cfg.sweep["parameter"], cfg.sweep["parameter"])]
        out["sweep"] = _dump_section(cfg.sweep, SCHEMA["sweep"],
                                     {"sweep": kind, "sweep_list": f"{kind}_list"})
    if cfg.optimize is not None:
        out["optimize"] = _dump_section(cfg.optimize, SCHEMA["optimize"])
    if cfg.output_dir is not None:
        out["output"] = {"dir": cfg.output_dir}
    return out


def dump_config(cfg: RunConfig, path=None) -> str:
    """YAML text for ``cfg``; written to ``path`` when given."""
    text = yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=False)
    if path is not None:
        Path(path).write_text(text)
    return text


def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the canonical config, ignoring the output directory."""
    data = config_to_dict(cfg)
    data.pop("output", None)
    return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()
