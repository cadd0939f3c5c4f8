"""Scenario configuration: YAML files validated against a versioned schema.

A scenario file looks like::

    version: 1
    name: fig3_idealized
    model: effective            # full | effective | both
    params_file: baseline_params.yaml   # optional, relative to this file
    params: {gamma_sp_e2: 0.0}       # overrides on top of params_file
    space: {n_max1: 10, n_max2: 5}
    pulses:
      drive: {amplitude: 2.0e12, width: 1.0e-9, centers: [4.0e-9]}
    time: {t_end: 2.0e-8, points: 2001}
    observables: [n1, n2, rho_11, rho_22, rho_ee, n_gen]
    integrator: {rtol: 1.0e-8, atol: 1.0e-10, method: bdf}

Subcommand-specific sections are ``sweep``, ``validate`` and ``fit``.
Unknown keys anywhere are rejected.  Rates are in 1/s, frequencies in
rad/s and times in s unless a scenario works in dimensionless units.
"""

from __future__ import annotations

import copy
import dataclasses
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np
import yaml

from .hilbert import SpaceConfig
from .model import SystemParams
from .pulses import PulseTrain

SCHEMA_VERSION = 1

PARAM_KEYS = tuple(f.name for f in dataclasses.fields(SystemParams))

DYNAMICS_OBSERVABLES = ("n1", "n2", "rho_11", "rho_22", "rho_ee", "n_gen", "drive_envelope", "pump_envelope")
STEADY_OBSERVABLES = ("rho_11", "rho_22", "rho_ee", "n1", "n2", "g2_mode1", "g2_mode2")

# sections whose scalar entries may be changed from the command line
OVERRIDABLE = ("integrator", "validate")

_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}

_train = {
    "type": "object",
    "additionalProperties": False,
    "required": ["amplitude", "width", "centers"],
    "properties": {
        "amplitude": _number,
        "width": _positive,
        "centers": {"type": "array", "items": _number},
    },
}

_axis = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name"],
    "properties": {
        "name": {"enum": list(PARAM_KEYS)},
        "values": {"type": "array", "items": _number, "minItems": 1},
        "start": _number,
        "stop": _number,
        "num": {"type": "integer", "minimum": 1},
        "scale": {"enum": ["linear", "log"]},
    },
    "oneOf": [{"required": ["values"]}, {"required": ["start", "stop", "num"]}],
}

_fit_mode = {
    "type": "object",
    "additionalProperties": False,
    "required": ["spectrum", "purcell_ratio", "transition_frequency"],
    "properties": {
        "spectrum": {"type": "string"},
        "window": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
        "purcell_ratio": {"type": "number", "minimum": 1},
        "transition_frequency": _positive,
    },
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "name"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "model": {"enum": ["full", "effective", "both"]},
        "params_file": {"type": "string"},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _number for k in PARAM_KEYS},
        },
        "space": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"n_max1": {"type": "integer", "minimum": 1}, "n_max2": {"type": "integer", "minimum": 1}},
        },
        "pulses": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"drive": _train, "pump": _train},
        },
        "time": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_end"],
            "properties": {"t_end": _positive, "points": {"type": "integer", "minimum": 2}},
        },
        "observables": {"type": "array", "items": {"type": "string"}, "minItems": 1, "uniqueItems": True},
        "integrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rtol": _positive,
                "atol": _positive,
                "method": {"enum": ["bdf", "expm"]},
                "max_evaluations": {"type": "integer", "minimum": 1},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["parameters"],
            "properties": {"parameters": {"type": "array", "items": _axis, "minItems": 1, "maxItems": 2}},
        },
        "validate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"min_deviation": {"type": "number", "minimum": 0},
                           "max_deviation": {"type": "number", "minimum": 0}},
        },
        "fit": {
            "type": "object",
            "additionalProperties": False,
            "required": ["modes", "emitter"],
            "properties": {
                "modes": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["mode1", "mode2"],
                    "properties": {"mode1": _fit_mode, "mode2": _fit_mode},
                },
                "emitter": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["dipole", "permittivity"],
                    "properties": {"dipole": _positive, "permittivity": {"type": "number", "minimum": 1}},
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"table": {"type": "string"}, "metadata": {"type": "string"}},
        },
    },
}

PARAMS_FILE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "params"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "source": {"type": "string"},
        "params": SCHEMA["properties"]["params"],
        "derived": {"type": "object", "additionalProperties": _number},
    },
}

DEFAULT_POINTS = 2001

DEFAULTS: dict[str, Any] = {
    "model": "effective",
    "space": {"n_max1": 10, "n_max2": 5},
    "integrator": {"rtol": 1e-8, "atol": 1e-10, "method": "bdf", "max_evaluations": 2_000_000},
}


class _Loader(yaml.SafeLoader):
    """Safe loader that reads ``1e10`` as a float (YAML 1.2 rule)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
                |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                |[-+]?\.(?:inf|Inf|INF)
                |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)


def safe_load(text: str):
    return yaml.load(text, Loader=_Loader)


class ConfigError(ValueError):
    """The scenario file is unreadable, malformed or inconsistent."""


@dataclass
class Scenario:
    name: str
    model: str
    params: SystemParams
    space: SpaceConfig
    drive_train: Optional[PulseTrain]
    pump_train: Optional[PulseTrain]
    observables: tuple
    integrator: dict
    raw: dict
    source: Optional[Path] = None

    @property
    def times(self) -> np.ndarray:
        t = self.raw["time"]
        return np.linspace(0.0, t["t_end"], t["points"])

    @property
    def table_name(self) -> str:
        return self.raw.get("output", {}).get("table", f"{self.name}.tsv")

    @property
    def metadata_name(self) -> str:
        return self.raw.get("output", {}).get("metadata", f"{self.name}.meta.json")

    def resolved(self) -> dict:
        """Everything that determines the run, with defaults filled in."""
        out = copy.deepcopy(self.raw)
        out["params"] = self.params.as_dict()
        out.pop("params_file", None)
        return out


def _error_message(err: jsonschema.ValidationError) -> str:
    where = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"{where}: {err.message}"


def validate_document(doc: Any, schema: dict = SCHEMA, source: str = "config") -> None:
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    errors = sorted(jsonschema.Draft7Validator(schema).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError(f"{source}: " + "; ".join(_error_message(e) for e in errors))


def _merge_defaults(doc: dict) -> dict:
    out = copy.deepcopy(doc)
    for key, value in DEFAULTS.items():
        if isinstance(value, dict):
            out[key] = {**value, **out.get(key, {})}
        else:
            out.setdefault(key, value)
    return out


def parse_override(text: str) -> tuple[list[str], Any]:
    """``"integrator.rtol=1e-9"`` -> ``(["integrator", "rtol"], 1e-9)``.

    Bare ``rtol``/``atol`` refer to the integrator section.
    """
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, _, value = text.partition("=")
    path = key.strip().split(".")
    if len(path) == 1 and path[0] in ("rtol", "atol"):
        path = ["integrator", path[0]]
    if len(path) != 2 or path[0] not in OVERRIDABLE:
        raise ConfigError(f"override key {key!r} must be one of {', '.join(s + '.<key>' for s in OVERRIDABLE)}")
    try:
        parsed = safe_load(value)
    except yaml.YAMLError as exc:
        raise ConfigError(f"override {text!r}: {exc}") from exc
    return path, parsed


def apply_overrides(doc: dict, overrides) -> dict:
    out = copy.deepcopy(doc)
    for text in overrides or ():
        (section, key), value = parse_override(text)
        out.setdefault(section, {})[key] = value
    return out


def read_yaml(path) -> Any:
    path = Path(path)
    text = path.read_text()
    try:
        return safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_params_file(path) -> dict:
    doc = read_yaml(path)
    validate_document(doc, PARAMS_FILE_SCHEMA, source=str(path))
    return dict(doc["params"])


def _train(block: Optional[dict]) -> Optional[PulseTrain]:
    if block is None:
        return None
    try:
        return PulseTrain(block["amplitude"], block["centers"], block["width"])
    except ValueError as exc:
        raise ConfigError(f"pulses: {exc}") from exc


def build_scenario(doc: dict, source: Optional[Path] = None, overrides=()) -> Scenario:
    label = str(source) if source else "config"
    doc = apply_overrides(doc, overrides)
    validate_document(doc, source=label)
    doc = _merge_defaults(doc)
    if "time" in doc:
        doc["time"].setdefault("points", DEFAULT_POINTS)

    values: dict = {}
    if "params_file" in doc:
        base = source.parent if source else Path.cwd()
        values.update(load_params_file(base / doc["params_file"]))
    values.update(doc.get("params", {}))
    try:
        params = SystemParams(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label}: params: {exc}") from exc

    space = SpaceConfig(**doc["space"])
    if "sweep" in doc:
        allowed = STEADY_OBSERVABLES
    else:
        allowed = DYNAMICS_OBSERVABLES
    observables = tuple(doc.get("observables", ()))
    unknown = [o for o in observables if o not in allowed]
    if unknown:
        raise ConfigError(f"{label}: observables: unknown {unknown}; allowed {list(allowed)}")
    if "fit" not in doc and "validate" not in doc and not observables:
        raise ConfigError(f"{label}: observables: at least one observable is required")
    if "fit" not in doc and "sweep" not in doc and "time" not in doc:
        raise ConfigError(f"{label}: time: section required")
    if doc["model"] == "effective" and any(o.startswith("g2") for o in observables):
        raise ConfigError(f"{label}: g2 observables need the full model")
    lo = doc.get("validate", {}).get("min_deviation")
    hi = doc.get("validate", {}).get("max_deviation")
    if lo is not None and hi is not None and lo > hi:
        raise ConfigError(f"{label}: validate: min_deviation exceeds max_deviation")

    pulses = doc.get("pulses", {})
    try:
        drive_train, pump_train = _train(pulses.get("drive")), _train(pulses.get("pump"))
    except ConfigError as exc:
        raise ConfigError(f"{label}: {exc}") from exc
    if doc["integrator"]["method"] == "expm" and (drive_train or pump_train):
        raise ConfigError(f"{label}: integrator: method expm cannot propagate pulsed generators")
    if pump_train is not None and pump_train.amplitude < 0:
        raise ConfigError(f"{label}: pulses/pump: amplitude must be non-negative")

    return Scenario(
        name=doc["name"],
        model=doc["model"],
        params=params,
        space=space,
        drive_train=drive_train,
        pump_train=pump_train,
        observables=observables,
        integrator=dict(doc["integrator"]),
        raw=doc,
        source=source,
    )


SCENARIO_DIR = Path(__file__).parent / "scenarios"


def bundled_scenarios() -> list[str]:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.yaml") if p.stem != "baseline_params")


def resolve_path(path) -> Path:
    """A file path, or the name of a bundled scenario such as ``fig3_idealized``."""
    path = Path(path)
    if path.exists() or path.suffix:
        return path
    candidate = SCENARIO_DIR / f"{path.name}.yaml"
    return candidate if candidate.exists() else path


def load_scenario(path, overrides=()) -> Scenario:
    path = resolve_path(path)
    return build_scenario(read_yaml(path), source=path, overrides=overrides)


def sweep_axes(scenario: Scenario) -> list[tuple[str, np.ndarray]]:
    axes = []
    for axis in scenario.raw["sweep"]["parameters"]:
        if "values" in axis:
            values = np.asarray(axis["values"], dtype=float)
        elif axis.get("scale", "linear") == "log":
            if axis["start"] <= 0 or axis["stop"] <= 0:
                raise ConfigError(f"sweep axis {axis['name']}: log scale needs positive bounds")
            values = np.logspace(np.log10(axis["start"]), np.log10(axis["stop"]), axis["num"])
        else:
            values = np.linspace(axis["start"], axis["stop"], axis["num"])
        axes.append((axis["name"], values))
    names = [n for n, _ in axes]
    if len(set(names)) != len(names):
        raise ConfigError("sweep axes must name distinct parameters")
    return axes
