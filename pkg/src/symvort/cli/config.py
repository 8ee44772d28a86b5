"""Experiment configuration: YAML schema, defaults and the preset catalog."""
from __future__ import annotations

import copy
from pathlib import Path

import jsonschema
import yaml

KINDS = (
    "simulate",
    "invariants",
    "two_vortex_oracle",
    "lyapunov",
    "section",
    "equivariance",
    "coplanarity_search",
    "field",
)


class ConfigError(ValueError):
    """Unreadable or schema-invalid configuration."""


_number = {"type": "number"}
_posint = {"type": "integer", "minimum": 1}

_explicit_system = {
    "type": "object",
    "required": ["m", "strengths", "positions"],
    "additionalProperties": False,
    "properties": {
        "m": _posint,
        "strengths": {"type": "array", "minItems": 1, "items": _number},
        "positions": {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 2, "items": _number}},
    },
}

_random_system = {
    "type": "object",
    "required": ["random"],
    "additionalProperties": False,
    "properties": {
        "random": {
            "type": "object",
            "required": ["m", "N"],
            "additionalProperties": False,
            "properties": {
                "m": _posint,
                "N": _posint,
                "scale": {"type": "number", "exclusiveMinimum": 0},
                "strength_range": {"type": "array", "minItems": 2, "maxItems": 2, "items": _number},
                "equal_strengths": {"type": "boolean"},
                "min_sep": {"type": "number", "exclusiveMinimum": 0},
            },
        }
    },
}

_integrator = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "scheme": {"enum": ["implicit_midpoint", "rk4"]},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "implicit_tol": {"type": "number", "exclusiveMinimum": 0},
        "implicit_max_iter": _posint,
    },
}

_field = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "preset": {"enum": ["taylor-green", "shear", "two-mode", "random", "gaussian-dipole"]},
        "grid_file": {"type": "string"},
        "n": {"type": "integer", "minimum": 2, "multipleOf": 2},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "steps": {"type": "integer", "minimum": 0},
        "snapshot_every": _posint,
        "k_max": _posint,
        "k_peak": {"type": "number", "exclusiveMinimum": 0},
        "amplitude": {"type": "number", "exclusiveMinimum": 0},
        "separation": {"type": "number", "exclusiveMinimum": 0},
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "circulation": _number,
        "snapshot_format": {"enum": ["csv", "binary"]},
    },
}

SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(KINDS)},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "system": {"oneOf": [_explicit_system, _random_system]},
        "integrator": _integrator,
        "horizon": {"type": "number", "minimum": 0},
        "record_every": _posint,
        "samples": _posint,
        "ensemble": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"size": _posint, "workers": _posint},
        },
        "renorm_interval": {"type": "number", "exclusiveMinimum": 0},
        "burn_in": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "section": {
            "type": "object",
            "required": ["observable"],
            "additionalProperties": False,
            "properties": {
                "observable": {"type": "string"},
                "value": _number,
                "direction": {"enum": [-1, 0, 1]},
            },
        },
        "chart": {"type": "array", "items": {"type": "string"}},
        "field": _field,
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}, "format": {"enum": ["csv", "jsonl"]}},
        },
    },
}

# kind -> top-level keys that must be present after defaults are applied
REQUIRED = {
    "simulate": ["system", "integrator", "horizon"],
    "invariants": ["system"],
    "two_vortex_oracle": ["system", "integrator", "horizon"],
    "lyapunov": ["system", "integrator", "horizon"],
    "section": ["system", "integrator", "horizon", "section"],
    "equivariance": ["system", "integrator"],
    "coplanarity_search": ["system"],
    "field": ["field"],
}

DEFAULTS = {
    "seed": 0,
    "integrator": {"scheme": "implicit_midpoint", "dt": 1e-3, "implicit_tol": 1e-12, "implicit_max_iter": 50},
    "output": {"format": "csv"},
}

KIND_DEFAULTS = {
    "simulate": {"record_every": 1},
    "invariants": {"samples": 1},
    "two_vortex_oracle": {"samples": 100},
    "lyapunov": {"renorm_interval": 1.0, "burn_in": 0.1, "ensemble": {"size": 1}},
    "section": {"chart": []},
    "equivariance": {"samples": 20, "horizon": 1.0},
    "coplanarity_search": {"samples": 100},
    "field": {},
}

FIELD_DEFAULTS = {"n": 64, "dt": 0.01, "steps": 100, "snapshot_every": 0, "k_max": 4, "snapshot_format": "csv"}
RANDOM_DEFAULTS = {"scale": 1.0, "strength_range": [0.5, 1.5], "equal_strengths": False, "min_sep": 0.1}


def _error_path(err):
    path = "/".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def _merge(base, extra):
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve(raw):
    """Validate ``raw`` and return a fully resolved config with all defaults filled in."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>: config must be a mapping")
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as err:
        raise ConfigError(f"{_error_path(err)}: {err.message}") from None
    kind = raw["kind"]
    cfg = _merge(_merge(DEFAULTS, KIND_DEFAULTS[kind]), raw)
    cfg["output"].setdefault("dir", f"runs/{kind}")
    for key in REQUIRED[kind]:
        if key not in cfg:
            raise ConfigError(f"{key}: required for kind {kind!r}")
    system = cfg.get("system")
    if system is not None:
        if "random" in system:
            system["random"] = _merge(RANDOM_DEFAULTS, system["random"])
        else:
            m, gam, pos = system["m"], system["strengths"], system["positions"]
            if len(pos) != len(gam):
                raise ConfigError(f"system/positions: {len(pos)} rows for {len(gam)} strengths")
            for i, row in enumerate(pos):
                if len(row) != 2 * m:
                    raise ConfigError(f"system/positions/{i}: expected {2 * m} coordinates, got {len(row)}")
    if kind in ("two_vortex_oracle",) and "random" not in system and len(system["strengths"]) != 2:
        raise ConfigError("system/strengths: two_vortex_oracle needs exactly two vortices")
    if kind == "field":
        f = _merge(FIELD_DEFAULTS, cfg["field"])
        if ("preset" in f) == ("grid_file" in f):
            raise ConfigError("field: give exactly one of 'preset' or 'grid_file'")
        cfg["field"] = f
    if kind == "section":
        cfg["section"].setdefault("value", 0.0)
        cfg["section"].setdefault("direction", 1)
    return cfg


def load(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: invalid YAML ({err})") from None
    return resolve(raw)


def dump(cfg):
    return yaml.safe_dump(cfg, sort_keys=False, default_flow_style=None)


# ------------------------------------------------------------------ presets

PRESETS = {
    "kirchhoff-pair": {
        "kind": "simulate",
        "description": "Planar co-rotating pair, unit strengths, unit separation",
        "system": {"m": 1, "strengths": [1.0, 1.0], "positions": [[0.0, 0.0], [1.0, 0.0]]},
        "integrator": {"scheme": "implicit_midpoint", "dt": 1e-3},
        "horizon": 10.0,
        "record_every": 100,
        "output": {"dir": "runs/kirchhoff-pair"},
    },
    "kirchhoff-dipole": {
        "kind": "simulate",
        "description": "Planar counter-rotating pair; translates rigidly",
        "system": {"m": 1, "strengths": [1.0, -1.0], "positions": [[0.0, 0.0], [1.0, 0.0]]},
        "integrator": {"scheme": "implicit_midpoint", "dt": 1e-3},
        "horizon": 10.0,
        "record_every": 100,
        "output": {"dir": "runs/kirchhoff-dipole"},
    },
    "planar-triple": {
        "kind": "section",
        "description": "Three planar vortices (integrable); section of the shape at a fixed relative height",
        "system": {"m": 1, "strengths": [1.0, 1.0, 1.0], "positions": [[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]]},
        "integrator": {"scheme": "implicit_midpoint", "dt": 5e-3},
        "horizon": 1000.0,
        "section": {"observable": "cy1_1", "value": 0.0, "direction": 1},
        "chart": ["s12", "s13"],
        "output": {"dir": "runs/planar-triple"},
    },
    "planar-quadruple": {
        "kind": "lyapunov",
        "description": "Ensemble of four equal planar vortices (non-integrable in general)",
        "seed": 0,
        "system": {"random": {"m": 1, "N": 4, "equal_strengths": True, "min_sep": 0.5}},
        "integrator": {"scheme": "implicit_midpoint", "dt": 1e-2},
        "horizon": 1000.0,
        "renorm_interval": 1.0,
        "ensemble": {"size": 6},
        "output": {"dir": "runs/planar-quadruple"},
    },
    "m2-pair": {
        "kind": "two_vortex_oracle",
        "description": "Pair in R^4 compared with the closed-form rigid rotation",
        "system": {"m": 2, "strengths": [1.0, 2.0], "positions": [[0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]]},
        "integrator": {"scheme": "implicit_midpoint", "dt": 1e-3},
        "horizon": 10.0,
        "output": {"dir": "runs/m2-pair"},
    },
    "conjecture-m2-n3": {
        "kind": "lyapunov",
        "description": "Randomised three-vortex ensemble in R^4; reports the MLE distribution only",
        "seed": 0,
        "system": {"random": {"m": 2, "N": 3, "scale": 0.5, "min_sep": 0.5}},
        "integrator": {"scheme": "implicit_midpoint", "dt": 1e-2},
        "horizon": 1000.0,
        "renorm_interval": 1.0,
        "ensemble": {"size": 8},
        "output": {"dir": "runs/conjecture-m2-n3"},
    },
    "invariants-m2-n3": {
        "kind": "invariants",
        "description": "Bracket table of the conserved quantities at random R^4 three-vortex states",
        "seed": 0,
        "system": {"random": {"m": 2, "N": 3}},
        "samples": 5,
        "output": {"dir": "runs/invariants-m2-n3"},
    },
    "equivariance-m2": {
        "kind": "equivariance",
        "description": "Random unitary motions versus time-1 evolution, three vortices in R^4",
        "seed": 0,
        "system": {"random": {"m": 2, "N": 3, "scale": 0.7, "min_sep": 0.5}},
        "integrator": {"scheme": "implicit_midpoint", "dt": 1e-3},
        "horizon": 1.0,
        "samples": 20,
        "output": {"dir": "runs/equivariance-m2"},
    },
    "coplanarity-m2-n3": {
        "kind": "coplanarity_search",
        "description": "Search for three vortices in R^4 whose velocities leave the plane of the vortices",
        "seed": 0,
        "system": {"random": {"m": 2, "N": 3}},
        "samples": 100,
        "output": {"dir": "runs/coplanarity-m2-n3"},
    },
    "taylor-green": {
        "kind": "field",
        "description": "Steady cellular flow nu = cos x cos y",
        "field": {"preset": "taylor-green", "n": 64, "dt": 0.01, "steps": 100, "k_max": 4},
        "output": {"dir": "runs/taylor-green"},
    },
    "torus-turbulence": {
        "kind": "field",
        "description": "Smooth random vorticity; monitors energy and Casimir drift",
        "seed": 1,
        "field": {"preset": "random", "n": 128, "dt": 0.005, "steps": 1000, "k_peak": 6.0, "amplitude": 2.0, "k_max": 4},
        "output": {"dir": "runs/torus-turbulence"},
    },
    "gaussian-dipole": {
        "kind": "field",
        "description": "Opposite Gaussian blobs; translation speed versus the point-dipole value",
        "field": {"preset": "gaussian-dipole", "n": 256, "separation": 1.0, "sigma": 0.05, "dt": 0.002, "steps": 500, "snapshot_every": 100},
        "output": {"dir": "runs/gaussian-dipole"},
    },
}


def preset(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return resolve(PRESETS[name])
