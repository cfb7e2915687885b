"""Experiment configuration: strict JSON schemas, defaults and hashing."""

import copy
import hashlib
import json
from pathlib import Path

import jsonschema

from .errors import ConfigurationError

CONFIG_VERSION = "1.0"
KINDS = ("solve", "commutator", "theorem1", "bands", "exponents", "compare", "flux", "appendix", "burgers",
         "sweep")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int = {"type": "integer", "minimum": 1}
_exp = {"oneOf": [{"type": "number", "minimum": 1}, {"type": "string", "pattern": r"^(inf|\d+(/\d+)?)$"}]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


GRID = _obj({"n_x": {"enum": [1, 2]}, "n_v": {"enum": [1, 2]}, "N_x": _int, "N_v": _int,
             "L_x": _pos, "L_v": _pos})

PARAMS = {
    "solve": _obj({"grid": GRID, "eps": _pos, "alpha": {"type": "number", "minimum": 0}, "T": _pos,
                   "n_save": {"type": "integer", "minimum": 2}, "dt": _pos,
                   "initial": {"enum": ["bump", "manufactured"]},
                   "dt_levels": {"type": "integer", "minimum": 1}}),
    "commutator": _obj({"grids": {"type": "array", "items": GRID, "minItems": 1},
                        "n_fields": _int, "band_fraction": {"type": "number", "exclusiveMinimum": 0,
                                                            "maximum": 0.5}}),
    "theorem1": _obj({"grid": GRID, "eps": {"oneOf": [_pos, {"type": "array", "items": _pos, "minItems": 1}]},
                      "T": _pos, "n_save": {"type": "integer", "minimum": 2}, "p": _exp,
                      "factor": _pos}),
    "bands": _obj({"N": {"type": "array", "items": _int, "minItems": 1}, "v_mult": _int, "eps": _pos,
                   "T": _pos, "n_save": {"type": "integer", "minimum": 2}, "beta": _pos,
                   "slope_tol": _pos}),
    "exponents": _obj({"preset": {"enum": ["corollary1", "custom"]},
                       "alpha": {"type": "array", "items": {"type": ["number", "string"]}},
                       "inputs": {"type": "array", "items": _obj({
                           "n": _int, "alpha": {"type": ["number", "string"]}, "gamma": _exp,
                           "p1": _exp, "p2": _exp, "q1": _exp, "q2": _exp})}}),
    "compare": _obj({"n": _int, "alpha": {"type": ["number", "string"]}, "p": _exp, "q": _exp, "p2": _exp}),
    "flux": _obj({"names": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                  "n_samples": _int, "n_directions": _int, "tol": _pos}),
    "appendix": _obj({"m": {"oneOf": [_int, {"type": "array", "items": _int}]},
                      "n_intervals": {"type": "integer", "minimum": 0}}),
    "burgers": _obj({"N": {"type": "array", "items": _int, "minItems": 1},
                     "initial": {"enum": ["pulse", "shock", "rarefaction", "smooth", "rough"]},
                     "T": _pos, "n_save": {"type": "integer", "minimum": 3}, "n_v": _int, "cfl": _pos,
                     "s_values": {"type": "array", "items": _num}}),
}

AXIS = _obj({"key": {"type": "string", "minLength": 1}, "values": {"type": "array"}}, required=("key", "values"))

SCHEMA = _obj({
    "version": {"const": CONFIG_VERSION},
    "kind": {"enum": list(KINDS)},
    "seed": {"type": "integer", "minimum": 0},
    "out": {"type": "string"},
    "threads": _int,
    "tolerance_scale": _pos,
    "params": {"type": "object"},
    "base": {"type": "object"},
    "axes": {"type": "array", "items": AXIS},
}, required=("kind",))

DEFAULTS = {
    "solve": {"grid": {"n_x": 1, "n_v": 1, "N_x": 32, "N_v": 64, "L_x": 3.141592653589793, "L_v": 12.0},
              "eps": 0.5, "alpha": 0.0, "T": 1.0, "n_save": 5, "dt": 0.0005, "initial": "bump", "dt_levels": 1},
    "commutator": {"grids": [{"n_x": 1, "n_v": 1, "N_x": 32, "N_v": 32},
                             {"n_x": 2, "n_v": 2, "N_x": 16, "N_v": 16}],
                   "n_fields": 100, "band_fraction": 0.25},
    "theorem1": {"grid": {"n_x": 1, "n_v": 1, "N_x": 16, "N_v": 1024, "L_v": 8.0},
                 "eps": [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625], "T": 1.0, "n_save": 401,
                 "p": 2, "factor": 3.0},
    "bands": {"N": [16, 32, 64], "v_mult": 16, "eps": 0.5, "T": 1.0, "n_save": 401, "beta": 1.5,
              "slope_tol": 0.1},
    "exponents": {"preset": "corollary1", "alpha": [0, "1/2", 1, 2], "inputs": []},
    "compare": {"n": 1, "alpha": 0, "p": 2},
    "flux": {"names": ["identity", "square", "cube", "appendix", "constant"], "n_samples": 1000000,
             "n_directions": 32, "tol": 0.05},
    "appendix": {"m": [4], "n_intervals": 0},
    "burgers": {"N": [2048], "initial": "pulse", "T": 0.5, "n_save": 51, "n_v": 256, "cfl": 0.9,
                "s_values": [0.15, 0.20, 0.24, 0.30, 0.35]},
}


def _offending(err):
    path = "/".join(str(p) for p in err.absolute_path) or "<root>"
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        return f"{path}: unknown key(s) {', '.join(extra)}"
    return f"{path}: {err.message}"


def _problems(instance, schema, prefix=""):
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(instance), key=lambda e: list(e.path))
    return [prefix + _offending(e) for e in errors]


def _validate(instance, schema, label, extra=()):
    lines = list(extra) + _problems(instance, schema)
    if lines:
        raise ConfigurationError(f"invalid {label}:\n  " + "\n  ".join(lines))


def validate_config(cfg):
    """Validate and fill defaults; returns a new dict.  Unknown keys are errors."""
    if not isinstance(cfg, dict):
        raise ConfigurationError("config must be a JSON object")
    params_problems = []
    if cfg.get("kind") in PARAMS and isinstance(cfg.get("params"), dict):
        params_problems = _problems(cfg["params"], PARAMS[cfg["kind"]], "params/")
    _validate(cfg, SCHEMA, "config", params_problems)
    out = copy.deepcopy(cfg)
    out.setdefault("version", CONFIG_VERSION)
    out.setdefault("seed", 0)
    out.setdefault("tolerance_scale", 1.0)
    kind = out["kind"]
    if kind == "sweep":
        if "base" not in out:
            raise ConfigurationError("invalid config:\n  <root>: sweep needs a 'base' config")
        if "params" in out:
            raise ConfigurationError("invalid config:\n  params: unknown key(s) params (sweeps use base)")
        base = dict(out["base"])
        if base.get("kind") in (None, "sweep"):
            raise ConfigurationError("invalid config:\n  base/kind: sweep base must name a non-sweep kind")
        base.setdefault("seed", out["seed"])
        base.setdefault("tolerance_scale", out["tolerance_scale"])
        out["base"] = validate_config(base)
        out.setdefault("axes", [])
        check_axes(out["axes"])
        return out
    for key in ("base", "axes"):
        if key in out:
            raise ConfigurationError(f"invalid config:\n  {key}: unknown key(s) {key} (only sweeps take it)")
    params = out.get("params", {})
    _validate(params, PARAMS[kind], f"{kind} params")
    merged = copy.deepcopy(DEFAULTS[kind])
    merged.update(params)
    out["params"] = merged
    return out


def check_axes(axes):
    """Reject duplicated or nested axis keys (``params.grid`` together with ``params.grid.N_x``)."""
    keys = [a["key"] for a in axes]
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            if a == b or a.startswith(b + ".") or b.startswith(a + "."):
                raise ConfigurationError(f"conflicting sweep axes {a!r} and {b!r}")


def load_config(path):
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: not valid JSON ({exc})") from None
    return raw


def canonical(cfg):
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(cfg):
    return hashlib.sha256(canonical(cfg).encode()).hexdigest()


def set_key(cfg, dotted, value):
    """Copy of ``cfg`` with ``a.b.c`` set to ``value``."""
    out = copy.deepcopy(cfg)
    node = out
    parts = dotted.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"sweep key {dotted!r} passes through a non-object")
    node[parts[-1]] = value
    return out
