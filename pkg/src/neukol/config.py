"""Experiment configuration: a small key-value grammar, schema, and presets.

Grammar (one file, line oriented)::

    # comment                     blank lines and '#...' are ignored
    seed = 7                      top-level keys before any section
    [section]                     known sections only
    key = value                   known keys only, values typed by schema

Values: integers, floats, booleans (true/false), bare or double-quoted
strings, and flat lists ``[a, b, c]`` of numbers.  Unknown sections or keys
are rejected, misspellings included.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .convex import (Ellipsoid, Halfspace, affine_hypograph,
                     neg_quadratic_hypograph)
from .errors import ConfigurationError
from .measure import build_space
from .models import build_ch, build_rd
from .potentials import (MoreauEnvelope, PenalizedPotential,
                         PROFILE_NAMES, scalar_profile, SeparablePotential)

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def _parse_value(text: str, where: str):
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        if not inner:
            return []
        items = [p.strip() for p in inner.split(",")]
        out = []
        for p in items:
            if not re.fullmatch(_NUM, p):
                raise ConfigurationError(f"{where}: list items must be numbers, got {p!r}")
            out.append(float(p))
        return out
    if text in ("true", "false"):
        return text == "true"
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    if re.fullmatch(r"[-+]?\d+", text):
        return int(text)
    if re.fullmatch(_NUM, text):
        return float(text)
    return text  # bare string


def parse_config_text(text: str) -> dict:
    raw: dict = {"": {}}
    section = ""
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[([A-Za-z0-9_.-]+)\]", line)
        if m:
            section = m.group(1)
            raw.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {ln}: expected 'key = value', got {line!r}")
        key, val = line.split("=", 1)
        key = key.strip()
        if not re.fullmatch(r"[A-Za-z0-9_]+", key):
            raise ConfigurationError(f"line {ln}: bad key {key!r}")
        where = f"line {ln} ({section or 'top level'}.{key})"
        raw[section][key] = _parse_value(val, where)
    return raw


# schema: section -> key -> (type, default); None default means optional
_SCHEMA = {
    "": {
        "seed": ("int", 0),
    },
    "space": {
        "lambdas": ("num_list", None),
        "box_radius": ("float", 8.0),
        "cells_per_axis": ("int", 200),
        "qmc_samples": ("int", 8192),
    },
    "model": {
        "kind": ("str", None),
        "modes": ("int", 2),
        "phi": ("str", "quadratic"),
        "phi_coef": ("float", 1.0),
        "xi_grid": ("int", 512),
        "alpha": ("float", 0.1),
        "box_radius": ("float", 6.0),
        "cells_per_axis": ("int", 48),
    },
    "convex_set": {
        "kind": ("str", "none"),
        "direction": ("num_list", None),
        "offset": ("float", 0.0),
        "alphas": ("num_list", None),
        "radius": ("float", 1.0),
        "axis": ("int", 1),
        "f_kind": ("str", "affine"),
        "f_offset": ("float", 0.0),
        "f_slopes": ("num_list", None),
        "f_curvatures": ("num_list", None),
    },
    "potential": {
        "kind": ("str", "zero"),
        "coef": ("float", 1.0),
        "huber_delta": ("float", 1.0),
        "alpha": ("float", 0.5),
        "alpha_list": ("num_list", None),
    },
    "solve": {
        "lambda": ("float", 1.0),
        "rhs": ("str", "const:1"),
        "mode": ("str", "whole"),
        "alpha": ("float", 0.5),
        "alpha_sweep": ("num_list", None),
        "pad_sigma": ("float", 2.0),
        "cg_tol": ("float", 1e-10),
        "mesh_ladder": ("num_list", None),
        "band_factor": ("float", 3.0),
        "slack_diss": ("float", 0.05),
        "slack_maxreg": ("float", 0.10),
    },
    "sde": {
        "scheme": ("str", "project"),
        "dt": ("float", 1e-3),
        "T": ("float", 10.0),
        "paths": ("int", 10000),
        "alpha": ("float", 0.1),
        "exponential": ("bool", False),
        "probes": ("num_list", None),
        "burn_in": ("float", 5.0),
        "keep_time": ("float", 0.5),
        "stride": ("int", 5),
        "bins": ("int", 2000),
        "burn_dt": ("float", None),
    },
    "output": {
        "write_solution": ("bool", False),
    },
}

_COERCIBLE = {("int", float), ("float", int)}


def validate_config(raw: dict) -> dict:
    cfg = {}
    for section, entries in raw.items():
        if section not in _SCHEMA:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key in entries:
            if key not in _SCHEMA[section]:
                raise ConfigurationError(
                    f"unknown key {key!r} in section [{section or 'top level'}]")
    for section, keys in _SCHEMA.items():
        out = {}
        for key, (typ, default) in keys.items():
            if section in raw and key in raw[section]:
                val = raw[section][key]
                val = _coerce(section, key, typ, val)
            else:
                val = default
            out[key] = val
        cfg[section or "top"] = out
    return cfg


def _coerce(section, key, typ, val):
    where = f"[{section}].{key}" if section else key
    if typ == "int":
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigurationError(f"{where}: expected integer, got {val!r}")
        if isinstance(val, float) and not val.is_integer():
            raise ConfigurationError(f"{where}: expected integer, got {val!r}")
        return int(val)
    if typ == "float":
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigurationError(f"{where}: expected number, got {val!r}")
        return float(val)
    if typ == "bool":
        if not isinstance(val, bool):
            raise ConfigurationError(f"{where}: expected true/false, got {val!r}")
        return val
    if typ == "str":
        if not isinstance(val, str):
            raise ConfigurationError(f"{where}: expected string, got {val!r}")
        return val
    if typ == "num_list":
        if not isinstance(val, list):
            raise ConfigurationError(f"{where}: expected a list, got {val!r}")
        return [float(v) for v in val]
    raise AssertionError(typ)


def load_config_text(text: str) -> dict:
    return validate_config(parse_config_text(text))


def load_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return load_config_text(fh.read())


# ---------------------------------------------------------------------------
# materialization
# ---------------------------------------------------------------------------

@dataclass
class Bundle:
    cfg: dict
    space: object
    body: object
    potential: object       # base potential entering the nu-weight (may be None)
    model: object = None
    model_kind: str = None

    @property
    def n(self):
        return self.space.n


def make_rhs(cfg: dict, n: int):
    spec = cfg["solve"]["rhs"]
    if spec.startswith("const:"):
        c = float(spec.split(":", 1)[1])
        return lambda X: np.full(np.asarray(X).shape[:-1], c)
    if spec.startswith("coord:"):
        k = int(spec.split(":", 1)[1]) - 1
        if not 0 <= k < n:
            raise ConfigurationError(f"rhs coordinate {k + 1} out of range for n={n}")
        return lambda X: np.asarray(X, dtype=float)[..., k]
    if spec.startswith("hermite2:"):
        k = int(spec.split(":", 1)[1]) - 1
        if not 0 <= k < n:
            raise ConfigurationError(f"rhs coordinate {k + 1} out of range for n={n}")
        return lambda X: 4.0 * np.asarray(X, dtype=float)[..., k] ** 2 - 2.0
    if spec.startswith("expr:"):
        expr = spec.split(":", 1)[1]
        code = compile(expr, "<rhs>", "eval")
        safe = {name: getattr(np, name) for name in
                ("sin", "cos", "exp", "tanh", "sqrt", "abs", "maximum", "minimum", "pi")}
        safe["np"] = np

        def f(X, _code=code, _safe=safe):
            X = np.asarray(X, dtype=float)
            ns = dict(_safe)
            for k in range(n):
                ns[f"x{k + 1}"] = X[..., k]
            out = eval(_code, {"__builtins__": {}}, ns)
            return np.broadcast_to(np.asarray(out, dtype=float), X.shape[:-1]).copy()

        return f
    raise ConfigurationError(f"unknown rhs spec {spec!r}")


def make_body(cfg: dict, n: int):
    c = cfg["convex_set"]
    kind = c["kind"]
    if kind == "none":
        return None
    if kind == "halfspace":
        if c["direction"] is None:
            raise ConfigurationError("halfspace needs convex_set.direction")
        if len(c["direction"]) != n:
            raise ConfigurationError("convex_set.direction length must equal n")
        return Halfspace(direction=np.array(c["direction"]), offset=c["offset"])
    if kind == "ellipsoid":
        if c["alphas"] is None:
            raise ConfigurationError("ellipsoid needs convex_set.alphas")
        if len(c["alphas"]) != n:
            raise ConfigurationError("convex_set.alphas length must equal n")
        return Ellipsoid(alphas=np.array(c["alphas"]), radius=c["radius"])
    if kind == "hypograph":
        axis = c["axis"] - 1
        if not 0 <= axis < n:
            raise ConfigurationError("convex_set.axis out of range")
        if c["f_kind"] == "affine":
            slopes = c["f_slopes"] if c["f_slopes"] is not None else [0.0] * (n - 1)
            if len(slopes) != n - 1:
                raise ConfigurationError("f_slopes must have n-1 entries")
            return affine_hypograph(axis, slopes, c["f_offset"])
        if c["f_kind"] == "neg-quadratic":
            curv = c["f_curvatures"] if c["f_curvatures"] is not None else [1.0] * (n - 1)
            if len(curv) != n - 1:
                raise ConfigurationError("f_curvatures must have n-1 entries")
            return neg_quadratic_hypograph(axis, curv, c["f_offset"])
        raise ConfigurationError(f"unknown hypograph map {c['f_kind']!r}")
    raise ConfigurationError(f"unknown convex_set.kind {kind!r}")


def make_bundle(cfg: dict) -> Bundle:
    model = None
    model_kind = cfg["model"]["kind"]
    if model_kind in ("rd", "ch"):
        mc = cfg["model"]
        phi = scalar_profile(mc["phi"], coef=mc["phi_coef"])
        if model_kind == "rd":
            space, potential, model = build_rd(
                mc["modes"], phi, xi_grid=mc["xi_grid"],
                box_radius=mc["box_radius"], cells_per_axis=mc["cells_per_axis"])
        else:
            space, potential, model = build_ch(
                mc["modes"], phi, alpha=mc["alpha"], xi_grid=mc["xi_grid"],
                box_radius=mc["box_radius"], cells_per_axis=mc["cells_per_axis"])
    elif model_kind not in (None, "custom"):
        raise ConfigurationError(f"unknown model.kind {model_kind!r}")
    else:
        if cfg["space"]["lambdas"] is None:
            raise ConfigurationError("either [model] kind or [space] lambdas is required")
        space = build_space(cfg["space"]["lambdas"],
                            box_radius=cfg["space"]["box_radius"],
                            cells_per_axis=cfg["space"]["cells_per_axis"],
                            qmc_samples=cfg["space"]["qmc_samples"])
        potential = _make_plain_potential(cfg)
    body = make_body(cfg, space.n)
    return Bundle(cfg=cfg, space=space, body=body, potential=potential,
                  model=model, model_kind=model_kind)


def _make_plain_potential(cfg: dict):
    p = cfg["potential"]
    kind = p["kind"]
    if kind == "zero":
        return None
    if kind in PROFILE_NAMES:
        return SeparablePotential(scalar_profile(kind, coef=p["coef"],
                                                 delta=p["huber_delta"]))
    if kind in ("rd", "ch"):
        raise ConfigurationError(
            f"potential.kind={kind} requires a [model] section of the same kind")
    raise ConfigurationError(f"unknown potential.kind {kind!r}")


def make_penalized(bundle: Bundle, alpha: float) -> PenalizedPotential:
    if bundle.body is None:
        raise ConfigurationError("penalization requires a convex_set")
    base = bundle.potential
    if base is None:
        from .potentials import ZeroPotential
        base = ZeroPotential()
    if hasattr(base, "gradient"):     # already an envelope (dual-mode smoothing)
        env = base
    else:
        env = MoreauEnvelope(base, alpha)
    return PenalizedPotential(envelope=env, body=bundle.body, alpha=alpha)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

PRESETS = {
    "hermite-1d": """\
# 1-D whole-space resolvent with a known polynomial solution
seed = 1
[space]
lambdas = [0.5]
box_radius = 5.0
cells_per_axis = 400
[solve]
lambda = 1.0
rhs = "hermite2:1"
mode = whole
""",
    "halfline-even": """\
# halfline constraint, even data: the constrained solution matches the free one
seed = 2
[space]
lambdas = [0.5]
box_radius = 6.0
cells_per_axis = 400
[convex_set]
kind = halfspace
direction = [1.0]
offset = 0.0
[solve]
lambda = 1.0
rhs = "hermite2:1"
mode = restricted
mesh_ladder = [100, 200, 400]
[sde]
scheme = project
dt = 0.001
T = 10.0
paths = 100000
probes = [-2.0, -1.5, -1.2]
""",
    "penalize-sweep-1d": """\
# smoothing + constraint penalization on a tail halfline with a kinked potential
seed = 3
[space]
lambdas = [0.5]
box_radius = 6.0
cells_per_axis = 400
[convex_set]
kind = halfspace
direction = [1.0]
offset = 2.0
[potential]
kind = abs
[solve]
lambda = 1.0
rhs = "expr:2*x1"
mode = restricted
alpha_sweep = [1.0, 0.5, 0.25, 0.125, 0.0625]
""",
    "rd-3mode": """\
# three sine modes, integral potential, coefficient halfspace
seed = 4
[model]
kind = rd
modes = 3
phi = quadratic
xi_grid = 512
box_radius = 6.0
cells_per_axis = 48
[convex_set]
kind = halfspace
direction = [1.0, 0.0, 0.0]
offset = 0.0
[solve]
lambda = 1.0
rhs = "coord:1"
mode = restricted
""",
    "ch-2mode": """\
# two cosine modes in the dual norm with resolvent-smoothed quartic profile
seed = 5
[model]
kind = ch
modes = 2
phi = quartic
alpha = 0.1
xi_grid = 512
box_radius = 6.0
cells_per_axis = 100
[solve]
lambda = 1.0
rhs = "hermite2:1"
mode = whole
""",
    "ellipsoid-2d-flux": """\
# vanishing normal flux on an ellipse under mesh refinement
seed = 6
[space]
lambdas = [0.5, 0.25]
box_radius = 6.0
cells_per_axis = 400
[convex_set]
kind = ellipsoid
alphas = [1.0, 2.0]
radius = 1.0
[solve]
lambda = 1.0
rhs = "expr:0.25*x1"
mode = restricted
mesh_ladder = [100, 200, 400]
""",
}

PRESET_SUMMARIES = {
    "hermite-1d": "1-D whole-space solve with polynomial oracle",
    "halfline-even": "restricted halfline solve + flux ladder + path validation",
    "penalize-sweep-1d": "descending-alpha penalization sweep with kinked potential",
    "rd-3mode": "3-mode sine-basis model, restricted halfspace solve",
    "ch-2mode": "2-mode dual-norm model with resolvent smoothing",
    "ellipsoid-2d-flux": "2-D ellipse flux decay under mesh refinement",
}


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return load_config_text(PRESETS[name])
