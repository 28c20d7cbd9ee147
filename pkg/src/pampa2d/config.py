"""Run configuration: a flat, typed key-value text format.

Grammar: one ``key = value`` pair per line; blank lines and ``#`` comments
are ignored.  Booleans are ``true``/``false``, numbers plain decimals,
strings unquoted.  Unknown keys and out-of-range values are collected and
reported together.  ``serialize(parse(text))`` is idempotent.

An inline scenario replaces a built-in name: set ``scenario = inline`` and
provide ``inline_domain`` ("xmin xmax ymin ymax"), ``inline_g``,
``inline_t_final`` and expression strings ``inline_z``, ``inline_h``,
``inline_u``, ``inline_v``, ``inline_theta`` in the variables x, y with the
numpy functions exp, sqrt, sin, cos, hypot, where, maximum, minimum, abs and
the constant pi.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields as dc_fields

import numpy as np

ENV_OUTPUT_DIR = "PAMPA2D_OUTPUT_DIR"

_ENUMS = {
    "wb_mode": ("adaptive", "lobatto_only", "legendre_only"),
    "variable_set": ("pmt", "prim"),
    "mesh_kind": ("jittered", "structured", "gmsh"),
    "avg_init": ("interpolation", "quadrature"),
    "inline_boundary": ("extrapolation", "dirichlet"),
}


class ConfigError(ValueError):
    """One or more invalid configuration entries."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunConfig:
    scenario: str = "ex3_three_humps"
    mesh: str = ""               # GMSH file path; empty = built-in generator
    mesh_size: float = 1.0
    mesh_kind: str = "jittered"
    mesh_seed: int = 0
    wb_mode: str = "adaptive"
    variable_set: str = "pmt"
    mood: bool = True
    dmp: bool = True
    cfl: float = 0.3
    t_final: float = -1.0        # < 0: use the scenario default
    output_every: float = 0.0    # cadence for VTK checkpoints; 0 = final only
    output_dir: str = "out"
    deterministic: bool = True
    plateau_eps: float = 1.0e-6
    avg_init: str = "interpolation"
    inline_domain: str = ""
    inline_g: float = 9.812
    inline_t_final: float = 1.0
    inline_boundary: str = "extrapolation"
    inline_z: str = "0"
    inline_h: str = "1"
    inline_u: str = "0"
    inline_v: str = "0"
    inline_theta: str = "1"


_TYPES = {f.name: f.type for f in dc_fields(RunConfig)}


def _parse_value(key, raw, errors):
    typ = _TYPES[key]
    raw = raw.strip()
    if typ == "bool":
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        errors.append(f"{key}: expected a boolean, got {raw!r}")
        return None
    if typ == "int":
        try:
            return int(raw)
        except ValueError:
            errors.append(f"{key}: expected an integer, got {raw!r}")
            return None
    if typ == "float":
        try:
            return float(raw)
        except ValueError:
            errors.append(f"{key}: expected a number, got {raw!r}")
            return None
    return raw


def parse_config(text):
    """Parse config text; raises ConfigError listing every problem found."""
    cfg = RunConfig()
    errors = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _TYPES:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        val = _parse_value(key, raw, errors)
        if val is not None:
            setattr(cfg, key, val)
    errors.extend(validate(cfg))
    if errors:
        raise ConfigError(errors)
    return cfg


def validate(cfg):
    """Range/enumeration checks; returns a list of error strings."""
    errors = []
    for key, allowed in _ENUMS.items():
        if getattr(cfg, key) not in allowed:
            errors.append(
                f"{key}: {getattr(cfg, key)!r} not in {{{', '.join(allowed)}}}"
            )
    if not (0.0 < cfg.cfl <= 1.0):
        errors.append(f"cfl: must be in (0, 1], got {cfg.cfl}")
    if cfg.mesh_size <= 0.0:
        errors.append(f"mesh_size: must be positive, got {cfg.mesh_size}")
    if cfg.plateau_eps <= 0.0:
        errors.append(f"plateau_eps: must be positive, got {cfg.plateau_eps}")
    if cfg.output_every < 0.0:
        errors.append(f"output_every: must be >= 0, got {cfg.output_every}")
    if cfg.scenario == "inline" and not cfg.inline_domain:
        errors.append("inline scenario requires inline_domain")
    return errors


def serialize(cfg):
    """Config back to its text form (stable key order)."""
    lines = []
    for f in dc_fields(RunConfig):
        val = getattr(cfg, f.name)
        if isinstance(val, bool):
            val = "true" if val else "false"
        lines.append(f"{f.name} = {val}")
    return "\n".join(lines) + "\n"


def output_dir(cfg):
    """Output directory, honoring the environment override."""
    return os.environ.get(ENV_OUTPUT_DIR, cfg.output_dir)


_EVAL_NS = {
    "exp": np.exp,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "hypot": np.hypot,
    "where": np.where,
    "maximum": np.maximum,
    "minimum": np.minimum,
    "abs": np.abs,
    "pi": np.pi,
}


def _expr_closure(expr):
    code = compile(expr, "<inline>", "eval")

    def fn(x, y):
        ns = dict(_EVAL_NS)
        ns["x"] = x
        ns["y"] = y
        val = eval(code, {"__builtins__": {}}, ns)  # restricted namespace
        return np.broadcast_to(
            np.asarray(val, dtype=float), np.shape(x)
        ).copy() if np.ndim(val) == 0 else np.asarray(val, dtype=float)

    return fn


def inline_scenario(cfg):
    """Build a Scenario from the inline_* keys."""
    from .cases import Scenario

    parts = cfg.inline_domain.split()
    if len(parts) != 4:
        raise ConfigError(["inline_domain: expected 'xmin xmax ymin ymax'"])
    bounds = tuple(float(p) for p in parts)
    z = _expr_closure(cfg.inline_z)
    fh = _expr_closure(cfg.inline_h)
    fu = _expr_closure(cfg.inline_u)
    fv = _expr_closure(cfg.inline_v)
    fth = _expr_closure(cfg.inline_theta)

    def init(x, y):
        return fh(x, y), fu(x, y), fv(x, y), fth(x, y)

    return Scenario(
        name="inline",
        bounds=bounds,
        z=z,
        init=init,
        g=cfg.inline_g,
        t_final=cfg.inline_t_final,
        boundary=cfg.inline_boundary,
    )
