"""Experiment configuration files.

The format is INI-style key/value text, one section per concern::

    [experiment]
    kind = convergence_sweep
    path = direct

    [states]
    T = coherent(1)
    S = vacuum

    [detector]
    z = 2
    phi = pi/2
    radii = 1, 2, 3

    [cutoffs]
    mode1 = 30

    [grid]
    window = -4, 4
    shape = 8, 8

    [check]
    tolerance = 1e-6

Numbers may be written as arithmetic in ``pi`` (``3*pi/4``) and amplitudes
as Python complex literals (``1+0.5j``).
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
from dataclasses import asdict, dataclass

from .errors import ConfigurationError, ConfigValidationError
from .states import StateSpec

KINDS = ("g_statistics", "lemma1_check", "lemma2_check", "convergence_sweep", "husimi_map")

SCHEMA = {
    "experiment": ("kind", "path", "max_branches"),
    "states": ("T", "S"),
    "detector": ("z", "phi", "radii"),
    "cutoffs": ("mode1", "mode2", "mode3", "mode4"),
    "grid": ("window", "shape"),
    "check": ("tolerance",),
}

DEFAULT_TOLERANCE = {
    "g_statistics": 1e-10,
    "lemma1_check": 1e-6,
    "lemma2_check": 1e-4,
    "convergence_sweep": 0.05,
    "husimi_map": 1e-8,
}
DEFAULT_GRID = {
    "lemma2_check": ((-1.0, 1.0), (1, 1)),
    "husimi_map": ((-4.0, 4.0), (81, 81)),
}

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def eval_number(text: str) -> complex | float | int:
    """Evaluate a numeric expression over literals and ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) and not isinstance(
            node.value, bool
        ):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError, TypeError) as exc:
        raise ValueError(f"malformed number {text!r}: {exc}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    T: StateSpec
    S: StateSpec = StateSpec("vacuum")
    z: complex = 2.0
    phi: float = math.pi / 2
    radii: tuple = (1.0, 2.0, 3.0)
    path: str = "direct"
    cutoffs: tuple = ()
    window: tuple = (-4.0, 4.0)
    shape: tuple = (8, 8)
    tolerance: float = 1e-6
    max_branches: int = 32

    def cutoff_dict(self) -> dict:
        return dict(self.cutoffs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["T"], d["S"] = str(self.T), str(self.S)
        d["z"] = [self.z.real, self.z.imag]
        d["cutoffs"] = {f"mode{m}": v for m, v in self.cutoffs}
        return d


def _num(v) -> str:
    if isinstance(v, complex):
        return repr(v).strip("()") if v.imag else repr(v.real)
    return repr(v)


def serialize_config(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["experiment"] = {"kind": cfg.kind, "path": cfg.path, "max_branches": str(cfg.max_branches)}
    cp["states"] = {"T": str(cfg.T), "S": str(cfg.S)}
    cp["detector"] = {"z": _num(cfg.z), "phi": _num(cfg.phi), "radii": ", ".join(_num(r) for r in cfg.radii)}
    cp["cutoffs"] = {f"mode{m}": str(v) for m, v in cfg.cutoffs}
    cp["grid"] = {"window": ", ".join(_num(w) for w in cfg.window), "shape": ", ".join(map(str, cfg.shape))}
    cp["check"] = {"tolerance": _num(cfg.tolerance)}
    lines = []
    for section in cp.sections():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in cp[section].items())
        lines.append("")
    return "\n".join(lines)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigValidationError` listing every problem."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    errors = []
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigValidationError([f"syntax: {exc}"]) from None

    for section in cp.sections():
        if section not in SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        for key in cp[section]:
            if key not in SCHEMA[section]:
                errors.append(f"unknown key {section}.{key}")

    def get(section, key):
        if cp.has_section(section) and key in cp[section]:
            return cp[section][key]
        return None

    values = {}
    kind = get("experiment", "kind")
    if kind is None:
        errors.append("missing required field experiment.kind")
    elif kind not in KINDS:
        errors.append(f"experiment.kind: unknown kind {kind!r} (expected one of {', '.join(KINDS)})")
        kind = None
    else:
        values["kind"] = kind

    for key in ("T", "S"):
        raw = get("states", key)
        if raw is None:
            if key == "T":
                errors.append("missing required field states.T")
            continue
        try:
            values[key] = StateSpec.parse(raw)
        except ConfigurationError as exc:
            errors.append(f"states.{key}: {exc}")

    raw = get("detector", "z")
    if raw is None:
        if kind in ("g_statistics", "lemma1_check"):
            errors.append("missing required field detector.z")
    else:
        try:
            z = complex(eval_number(raw))
            if z == 0:
                raise ValueError("must be non-zero")
            values["z"] = z
        except ValueError as exc:
            errors.append(f"detector.z: {exc}")

    raw = get("detector", "phi")
    if raw is not None:
        try:
            phi = eval_number(raw)
            if isinstance(phi, complex):
                raise ValueError("must be real")
            values["phi"] = float(phi)
        except ValueError as exc:
            errors.append(f"detector.phi: {exc}")

    raw = get("detector", "radii")
    if raw is not None:
        try:
            radii = tuple(float(eval_number(r)) for r in raw.split(","))
            if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
                raise ValueError("must be positive and strictly increasing")
            values["radii"] = radii
        except (ValueError, TypeError) as exc:
            errors.append(f"detector.radii: {exc}")

    raw = get("experiment", "path")
    if raw is not None:
        if raw not in ("direct", "factorized"):
            errors.append(f"experiment.path: expected 'direct' or 'factorized', got {raw!r}")
        else:
            values["path"] = raw

    raw = get("experiment", "max_branches")
    if raw is not None:
        try:
            mb = int(raw)
            if mb < 1:
                raise ValueError("must be >= 1")
            values["max_branches"] = mb
        except ValueError as exc:
            errors.append(f"experiment.max_branches: {exc}")

    cut = []
    if cp.has_section("cutoffs"):
        for key, raw in cp["cutoffs"].items():
            if key not in SCHEMA["cutoffs"]:
                continue
            try:
                v = int(raw)
            except ValueError:
                errors.append(f"cutoffs.{key}: malformed integer {raw!r}")
                continue
            if v < 2:
                errors.append(f"cutoffs.{key}: cutoff must be >= 2, got {v}")
                continue
            cut.append((int(key[-1]), v))
    values["cutoffs"] = tuple(sorted(cut))

    window, shape = DEFAULT_GRID.get(kind, ((-4.0, 4.0), (8, 8)))
    raw = get("grid", "window")
    if raw is not None:
        try:
            window = tuple(float(eval_number(w)) for w in raw.split(","))
            if len(window) != 2 or not window[0] < window[1]:
                raise ValueError("expected 'lo, hi' with lo < hi")
        except (ValueError, TypeError) as exc:
            errors.append(f"grid.window: {exc}")
    raw = get("grid", "shape")
    if raw is not None:
        try:
            shape = tuple(int(s) for s in raw.split(","))
            if len(shape) != 2 or min(shape) < 1:
                raise ValueError("expected two positive integers")
        except ValueError as exc:
            errors.append(f"grid.shape: {exc}")
    values["window"], values["shape"] = window, shape

    tol = DEFAULT_TOLERANCE.get(kind, 1e-6)
    raw = get("check", "tolerance")
    if raw is not None:
        try:
            tol = float(eval_number(raw))
            if tol <= 0:
                raise ValueError("must be positive")
        except (ValueError, TypeError) as exc:
            errors.append(f"check.tolerance: {exc}")
    values["tolerance"] = tol

    if errors:
        raise ConfigValidationError(errors)
    return ExperimentConfig(**values)
