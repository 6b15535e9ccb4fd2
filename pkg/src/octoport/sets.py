"""Half-open intervals and rectangles used as test sets."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryAtomWarning, ConfigurationError

ATOM_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    """The half-open interval ``[lo, hi)``; either end may be infinite."""

    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ConfigurationError(f"interval bounds out of order: [{self.lo}, {self.hi})")

    def contains(self, x):
        x = np.asarray(x)
        return (x >= self.lo) & (x < self.hi)

    def scaled(self, c: float) -> "Interval":
        return Interval(self.lo * c, self.hi * c)

    def clip(self, lo: float, hi: float) -> "Interval":
        a, b = max(self.lo, lo), min(self.hi, hi)
        return Interval(a, max(a, b))

    @property
    def length(self) -> float:
        return self.hi - self.lo


REAL_LINE = Interval()


def as_intervals(X) -> tuple:
    """Normalize an Interval, a ``(lo, hi)`` pair or a sequence of either."""
    if X is None:
        return (REAL_LINE,)
    if isinstance(X, Interval):
        return (X,)
    if len(X) == 2 and all(isinstance(v, (int, float, np.floating, np.integer)) for v in X):
        return (Interval(float(X[0]), float(X[1])),)
    out = tuple(x if isinstance(x, Interval) else Interval(*map(float, x)) for x in X)
    srt = sorted(out, key=lambda i: i.lo)
    for a, b in zip(srt, srt[1:]):
        if b.lo < a.hi:
            raise ConfigurationError("interval union must consist of disjoint pieces")
    return out


def union_contains(intervals, x):
    x = np.asarray(x)
    mask = np.zeros(x.shape, dtype=bool)
    for iv in intervals:
        mask |= iv.contains(x)
    return mask


def warn_boundary_atoms(atoms, intervals, tol: float = ATOM_TOL):
    """Warn when an outcome atom sits on an interval endpoint."""
    atoms = np.asarray(atoms, dtype=float)
    for iv in intervals:
        for e in (iv.lo, iv.hi):
            if math.isfinite(e) and atoms.size and np.min(np.abs(atoms - e)) <= tol:
                warnings.warn(f"outcome atom on test-set boundary at {e:g}", BoundaryAtomWarning, stacklevel=3)
                return True
    return False


@dataclass(frozen=True)
class Rectangle:
    """``[qmin, qmax) x [pmin, pmax)``."""

    qmin: float
    qmax: float
    pmin: float
    pmax: float

    def __post_init__(self):
        Interval(self.qmin, self.qmax)
        Interval(self.pmin, self.pmax)

    @classmethod
    def plane(cls) -> "Rectangle":
        return cls(-math.inf, math.inf, -math.inf, math.inf)

    @property
    def q(self) -> Interval:
        return Interval(self.qmin, self.qmax)

    @property
    def p(self) -> Interval:
        return Interval(self.pmin, self.pmax)

    def contains(self, q, p):
        return self.q.contains(q) & self.p.contains(p)

    def shifted(self, dq: float, dp: float) -> "Rectangle":
        return Rectangle(self.qmin + dq, self.qmax + dq, self.pmin + dp, self.pmax + dp)

    def as_tuple(self):
        return (self.qmin, self.qmax, self.pmin, self.pmax)
