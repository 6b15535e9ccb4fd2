"""Finite-amplitude statistics against the high-amplitude limit.

A sequence of measures converges weakly in the sense of probabilities when
its values on every test set whose boundary the limit does not charge tend to
the limit values.  Rectangles have Lebesgue-null boundaries, so the limit
phase-space measure never charges them; edges are further kept off the
outcome lattice so the finite-amplitude measures do not charge them either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .eightport import MAX_AMPLITUDES, DetectorConfig, run
from .errors import ConfigurationError, InfeasibleError, TruncationError
from .phasespace import PhaseSpaceMeasure, conjugate_state
from .sets import Rectangle
from .states import as_density

DEFAULT_THRESHOLD = 0.05
DEFAULT_RADII = (1.0, 2.0, 3.0)
LARGE_RADII = (1.0, 2.0, 3.0, 4.0)


@dataclass(frozen=True)
class AmplitudeSchedule:
    radii: tuple = DEFAULT_RADII
    phi: float = math.pi / 2

    def __post_init__(self):
        r = tuple(float(x) for x in self.radii)
        if not r or any(x <= 0 for x in r) or any(b <= a for a, b in zip(r, r[1:])):
            raise ConfigurationError(f"radii must be positive and strictly increasing, got {r}")
        object.__setattr__(self, "radii", r)

    @property
    def steps(self):
        return tuple(1.0 / r for r in self.radii)


def _edge_offset(edges: np.ndarray, steps) -> float:
    """Shift putting every edge as far as possible from every lattice."""
    steps = [float(s) for s in np.atleast_1d(steps)]
    if len(steps) == 1:
        s = steps[0]
        off = (np.floor(edges / s) + 0.5) * s - edges
        if np.allclose(off, off[0]):
            return float(off[0])

    def clearance(offsets):
        shifted = edges[None, :] + np.asarray(offsets, dtype=float)[:, None]
        dist = np.full(shifted.shape[0], np.inf)
        for s in steps:
            r = np.abs(shifted / s - np.round(shifted / s)) * s
            dist = np.minimum(dist, r.min(axis=1))
        return dist

    cands = np.linspace(0.0, max(steps), 2049)[1:-1]
    best = float(cands[np.argmax(clearance(cands))])
    # prefer a nearby simple fraction when it clears the lattices at least as well
    simple = float(Fraction(best).limit_denominator(64))
    return simple if clearance([simple])[0] >= clearance([best])[0] else best


def boundary_null_rectangles(lattice_step, window=(-4.0, 4.0), grid_shape=(8, 8)):
    """Disjoint half-open rectangles tiling ``window`` shifted off the lattice.

    ``lattice_step`` may be a single spacing or a sequence of spacings (one
    per amplitude); the same shift is applied to every edge so that the tiles
    stay a partition of the shifted window.
    """
    steps = np.atleast_1d(np.asarray(lattice_step, dtype=float))
    if np.any(steps <= 0):
        raise ConfigurationError("lattice step must be positive")
    lo, hi = window
    nq, np_ = grid_shape
    eq = np.linspace(lo, hi, nq + 1)
    ep = np.linspace(lo, hi, np_ + 1)
    off = _edge_offset(np.concatenate([eq, ep]), steps)
    eq, ep = eq + off, ep + off
    return tuple(
        Rectangle(float(eq[i]), float(eq[i + 1]), float(ep[j]), float(ep[j + 1]))
        for i in range(nq)
        for j in range(np_)
    )


def lattice_hits(rects, step: float, tol: float = 1e-9) -> int:
    """Number of finite rectangle edges lying on the lattice ``step * Z``."""
    hits = 0
    for r in rects:
        for e in r.as_tuple():
            if math.isfinite(e) and abs(e / step - round(e / step)) * step <= tol:
                hits += 1
    return hits


@dataclass
class ConvergenceRow:
    r: float
    rect_id: int
    rect: Rectangle
    p_finite: float
    p_limit: float

    @property
    def gap(self) -> float:
        return abs(self.p_finite - self.p_limit)


@dataclass
class ConvergenceReport:
    rows: list = field(default_factory=list)
    skipped: dict = field(default_factory=dict)
    threshold: float = DEFAULT_THRESHOLD
    leaks: dict = field(default_factory=dict)
    note: str = "gap threshold is a calibrated choice; no convergence rate is implied"

    @property
    def radii(self):
        return sorted({row.r for row in self.rows})

    def sup_gaps(self) -> dict:
        out = {}
        for row in self.rows:
            out[row.r] = max(out.get(row.r, 0.0), row.gap)
        return dict(sorted(out.items()))

    def monotone(self) -> bool:
        g = list(self.sup_gaps().values())
        return all(b <= a for a, b in zip(g, g[1:]))

    def table(self, r: float) -> np.ndarray:
        return np.array([row.p_finite for row in self.rows if row.r == r])

    def limit_table(self) -> np.ndarray:
        r0 = self.radii[0]
        return np.array([row.p_limit for row in self.rows if row.r == r0])

    def passed(self) -> bool:
        ok, _ = weak_convergence_check([self.table(r) for r in self.radii], self.limit_table(), self.threshold)
        return ok


def limit_probabilities(T, S, rects) -> np.ndarray:
    """``Tr[T E^{C S C^-1}(Z)]`` for each rectangle."""
    return PhaseSpaceMeasure(as_density(T), conjugate_state(S)).rectangle_probs(rects)


def convergence_sweep(
    T, S, schedule: AmplitudeSchedule = AmplitudeSchedule(), rects=None, *,
    path="direct", threshold=DEFAULT_THRESHOLD, max_amplitudes=MAX_AMPLITUDES, threads=None,
) -> ConvergenceReport:
    """Compare ``G^{r,S,phi}`` with the limit observable on every rectangle for each radius."""
    if rects is None:
        rects = boundary_null_rectangles(schedule.steps)
    limit = limit_probabilities(T, S, rects)
    report = ConvergenceReport(threshold=threshold)
    for r in schedule.radii:
        cfg = DetectorConfig(T, S, r, schedule.phi, max_amplitudes=max_amplitudes)
        try:
            stats = run(cfg, path, threads)
        except (InfeasibleError, TruncationError) as exc:
            report.skipped[r] = str(exc)
            continue
        report.leaks[r] = stats.leak
        for i, (rect, pl) in enumerate(zip(rects, limit)):
            report.rows.append(ConvergenceRow(r, i, rect, stats.rectangle_probability(rect), float(pl)))
    return report


def weak_convergence_check(tables, limit, threshold: float = DEFAULT_THRESHOLD):
    """Decide convergence of a finite sequence of rectangle tables.

    True iff every gap at the last element is within ``threshold`` and the
    sup-gap does not increase over the last two elements.  Returns
    ``(verdict, sup_gap_trace)``.
    """
    limit = np.asarray(limit, dtype=float)
    tables = [np.asarray(t, dtype=float) for t in tables]
    if not tables:
        raise ConfigurationError("empty sequence")
    for t in tables:
        if t.shape != limit.shape:
            raise ConfigurationError(f"table shape {t.shape} does not match limit shape {limit.shape}")
    trace = [float(np.max(np.abs(t - limit))) if t.size else 0.0 for t in tables]
    ok = trace[-1] <= threshold
    if len(trace) >= 2:
        ok = ok and trace[-1] <= trace[-2]
    return ok, trace
