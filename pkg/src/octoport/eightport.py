"""The eight-port homodyne detector and the observable it measures.

Mode 1 carries the signal ``T``, mode 2 the parameter state ``S``, mode 3 is
empty and mode 4 holds the reference ``|sqrt2 z>``.  The network is

    (U_13 (x) U_24) e^{i phi N_4} (B_12 (x) B_43)

and the detectors report ``((n3 - n1)/|z|, (n4 - n2)/|z|)``.  Two routes give
the outcome statistics ``Tr[T G(Z)]``:

* :func:`run_direct` simulates the four-mode pure state and histograms the
  photon-number differences;
* :func:`run_factorized` contracts ``B_12 (T (x) S) B_12^*`` with the product
  of two single-homodyne effects, one per output pair.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InfeasibleError, TruncationError
from .fock import coherent_state, cutoff_for, phase_shifter
from .homodyne import HomodyneObservable
from .multimode import (
    ModeSystem,
    MultimodeState,
    apply_single_mode,
    apply_two_mode,
    beam_splitter,
    product_state,
)
from .sets import ATOM_TOL, Rectangle
from .states import as_density

TRUNCATION_BUDGET = 1e-4
MAX_BRANCHES = 32
MAX_AMPLITUDES = 5_000_000
LARGE_MEMORY_AMPLITUDES = 50_000_000
PATHS = ("direct", "factorized")


@dataclass(frozen=True)
class DetectorConfig:
    T: object
    S: object
    z: complex
    phi: float = math.pi / 2
    cutoffs: dict | None = None
    rectangles: tuple = ()
    max_branches: int = MAX_BRANCHES
    budget: float = TRUNCATION_BUDGET
    max_amplitudes: int = MAX_AMPLITUDES

    def __post_init__(self):
        if abs(self.z) == 0:
            raise ConfigurationError("reference amplitude z must be non-zero")
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    def states(self):
        """Input density operators at their natural cutoffs."""
        return as_density(self.T), as_density(self.S)

    def resolved_cutoffs(self) -> dict:
        """Per-mode cutoffs, filling defaults for modes not overridden.

        Modes 1-3 share ``max(rule(|z|), supp(T) + supp(S) - 1, 20)`` so that
        every photon-number sector reached by ``B_12`` and ``U_13`` is kept
        whole; mode 4 additionally holds the input ``|sqrt2 z>``.
        """
        rho_t, rho_s = self.states()
        d = max(cutoff_for(self.z), rho_t.support_dim() + rho_s.support_dim() - 1, 20)
        cut = {1: d, 2: d, 3: d, 4: max(cutoff_for(math.sqrt(2) * abs(self.z)), d)}
        for k, v in (self.cutoffs or {}).items():
            cut[int(k)] = int(v)
        return cut


@dataclass(frozen=True)
class GStatistics:
    """Joint distribution of the two scaled number differences.

    ``weights[i, j]`` is the probability of outcome ``(k[i] * step, l[j] * step)``.
    """

    path: str
    step: float
    k: np.ndarray
    l: np.ndarray
    weights: np.ndarray
    leak: float = 0.0
    budgets: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def rectangle_probability(self, rect: Rectangle) -> float:
        q, p = self.k * self.step, self.l * self.step
        return float(self.weights[np.ix_(rect.q.contains(q), rect.p.contains(p))].sum())

    def rectangle_probs(self, rects) -> np.ndarray:
        return np.array([self.rectangle_probability(r) for r in rects])

    def boundary_atoms(self, rect: Rectangle, tol: float = ATOM_TOL) -> bool:
        """True when a lattice atom lies on an edge of ``rect``."""
        q, p = self.k * self.step, self.l * self.step
        for vals, edges in ((q, (rect.qmin, rect.qmax)), (p, (rect.pmin, rect.pmax))):
            for e in edges:
                if math.isfinite(e) and np.min(np.abs(vals - e)) <= tol:
                    return True
        return False

    def marginal(self, axis: int = 0) -> np.ndarray:
        return self.weights.sum(axis=1 - axis)

    def mean(self):
        w = self.weights / self.total
        q, p = self.k * self.step, self.l * self.step
        return float(q @ w.sum(axis=1)), float(p @ w.sum(axis=0))


def check_feasible(cfg: DetectorConfig) -> dict:
    """Resolved cutoffs, or :class:`InfeasibleError` if the four-mode vector is too large."""
    cut = cfg.resolved_cutoffs()
    size = math.prod(cut.values())
    if size > cfg.max_amplitudes:
        raise InfeasibleError(f"four-mode state needs {size} amplitudes (limit {cfg.max_amplitudes})")
    return cut


def _branches(cfg: DetectorConfig, cut: dict):
    rho_t, rho_s = cfg.states()
    rho_t, rho_s = rho_t.embed(cut[1]), rho_s.embed(cut[2])
    wt, vt, dt = rho_t.branches(cfg.max_branches)
    ws, vs, ds = rho_s.branches(cfg.max_branches)
    if wt.size * ws.size > cfg.max_branches:
        raise InfeasibleError(
            f"{wt.size} x {ws.size} spectral branches exceed the limit of {cfg.max_branches}"
        )
    pairs = [(wt[i] * ws[j], vt[:, i], vs[:, j]) for i in range(wt.size) for j in range(ws.size)]
    budgets = {"T_deficit": rho_t.deficit, "S_deficit": rho_s.deficit, "discarded_branch_weight": dt + ds}
    return pairs, budgets


def _check_budget(budgets: dict, limit: float):
    total = sum(budgets.values())
    if total > limit:
        raise TruncationError(f"accumulated truncation deficit exceeds budget {limit:g}", total)
    return total


def _diff_histogram(p: np.ndarray) -> np.ndarray:
    """Histogram of ``(n3 - n1, n4 - n2)`` from a four-mode count table."""
    d1, d2, d3, d4 = p.shape
    h1 = np.zeros((d1 + d3 - 1, d2, d4))
    for n1 in range(d1):
        s = d1 - 1 - n1
        h1[s : s + d3] += p[n1].transpose(1, 0, 2)
    out = np.zeros((d1 + d3 - 1, d2 + d4 - 1))
    for n2 in range(d2):
        s = d2 - 1 - n2
        out[:, s : s + d4] += h1[:, n2, :]
    return out


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def network_input(cfg: DetectorConfig, cut: dict, t_vec, s_vec) -> MultimodeState:
    """``(B_12 (x) B_43)(T (x) S (x) |0> (x) |sqrt2 z>)`` followed by the phase shifter."""
    b12 = beam_splitter(1, 2, (cut[1], cut[2]))
    b43 = beam_splitter(4, 3, (cut[4], cut[3]))
    ref = coherent_state(math.sqrt(2) * cfg.z, cut[4])
    s12 = apply_two_mode(b12, product_state({1: t_vec, 2: s_vec}), (1, 2))
    s34 = apply_two_mode(b43, product_state({3: coherent_state(0, cut[3]), 4: ref}), (4, 3))
    s34 = apply_single_mode(phase_shifter(cfg.phi, cut[4]), s34, 4)
    system = ModeSystem((1, 2, 3, 4), (cut[1], cut[2], cut[3], cut[4]))
    return MultimodeState(system, vector=np.kron(s12.vector, s34.vector), deficit=ref.norm_deficit)


def run_direct(cfg: DetectorConfig, threads: int | None = None) -> GStatistics:
    """Outcome statistics from a full four-mode simulation."""
    cut = check_feasible(cfg)
    pairs, budgets = _branches(cfg, cut)
    budgets["reference_deficit"] = float(coherent_state(math.sqrt(2) * cfg.z, cut[4]).norm_deficit)
    leak = _check_budget(budgets, cfg.budget)
    u13 = beam_splitter(1, 3, (cut[1], cut[3]))
    u24 = beam_splitter(2, 4, (cut[2], cut[4]))

    def branch(item):
        w, tv, sv = item
        state = network_input(cfg, cut, tv, sv)
        state = apply_two_mode(u13, state, (1, 3))
        state = apply_two_mode(u24, state, (2, 4))
        p = (np.abs(state.vector) ** 2).reshape(state.system.dims)
        return w * _diff_histogram(p)

    hist = np.zeros((cut[1] + cut[3] - 1, cut[2] + cut[4] - 1))
    for h in _map(branch, pairs, threads):
        hist += h
    return GStatistics(
        "direct",
        1.0 / abs(cfg.z),
        np.arange(-(cut[1] - 1), cut[3]),
        np.arange(-(cut[2] - 1), cut[4]),
        hist,
        leak,
        budgets,
    )


def run_factorized(cfg: DetectorConfig, threads: int | None = None) -> GStatistics:
    """Outcome statistics from ``B_12 (T (x) S) B_12^*`` and two homodyne effects."""
    cut = cfg.resolved_cutoffs()
    pairs, budgets = _branches(cfg, cut)
    d1, d2 = cut[1], cut[2]
    e1 = HomodyneObservable(cfg.z, d1, cut[3])
    e2 = HomodyneObservable(cfg.z * np.exp(1j * cfg.phi), d2, cut[3])
    budgets["aux1_deficit"] = e1.leak
    budgets["aux2_deficit"] = e2.leak
    leak = _check_budget(budgets, cfg.budget)
    k1, eff1 = e1.counting_effects
    k2, eff2 = e2.counting_effects
    b12 = beam_splitter(1, 2, (d1, d2))

    def branch(item):
        w, tv, sv = item
        psi = np.asarray(b12.unitary @ np.kron(tv, sv)).reshape(d1, d2)
        # D[k, j, m] = sum_i conj(psi[i, j]) (E1[k] psi)[i, m]
        left = np.einsum("ij,kim->kjm", psi.conj(), eff1 @ psi)
        # prob[k, l] = sum_{j, m} D[k, j, m] E2[l][j, m]
        return w * (left.reshape(len(k1), -1) @ eff2.reshape(len(k2), -1).T).real

    hist = np.zeros((len(k1), len(k2)))
    for h in _map(branch, pairs, threads):
        hist += h
    return GStatistics("factorized", 1.0 / abs(cfg.z), k1, k2, np.clip(hist, 0.0, None), leak, budgets)


def run(cfg: DetectorConfig, path: str = "direct", threads: int | None = None) -> GStatistics:
    if path == "direct":
        return run_direct(cfg, threads)
    if path == "factorized":
        return run_factorized(cfg, threads)
    raise ConfigurationError(f"unknown path {path!r}; expected one of {PATHS}")


def g_rectangle(T, S, z, phi, Z: Rectangle, path: str = "direct", **kwargs) -> float:
    """``Tr[T G^{z,S,phi}(Z)]`` for one rectangle."""
    stats = run(DetectorConfig(T, S, z, phi, **kwargs), path)
    return stats.rectangle_probability(Z)
