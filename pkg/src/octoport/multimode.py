"""Tensor-product algebra over up to four modes.

States live in one canonical layout: modes are listed in increasing id order
and the joint basis index is the row-major flattening over that order.  Beam
splitters are stored as sparse two-mode matrices whose first tensor slot is
the primary mode, with the coherent-state law

    |alpha> (x) |beta>  ->  |(alpha - beta)/sqrt2> (x) |(alpha + beta)/sqrt2>

in (primary, secondary) order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .errors import ConfigurationError, ConventionError
from .fock import DensityOperator, check_dim, coherent_state, phase_shifter

# exp(THETA * (a_p^+ a_s - a_p a_s^+)) realizes the law above
THETA = -math.pi / 4
PROBE_LIMIT = 1e-6


@dataclass(frozen=True)
class ModeSystem:
    mode_ids: tuple
    dims: tuple

    def __post_init__(self):
        ids = tuple(int(m) for m in self.mode_ids)
        dims = tuple(check_dim(d) for d in self.dims)
        if len(ids) != len(dims):
            raise ConfigurationError("one cutoff per mode required")
        if len(set(ids)) != len(ids) or not set(ids) <= {1, 2, 3, 4}:
            raise ConfigurationError(f"mode ids must be distinct members of 1..4, got {ids}")
        if list(ids) != sorted(ids):
            raise ConfigurationError(f"modes must be listed in canonical order, got {ids}")
        object.__setattr__(self, "mode_ids", ids)
        object.__setattr__(self, "dims", dims)

    def axis(self, mode: int) -> int:
        try:
            return self.mode_ids.index(mode)
        except ValueError:
            raise ConfigurationError(f"mode {mode} not in system {self.mode_ids}") from None

    def dim_of(self, mode: int) -> int:
        return self.dims[self.axis(mode)]

    @property
    def size(self) -> int:
        return math.prod(self.dims)


@dataclass(frozen=True)
class MultimodeState:
    """Pure (``vector``) or mixed (``matrix``) state over a :class:`ModeSystem`."""

    system: ModeSystem
    vector: np.ndarray | None = None
    matrix: np.ndarray | None = None
    deficit: float = 0.0

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def norm(self) -> float:
        if self.is_pure:
            return float(np.vdot(self.vector, self.vector).real)
        return float(np.trace(self.matrix).real)

    def to_mixed(self) -> "MultimodeState":
        if not self.is_pure:
            return self
        return MultimodeState(self.system, matrix=np.outer(self.vector, self.vector.conj()), deficit=self.deficit)


def product_state(factors: dict, deficit: float = 0.0) -> MultimodeState:
    """Pure product state from ``{mode: coefficient vector}``."""
    modes = sorted(factors)
    vecs = [np.asarray(getattr(factors[m], "coeffs", factors[m]), dtype=complex) for m in modes]
    extra = sum(getattr(factors[m], "norm_deficit", 0.0) for m in modes)
    vec = vecs[0]
    for v in vecs[1:]:
        vec = np.kron(vec, v)
    system = ModeSystem(tuple(modes), tuple(len(v) for v in vecs))
    return MultimodeState(system, vector=vec, deficit=deficit + extra)


@dataclass(frozen=True)
class BeamSplitter:
    primary: int
    secondary: int
    dims: tuple
    unitary: sp.csr_matrix

    @property
    def pair(self):
        return (self.primary, self.secondary)

    def dagger(self) -> sp.csr_matrix:
        return self.unitary.conj().T.tocsr()


def _sector_generator(N: int, dp: int, ds: int):
    """States and generator block of ``a_p^+ a_s - a_p a_s^+`` at total number N."""
    lo, hi = max(0, N - ds + 1), min(N, dp - 1)
    n_p = np.arange(lo, hi + 1)
    n_s = N - n_p
    k = n_p.size
    g = np.zeros((k, k))
    for i in range(k - 1):
        # a_p^+ a_s |n_p, n_s> -> |n_p + 1, n_s - 1>
        g[i + 1, i] = math.sqrt((n_p[i] + 1) * n_s[i])
        g[i, i + 1] = -g[i + 1, i]
    return n_p, n_s, g


@lru_cache(maxsize=64)
def _bs_matrix(dp: int, ds: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for N in range(dp + ds - 1):
        n_p, n_s, g = _sector_generator(N, dp, ds)
        idx = n_p * ds + n_s
        block = expm(THETA * g) if g.shape[0] > 1 else np.ones((1, 1))
        r, c = np.meshgrid(idx, idx, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(block.ravel())
    n = dp * ds
    m = sp.csr_matrix(
        (np.concatenate(vals).astype(complex), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    m.eliminate_zeros()
    return m


def probe_residual(unitary, dp: int, ds: int, alpha: complex, beta: complex) -> float:
    """Norm distance between ``B(|alpha>|beta>)`` and the expected output pair."""
    inp = np.kron(coherent_state(alpha, dp).coeffs, coherent_state(beta, ds).coeffs)
    out = np.kron(
        coherent_state((alpha - beta) / math.sqrt(2), dp).coeffs,
        coherent_state((alpha + beta) / math.sqrt(2), ds).coeffs,
    )
    return float(np.linalg.norm(unitary @ inp - out))


@lru_cache(maxsize=None)
def _check_convention():
    u = _bs_matrix(24, 24)
    res = probe_residual(u, 24, 24, 0.9, -0.4 + 0.6j)
    if res > PROBE_LIMIT:
        raise ConventionError(f"beam splitter violates the coherent law (residual {res:.2e})")
    return res


def beam_splitter(primary: int, secondary: int, dims) -> BeamSplitter:
    """50-50 beam splitter with ``primary`` in the first tensor slot.

    ``dims`` gives the (primary, secondary) cutoffs.  Every construction is
    checked against the coherent law on a probe pair; the check runs on the
    requested cutoffs when they are large enough to hold the probe, and on a
    reference cutoff otherwise (sectors below both cutoffs are identical).
    """
    if primary == secondary or not {primary, secondary} <= {1, 2, 3, 4}:
        raise ConfigurationError(f"invalid mode pair ({primary}, {secondary})")
    dp, ds = (check_dim(d) for d in dims)
    u = _bs_matrix(dp, ds)
    _check_convention()
    if min(dp, ds) >= 24:
        res = probe_residual(u, dp, ds, 0.9, -0.4 + 0.6j)
        if res > PROBE_LIMIT:
            raise ConventionError(f"beam splitter B{primary}{secondary} probe residual {res:.2e}")
    return BeamSplitter(primary, secondary, (dp, ds), u)


def _apply_pure(op, vec, dims, axes):
    t = np.moveaxis(vec.reshape(dims), axes, [0, 1])
    shp = t.shape
    t = np.asarray(op @ t.reshape(shp[0] * shp[1], -1)).reshape(shp)
    return np.moveaxis(t, [0, 1], axes).reshape(-1)


def apply_two_mode(op, state: MultimodeState, target_pair) -> MultimodeState:
    """Apply a two-mode operator on ``target_pair`` and identity elsewhere.

    The operator's first tensor slot acts on ``target_pair[0]``.  ``op`` may be
    a :class:`BeamSplitter`, a dense array or a sparse matrix.
    """
    system = state.system
    if isinstance(op, BeamSplitter):
        if tuple(target_pair) != op.pair:
            raise ConfigurationError(f"beam splitter {op.pair} applied to pair {tuple(target_pair)}")
        op = op.unitary
    p, s = target_pair
    axes = [system.axis(p), system.axis(s)]
    n = system.dim_of(p) * system.dim_of(s)
    if op.shape != (n, n):
        raise ConfigurationError(f"operator shape {op.shape} does not match pair dimension {n}")
    if state.is_pure:
        vec = _apply_pure(op, state.vector, system.dims, axes)
        return MultimodeState(system, vector=vec, deficit=state.deficit)
    dims = system.dims
    k = len(dims)
    rho = state.matrix.reshape(dims + dims)
    # ket side
    rho = _apply_pure(op, rho.reshape(-1), dims + dims, axes).reshape(dims + dims)
    # bra side: rho -> rho op^+
    rho = _apply_pure(op.conj(), rho.reshape(-1), dims + dims, [a + k for a in axes])
    return MultimodeState(system, matrix=rho.reshape(system.size, system.size), deficit=state.deficit)


def apply_single_mode(op, state: MultimodeState, mode: int) -> MultimodeState:
    system = state.system
    ax = system.axis(mode)
    dims = system.dims

    def ket(vec, dims, ax):
        t = np.moveaxis(vec.reshape(dims), ax, 0)
        shp = t.shape
        t = (op @ t.reshape(shp[0], -1)).reshape(shp)
        return np.moveaxis(t, 0, ax).reshape(-1)

    if state.is_pure:
        return MultimodeState(system, vector=ket(state.vector, dims, ax), deficit=state.deficit)
    k = len(dims)
    rho = ket(state.matrix.reshape(-1), dims + dims, ax)
    op_c = op.conj()
    t = np.moveaxis(rho.reshape(dims + dims), ax + k, 0)
    shp = t.shape
    t = np.moveaxis((op_c @ t.reshape(shp[0], -1)).reshape(shp), 0, ax + k)
    return MultimodeState(system, matrix=t.reshape(system.size, system.size), deficit=state.deficit)


def joint_number_distribution(state: MultimodeState) -> np.ndarray:
    """Photon-count probabilities with one axis per mode (canonical order)."""
    if state.is_pure:
        p = np.abs(state.vector) ** 2
    else:
        p = np.diag(state.matrix).real.copy()
    return p.reshape(state.system.dims)


def partial_trace(state: MultimodeState, keep_modes) -> DensityOperator:
    system = state.system
    keep = sorted(int(m) for m in keep_modes)
    for m in keep:
        system.axis(m)
    if not keep:
        raise ConfigurationError("keep_modes must not be empty")
    keep_ax = [system.axis(m) for m in keep]
    drop_ax = [i for i in range(len(system.dims)) if i not in keep_ax]
    dk = math.prod(system.dims[i] for i in keep_ax)
    if state.is_pure:
        t = np.transpose(state.vector.reshape(system.dims), keep_ax + drop_ax).reshape(dk, -1)
        rho = t @ t.conj().T
    else:
        k = len(system.dims)
        t = state.matrix.reshape(system.dims + system.dims)
        t = np.transpose(t, keep_ax + drop_ax + [k + i for i in keep_ax] + [k + i for i in drop_ax])
        dd = system.size // dk
        rho = np.einsum("ajbj->ab", t.reshape(dk, dd, dk, dd))
    rho = rho / np.trace(rho).real
    return DensityOperator(0.5 * (rho + rho.conj().T), deficit=state.deficit)


def prepare_mode4(z: complex, phi: float, dims) -> MultimodeState:
    """``(I (x) e^{i phi N_4}) B_43 (|0> (x) |sqrt2 z>)`` over modes (3, 4).

    ``dims`` is ``(d3, d4)``.  Mode 4 is the primary port of ``B_43``.  The
    result is ``|z> (x) |e^{i phi} z>`` up to truncation.
    """
    d3, d4 = dims
    state = product_state({3: coherent_state(0, d3), 4: coherent_state(math.sqrt(2) * z, d4)})
    state = apply_two_mode(beam_splitter(4, 3, (d4, d3)), state, (4, 3))
    return apply_single_mode(phase_shifter(phi, d4), state, 4)
