"""Single-mode primitives on a truncated Fock space.

All operators are dense ``(dim, dim)`` complex arrays in the photon-number
basis ``|0>, ..., |dim-1>``.  The coordinate representation identifies
``|n>`` with the normalized Hermite function ``h_n``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc

from .errors import ConfigurationError, TruncationError, TruncationWarning


def check_dim(dim) -> int:
    if isinstance(dim, (bool, np.bool_)) or not isinstance(dim, (int, np.integer)):
        raise ConfigurationError(f"cutoff must be an integer, got {dim!r}")
    if dim < 2:
        raise ConfigurationError(f"cutoff must be >= 2, got {dim}")
    return int(dim)


def cutoff_for(amplitude: complex, minimum: int = 2) -> int:
    """Recommended number of Fock levels for a coherent amplitude.

    ``ceil(|a|^2 + 6|a| + 10)`` keeps the truncated tail below ~1e-10 for
    ``|a| <= 4``.
    """
    r = abs(amplitude)
    return max(minimum, math.ceil(r * r + 6 * r + 10))


@dataclass(frozen=True)
class StateVector:
    coeffs: np.ndarray
    norm_deficit: float = 0.0

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    def projector(self) -> np.ndarray:
        return np.outer(self.coeffs, self.coeffs.conj())


@dataclass(frozen=True)
class DensityOperator:
    """Trace-one positive matrix on a truncated single-mode Fock space."""

    matrix: np.ndarray
    deficit: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ConfigurationError(f"density matrix must be square, got shape {m.shape}")
        check_dim(m.shape[0])
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ConfigurationError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise ConfigurationError(f"density matrix trace is {tr:.12g}, expected 1")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ConfigurationError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_vector(cls, state) -> "DensityOperator":
        if isinstance(state, StateVector):
            return cls(state.projector(), deficit=state.norm_deficit)
        v = np.asarray(state, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    def embed(self, dim: int) -> "DensityOperator":
        """Zero-pad (or trim empty levels) to ``dim`` levels."""
        if dim == self.dim:
            return self
        if dim < self.dim:
            tail = self.matrix[dim:, dim:]
            if np.trace(tail).real > 1e-14:
                raise TruncationError("cannot trim occupied levels", np.trace(tail).real)
            return DensityOperator(self.matrix[:dim, :dim], self.deficit)
        m = np.zeros((dim, dim), dtype=complex)
        m[: self.dim, : self.dim] = self.matrix
        return DensityOperator(m, self.deficit)

    def support_dim(self, tol: float = 1e-16) -> int:
        """Smallest number of levels holding all population above ``tol``."""
        occupied = np.nonzero(np.diag(self.matrix).real > tol)[0]
        return max(2, int(occupied[-1]) + 1) if occupied.size else 2

    def branches(self, max_branches: int = 32, tol: float = 1e-14):
        """Spectral decomposition into pure branches.

        Returns ``(weights, vectors, discarded)`` with the weights renormalized
        over the kept branches; ``vectors`` has one branch per column.
        """
        w, v = np.linalg.eigh(self.matrix)
        order = np.argsort(w)[::-1]
        w, v = w[order], v[:, order]
        keep = w > tol
        w, v = w[keep], v[:, keep]
        discarded = float(1.0 - w[:max_branches].sum())
        w, v = w[:max_branches], v[:, :max_branches]
        return w / w.sum(), v, max(discarded, 0.0)


def annihilation(dim: int) -> np.ndarray:
    dim = check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


def number(dim: int) -> np.ndarray:
    dim = check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def quadratures(dim: int):
    """Return ``(Q, P)`` with ``Q = (a^+ + a)/sqrt2`` and ``P = i(a^+ - a)/sqrt2``."""
    a = annihilation(dim)
    ad = a.conj().T
    return (ad + a) / math.sqrt(2), 1j * (ad - a) / math.sqrt(2)


def coherent_coefficients(alpha: complex, dim: int) -> np.ndarray:
    """Raw (unrenormalized) truncated coefficients ``e^{-|a|^2/2} a^n / sqrt(n!)``."""
    c = np.empty(dim, dtype=complex)
    c[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def coherent_state(alpha: complex, dim: int, max_deficit: float | None = None) -> StateVector:
    """Truncated coherent state, renormalized, with the lost mass recorded.

    Raises :class:`TruncationError` when the deficit exceeds ``max_deficit``.
    """
    dim = check_dim(dim)
    alpha = complex(alpha)
    # P(Poisson(|a|^2) >= dim), computed without cancellation
    deficit = float(gammainc(dim, abs(alpha) ** 2)) if alpha != 0 else 0.0
    if max_deficit is not None and deficit > max_deficit:
        raise TruncationError(f"coherent state alpha={alpha} needs more than {dim} levels", deficit)
    if alpha != 0 and dim < cutoff_for(alpha):
        warnings.warn(
            f"cutoff {dim} below recommended {cutoff_for(alpha)} for |alpha|={abs(alpha):.3g}",
            TruncationWarning,
            stacklevel=2,
        )
    c = coherent_coefficients(alpha, dim)
    return StateVector(c / np.linalg.norm(c), deficit)


def fock_state(n: int, dim: int) -> StateVector:
    dim = check_dim(dim)
    if not 0 <= n < dim:
        raise ConfigurationError(f"level {n} outside cutoff {dim}")
    c = np.zeros(dim, dtype=complex)
    c[n] = 1.0
    return StateVector(c)


def displacement(alpha: complex, dim: int) -> np.ndarray:
    """``D(alpha) = exp(alpha a^+ - conj(alpha) a)`` on the truncated space.

    The truncated generator stays skew-Hermitian, so the result is unitary.
    The Weyl operator ``W(q, p)`` equals ``displacement((q + 1j*p)/sqrt(2))``.
    """
    a = annihilation(dim)
    return expm(alpha * a.conj().T - np.conj(alpha) * a)


def weyl(q: float, p: float, dim: int) -> np.ndarray:
    return displacement((q + 1j * p) / math.sqrt(2), dim)


def phase_shifter(phi: float, dim: int) -> np.ndarray:
    dim = check_dim(dim)
    return np.diag(np.exp(1j * phi * np.arange(dim)))


def displacement_elements(alpha, rows: int, cols: int) -> np.ndarray:
    """Exact matrix elements ``<m|D(alpha)|n>`` for ``m < rows``, ``n < cols``.

    Vectorized over ``alpha`` (any shape); the result has shape
    ``alpha.shape + (rows, cols)``.  Uses the column recursion
    ``D[m, n+1] = (sqrt(m) D[m-1, n] - conj(alpha) D[m, n]) / sqrt(n+1)``,
    which needs no levels beyond ``rows`` and so carries no truncation error.
    """
    alpha = np.asarray(alpha, dtype=complex)
    out = np.empty(alpha.shape + (rows, cols), dtype=complex)
    col = np.empty(alpha.shape + (rows,), dtype=complex)
    col[..., 0] = np.exp(-0.5 * np.abs(alpha) ** 2)
    for m in range(1, rows):
        col[..., m] = col[..., m - 1] * alpha / math.sqrt(m)
    out[..., 0] = col
    sq = np.sqrt(np.arange(rows))
    ac = np.conj(alpha)[..., None]
    for n in range(cols - 1):
        prev = out[..., n]
        nxt = -ac * prev
        nxt[..., 1:] += sq[1:] * prev[..., :-1]
        out[..., n + 1] = nxt / math.sqrt(n + 1)
    return out


def hermite_functions(nmax: int, x) -> np.ndarray:
    """Normalized Hermite functions ``h_0..h_{nmax-1}`` at points ``x``.

    Returns an array of shape ``(nmax,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    h = np.empty((nmax,) + x.shape)
    h[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax > 1:
        h[1] = math.sqrt(2.0) * x * h[0]
    for n in range(1, nmax - 1):
        h[n + 1] = x * math.sqrt(2.0 / (n + 1)) * h[n] - math.sqrt(n / (n + 1)) * h[n - 1]
    return h


def hermite_point(n: int, x: float) -> float:
    if n < 0:
        raise ConfigurationError(f"Hermite index must be >= 0, got {n}")
    if not math.isfinite(x):
        raise ConfigurationError("Hermite argument must be finite")
    return float(hermite_functions(n + 1, x)[n])
