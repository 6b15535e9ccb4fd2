"""Covariant phase-space observables generated by a density operator.

``E^S(Z) = (1/2pi) int_Z W(q,p) S W(q,p)^* dq dp`` with the Weyl operator
``W(q, p) = D((q + ip)/sqrt2)``.  Matrix elements of ``W`` between low Fock
levels come from :func:`octoport.fock.displacement_elements`, which is exact
at any truncation, so the density is evaluated without a working cutoff.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyWarning
from .fock import DensityOperator, displacement_elements, quadratures
from .homodyne import position_overlaps, quadrature_window, rotate
from .multimode import beam_splitter
from .quadrature import integrate_2d
from .sets import Rectangle, as_intervals
from .states import as_density

CHUNK = 4096


def conjugate_state(S) -> DensityOperator:
    """``C S C^{-1}`` for the coordinate-space complex conjugation ``C``.

    Hermite functions are real, so ``C`` conjugates Fock coefficients.
    """
    rho = as_density(S)
    return DensityOperator(rho.matrix.conj(), rho.deficit)


def _moments(rho: np.ndarray):
    d = rho.shape[0] + 1
    big = np.zeros((d, d), dtype=complex)
    big[:-1, :-1] = rho
    q, p = quadratures(d)
    out = []
    for x in (q, p):
        m = np.trace(big @ x).real
        out.append((m, math.sqrt(max(np.trace(big @ x @ x).real - m * m, 0.0))))
    return out


def safe_window(T, S) -> float:
    """Half-width of the square that carries all but a negligible tail.

    ``4 + spread(T) + spread(S)`` with ``spread = |mean| + 4 * max sd`` over
    both quadratures.
    """

    def spread(rho):
        (mq, sq), (mp, sp_) = _moments(rho.matrix)
        return max(abs(mq), abs(mp)) + 4 * max(sq, sp_)

    return 4.0 + spread(as_density(T)) + spread(as_density(S))


@dataclass(frozen=True)
class PhaseSpaceMeasure:
    """``Z -> Tr[T E^S(Z)]`` for a fixed pair ``(T, S)``."""

    T: DensityOperator
    S: DensityOperator
    rtol: float = 1e-6
    order: int = 8
    max_cell: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "T", as_density(self.T))
        object.__setattr__(self, "S", as_density(self.S))
        wt, vt, _ = self.T.branches(max_branches=self.T.dim)
        ws, vs, _ = self.S.branches(max_branches=self.S.dim)
        object.__setattr__(self, "_branches", (wt, vt, ws, vs))

    @property
    def window(self) -> float:
        return safe_window(self.T, self.S)

    def density(self, q, p) -> np.ndarray:
        """``(1/2pi) Tr[T W(q,p) S W(q,p)^*]`` at arrays of points."""
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        shape = np.broadcast(q, p).shape
        alpha = ((np.broadcast_to(q, shape) + 1j * np.broadcast_to(p, shape)) / math.sqrt(2)).ravel()
        wt, vt, ws, vs = self._branches
        out = np.empty(alpha.size)
        for start in range(0, alpha.size, CHUNK):
            a = alpha[start : start + CHUNK]
            d = displacement_elements(a, vt.shape[0], vs.shape[0])
            # amp[x, i, j] = <tau_i| D(alpha_x) |sigma_j>
            amp = np.einsum("mi,xmn,nj->xij", vt.conj(), d, vs, optimize=True)
            out[start : start + CHUNK] = np.einsum("xij,i,j->x", np.abs(amp) ** 2, wt, ws)
        return (out / (2 * math.pi)).reshape(shape)

    def rectangle_probability(self, Z: Rectangle) -> float:
        """Adaptive tensor Gauss-Legendre integral of the density over ``Z``.

        Unbounded edges are cut at the safe window.
        """
        w = self.window
        qa, qb = max(Z.qmin, -w), min(Z.qmax, w)
        pa, pb = max(Z.pmin, -w), min(Z.pmax, w)
        return integrate_2d(self.density, qa, qb, pa, pb, rtol=self.rtol, order=self.order, max_cell=self.max_cell)

    def rectangle_probs(self, rects) -> np.ndarray:
        return np.array([self.rectangle_probability(r) for r in rects])


def density(T, S, q: float, p: float) -> float:
    meas = PhaseSpaceMeasure(T, S)
    w = meas.window
    if abs(q) > w or abs(p) > w:
        warnings.warn(
            f"point ({q:g}, {p:g}) outside the safe window |q|,|p| <= {w:.3g}", AccuracyWarning, stacklevel=2
        )
    return float(meas.density(q, p))


def rectangle_probability(T, S, Z: Rectangle, rtol: float = 1e-6) -> float:
    return PhaseSpaceMeasure(T, S, rtol=rtol).rectangle_probability(Z)


def lemma2_rhs(T, S, X, Y, rtol: float = 1e-10) -> float:
    """``Tr[B_12 (T (x) S) B_12^* P^Q(X/sqrt2) (x) P^{P_2}(Y/sqrt2)]``.

    Position of mode 1 in the Hermite representation; momentum of mode 2 via
    the Fourier diagonal ``F h_n = (-i)^n h_n``.  The two-mode space holds
    every photon-number sector of ``T (x) S`` whole, so ``B_12`` is exact.
    """
    rt, rs = as_density(T), as_density(S)
    d = rt.dim + rs.dim - 1
    rt, rs = rt.embed(d), rs.embed(d)
    b = beam_splitter(1, 2, (d, d)).unitary
    wt, vt, _ = rt.branches(max_branches=d)
    ws, vs, _ = rs.branches(max_branches=d)
    # mode-2 momentum is mode-2 position after e^{-i pi/2 N}
    fourier = np.exp(-0.5j * math.pi * np.arange(d))
    rho1 = np.zeros((d, d), dtype=complex)
    rho2 = np.zeros((d, d), dtype=complex)
    psis = []
    for i in range(wt.size):
        for j in range(ws.size):
            psi = np.asarray(b @ np.kron(vt[:, i], vs[:, j])).reshape(d, d) * fourier[None, :]
            psis.append((wt[i] * ws[j], psi))
            rho1 += wt[i] * ws[j] * psi @ psi.conj().T
            rho2 += wt[i] * ws[j] * psi.T @ psi.conj()
    xs = tuple(iv.scaled(1 / math.sqrt(2)) for iv in as_intervals(X))
    ys = tuple(iv.scaled(1 / math.sqrt(2)) for iv in as_intervals(Y))
    ix = position_overlaps(d, xs, quadrature_window(rho1), rtol)
    iy = position_overlaps(d, ys, quadrature_window(rho2), rtol)
    total = 0.0
    for w, psi in psis:
        # <psi| I_X (x) I_Y |psi> with real overlap matrices
        total += w * np.real(np.vdot(psi, ix @ psi @ iy.T))
    return float(total)


def quadrature_mean(rho, theta: float = 0.0) -> float:
    (mq, _), _ = _moments(rotate(as_density(rho).matrix, theta))
    return mq
