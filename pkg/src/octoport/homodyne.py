"""Balanced homodyne observables on a signal mode with a coherent auxiliary mode.

The observable ``E^z(X) = V_z^* P^{|z|^{-1} A}(X) V_z`` lives on the signal
mode, where ``A = (a_s a_x^+ + a_s^+ a_x)/sqrt2`` couples signal and
auxiliary, and ``V_z`` attaches ``|z>`` to the auxiliary mode.  Outcomes sit
on the lattice ``k / (sqrt2 |z|)``.  Two realizations are provided:

``counting``
    Attach ``|z>``, apply the 50-50 beam splitter and read the photon-number
    difference ``n_aux - n_sig``; uses ``U^* N^- U / sqrt2 = A``.
``eigen``
    Diagonalize the truncated ``A`` sector by sector and bin its eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigurationError
from .fock import coherent_state, cutoff_for, hermite_functions, quadratures
from .multimode import beam_splitter
from .quadrature import integrate_1d
from .sets import as_intervals, union_contains, warn_boundary_atoms
from .states import as_density

REALIZATIONS = ("counting", "eigen")
EIGEN_SNAP = 1e-10


@dataclass(frozen=True)
class DiscreteOutcomeDistribution:
    """Probability weights on the lattice ``index * step``."""

    step: float
    indices: np.ndarray
    weights: np.ndarray
    leak: float = 0.0

    @property
    def values(self) -> np.ndarray:
        return self.indices * self.step

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def probability(self, X) -> float:
        ivs = as_intervals(X)
        warn_boundary_atoms(self.values[self.weights > 0], ivs)
        return float(self.weights[union_contains(ivs, self.values)].sum())

    def mean(self) -> float:
        return float(self.values @ self.weights / self.total)

    def variance(self) -> float:
        m = self.mean()
        return float((self.values - m) ** 2 @ self.weights / self.total)


@dataclass(frozen=True)
class HomodyneObservable:
    z: complex
    signal_dim: int
    aux_dim: int
    realization: str = "counting"

    def __post_init__(self):
        if abs(self.z) == 0:
            raise ConfigurationError("homodyne amplitude must be non-zero")
        if self.realization not in REALIZATIONS:
            raise ConfigurationError(f"unknown realization {self.realization!r}")

    @classmethod
    def for_state(cls, z, signal_dim, realization="counting", aux_dim=None):
        aux = aux_dim or cutoff_for(z)
        return cls(complex(z), max(signal_dim, aux), aux, realization)

    @property
    def step(self) -> float:
        """Lattice spacing of the ``|z|^{-1} A`` outcomes."""
        return 1.0 / (math.sqrt(2) * abs(self.z))

    @cached_property
    def aux_state(self):
        return coherent_state(self.z, self.aux_dim)

    @property
    def leak(self) -> float:
        return self.aux_state.norm_deficit

    @cached_property
    def counting_effects(self):
        """``(k, E)`` with ``E[i]`` the effect of outcome ``k[i] * step``.

        ``k = n_aux - n_sig`` after the beam splitter (signal in the primary port).
        """
        ds, da = self.signal_dim, self.aux_dim
        u = beam_splitter(1, 3, (ds, da)).unitary
        # columns: U (e_j (x) |z>)
        attach = np.kron(np.eye(ds), self.aux_state.coeffs[:, None])
        m = np.asarray(u @ attach).reshape(ds, da, ds)
        ks = np.arange(-(ds - 1), da)
        effects = np.empty((ks.size, ds, ds), dtype=complex)
        for i, k in enumerate(ks):
            ns = np.arange(max(0, -k), min(ds, da - k))
            rows = m[ns, ns + k, :]
            effects[i] = rows.conj().T @ rows
        return ks, effects

    @cached_property
    def eigen_atoms(self):
        """``(values, vectors)``: atoms of ``|z|^{-1} A`` pulled back by ``V_z``.

        ``E(X) = sum over values in X of u u^+`` with ``u`` the rows of ``vectors``.
        """
        ds, da = self.signal_dim, self.aux_dim
        zc = self.aux_state.coeffs
        values, vecs = [], []
        for N in range(ds + da - 1):
            lo, hi = max(0, N - da + 1), min(N, ds - 1)
            ns = np.arange(lo, hi + 1)
            na = N - ns
            if ns.size == 1:
                lam, v = np.zeros(1), np.ones((1, 1))
            else:
                off = np.sqrt((ns[:-1] + 1) * na[:-1]) / math.sqrt(2)
                lam, v = eigh_tridiagonal(np.zeros(ns.size), off)
            u = np.zeros((ns.size, ds), dtype=complex)
            # (V^* v)[n_s] = conj(<n_a|z>) v[n_s, n_a]
            u[:, ns] = (v * np.conj(zc[na])[:, None]).T
            values.append(lam)
            vecs.append(u)
        lam = np.concatenate(values)
        snapped = np.round(lam * math.sqrt(2)) / math.sqrt(2)
        lam = np.where(np.abs(lam - snapped) <= EIGEN_SNAP, snapped, lam)
        return lam / abs(self.z), np.concatenate(vecs)

    def effect(self, X) -> np.ndarray:
        """The signal-mode operator ``E^z(X)``."""
        ivs = as_intervals(X)
        if self.realization == "counting":
            ks, eff = self.counting_effects
            vals = ks * self.step
            warn_boundary_atoms(vals, ivs)
            return eff[union_contains(ivs, vals)].sum(axis=0)
        vals, u = self.eigen_atoms
        warn_boundary_atoms(vals, ivs)
        sel = u[union_contains(ivs, vals)]
        return sel.T @ sel.conj()

    def probability(self, T, X) -> float:
        rho = as_density(T).embed(self.signal_dim).matrix
        return float(np.real(np.trace(rho @ self.effect(X))))

    def distribution(self, T) -> DiscreteOutcomeDistribution:
        rho = as_density(T).embed(self.signal_dim).matrix
        ks, eff = self.counting_effects
        w = np.einsum("ij,kji->k", rho, eff).real
        return DiscreteOutcomeDistribution(self.step, ks, np.clip(w, 0.0, None), self.leak)


def homodyne_probability(T, z, X, *, realization="counting", signal_dim=None, aux_dim=None) -> float:
    """``Tr[T E^z(X)]``."""
    rho = as_density(T)
    obs = HomodyneObservable.for_state(z, signal_dim or rho.dim, realization, aux_dim)
    return obs.probability(rho, X)


def scaled_difference_distribution(vector, dims, scale: float) -> DiscreteOutcomeDistribution:
    """Distribution of ``(n_second - n_first) / scale`` for a two-mode pure state."""
    d1, d2 = dims
    p = np.abs(np.asarray(vector).reshape(d1, d2)) ** 2
    ks = np.arange(-(d1 - 1), d2)
    w = np.array([np.trace(p, offset=k) for k in ks])
    return DiscreteOutcomeDistribution(1.0 / scale, ks, w)


def rotate(rho: np.ndarray, theta: float) -> np.ndarray:
    """``e^{-i theta N} rho e^{i theta N}``: the state seen by the ``Q_theta`` measurement."""
    ph = np.exp(-1j * theta * np.arange(rho.shape[0]))
    return ph[:, None] * rho * ph.conj()[None, :]


def quadrature_window(rho: np.ndarray, nsigma: float = 8.0, floor: float = 6.0):
    """Integration window ``<Q> +/- nsigma * sd`` from the state's moments."""
    d = rho.shape[0] + 1
    big = np.zeros((d, d), dtype=complex)
    big[:-1, :-1] = rho
    q, _ = quadratures(d)
    mean = np.trace(big @ q).real
    var = max(np.trace(big @ q @ q).real - mean**2, 0.0)
    half = max(nsigma * math.sqrt(var), floor)
    return mean - half, mean + half


def position_overlaps(dim: int, X, window, rtol: float = 1e-10) -> np.ndarray:
    """``[int_X h_m h_n dx]`` restricted to ``window``."""
    total = np.zeros((dim, dim))
    for iv in as_intervals(X):
        piece = iv.clip(*window)
        if piece.length <= 0:
            continue

        def f(x):
            h = hermite_functions(dim, x)
            return h[:, None, :] * h[None, :, :]

        total += integrate_1d(f, piece.lo, piece.hi, rtol=rtol)
    return total


def quadrature_probability(T, theta: float, X, rtol: float = 1e-8) -> float:
    """``Tr[T P^{Q_theta}(X)]`` with ``Q_theta = e^{i theta N} Q e^{-i theta N}``.

    Evaluated in the coordinate representation: the Fock coefficients are
    phase-rotated and the position density is integrated over ``X``.
    """
    rho = rotate(as_density(T).matrix, theta)
    lo, hi = quadrature_window(rho)
    dim = rho.shape[0]
    total = 0.0
    for iv in as_intervals(X):
        piece = iv.clip(lo, hi)
        if piece.length <= 0:
            continue

        def density(x):
            h = hermite_functions(dim, x)
            return np.einsum("mx,mn,nx->x", h, rho, h).real

        total += float(integrate_1d(density, piece.lo, piece.hi, rtol=rtol))
    return total
