"""Named single-mode input states and their textual form.

Accepted spellings: ``vacuum``, ``fock(n)``, ``coherent(alpha)``,
``thermal(nbar)`` and ``matrix([[...], ...])`` with Python complex literals.
"""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .fock import DensityOperator, StateVector, coherent_state, cutoff_for, fock_state

KINDS = ("vacuum", "fock", "coherent", "thermal", "matrix")
_CALL = re.compile(r"^\s*(\w+)\s*(?:\((.*)\))?\s*$", re.S)


def _thermal_dim(nbar: float, tail: float = 1e-12) -> int:
    if nbar <= 0:
        return 2
    ratio = nbar / (1 + nbar)
    return max(2, math.ceil(math.log(tail) / math.log(ratio)) + 1)


@dataclass(frozen=True)
class StateSpec:
    kind: str
    param: complex | float | int | None = None
    matrix: tuple | None = field(default=None, compare=True)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown state kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if (self.kind == "matrix") != (self.matrix is not None):
            raise ConfigurationError("a matrix state needs its matrix and nothing else does")

    @classmethod
    def parse(cls, text: str) -> "StateSpec":
        m = _CALL.match(text)
        if not m:
            raise ConfigurationError(f"cannot parse state {text!r}")
        kind, arg = m.group(1).lower(), m.group(2)
        try:
            if kind == "vacuum" and arg is None:
                return cls("vacuum")
            if kind == "fock":
                n = ast.literal_eval(arg)
                if not isinstance(n, int) or n < 0:
                    raise ConfigurationError(f"fock level must be a non-negative integer, got {arg!r}")
                return cls("fock", n)
            if kind == "coherent":
                return cls("coherent", complex(ast.literal_eval(arg)))
            if kind == "thermal":
                nbar = float(ast.literal_eval(arg))
                if nbar < 0:
                    raise ConfigurationError(f"thermal occupation must be >= 0, got {nbar}")
                return cls("thermal", nbar)
            if kind == "matrix":
                rows = ast.literal_eval(arg)
                return cls.from_matrix(np.array(rows, dtype=complex))
        except (ValueError, SyntaxError, TypeError) as exc:
            raise ConfigurationError(f"malformed state {text!r}: {exc}") from None
        raise ConfigurationError(f"unknown state kind {text!r}")

    @classmethod
    def from_matrix(cls, m) -> "StateSpec":
        m = np.asarray(m, dtype=complex)
        DensityOperator(m)  # validation
        return cls("matrix", matrix=tuple(tuple(complex(v) for v in row) for row in m))

    def __str__(self) -> str:
        if self.kind == "vacuum":
            return "vacuum"
        if self.kind == "matrix":
            rows = [[_fmt(v) for v in row] for row in self.matrix]
            return "matrix([" + ", ".join("[" + ", ".join(r) + "]" for r in rows) + "])"
        return f"{self.kind}({_fmt(self.param)})"

    def min_dim(self) -> int:
        """Levels needed to represent the state within the default deficit."""
        if self.kind == "vacuum":
            return 2
        if self.kind == "fock":
            return self.param + 2
        if self.kind == "coherent":
            return cutoff_for(self.param)
        if self.kind == "thermal":
            return _thermal_dim(self.param)
        return len(self.matrix)

    def density(self, dim: int | None = None) -> DensityOperator:
        dim = self.min_dim() if dim is None else dim
        if self.kind == "vacuum":
            return DensityOperator.from_vector(fock_state(0, dim))
        if self.kind == "fock":
            return DensityOperator.from_vector(fock_state(self.param, dim))
        if self.kind == "coherent":
            return DensityOperator.from_vector(coherent_state(self.param, dim))
        if self.kind == "thermal":
            nbar = self.param
            if nbar == 0:
                return DensityOperator.from_vector(fock_state(0, dim))
            p = (nbar / (1 + nbar)) ** np.arange(dim) / (1 + nbar)
            deficit = 1.0 - p.sum()
            return DensityOperator(np.diag(p / p.sum()).astype(complex), max(deficit, 0.0))
        return DensityOperator(np.array(self.matrix, dtype=complex)).embed(dim)


def _fmt(v) -> str:
    if isinstance(v, complex):
        if v.imag == 0:
            return repr(v.real)
        return repr(v).strip("()")
    return repr(v)


def as_density(state, dim: int | None = None) -> DensityOperator:
    """Coerce a StateSpec, spec string, StateVector, DensityOperator or matrix/vector."""
    if isinstance(state, str):
        state = StateSpec.parse(state)
    if isinstance(state, StateSpec):
        return state.density(dim)
    if isinstance(state, DensityOperator):
        return state if dim is None else state.embed(dim)
    if isinstance(state, StateVector):
        rho = DensityOperator.from_vector(state)
        return rho if dim is None else rho.embed(dim)
    arr = np.asarray(state, dtype=complex)
    rho = DensityOperator.from_vector(arr) if arr.ndim == 1 else DensityOperator(arr)
    return rho if dim is None else rho.embed(dim)
