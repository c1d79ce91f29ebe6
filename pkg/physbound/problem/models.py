"""Core data model for affine physical design problems.

Pure, immutable containers. Arrays are copied to float64 on construction and
marked read-only so instances can be shared freely between threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]


def _frozen(a: ArrayLike, ndim: int) -> FloatArray:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim < ndim:
        arr = arr.reshape(arr.shape + (1,) * (ndim - arr.ndim))
    arr.flags.writeable = False
    return arr


# ---------------------------------------------------------------------------
# Enums
# ---------------------------------------------------------------------------

class Domain(Enum):
    """Admissible set of the design parameters."""
    INTERVAL = "interval"   # -1 <= theta <= 1
    BOOLEAN = "boolean"     # theta in {-1, +1}^d


# ---------------------------------------------------------------------------
# Problem data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FactoredTerm:
    """One design term A_i = u v^T, kept factored."""
    u: FloatArray
    v: FloatArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "u", _frozen(self.u, 2))
        object.__setattr__(self, "v", _frozen(self.v, 2))

    @property
    def rank(self) -> int:
        """Column count m_i shared by both factors."""
        return self.u.shape[1]

    def dense(self) -> FloatArray:
        return self.u @ self.v.T

    def apply(self, z: FloatArray) -> FloatArray:
        """A_i z without materializing A_i."""
        return self.u @ (self.v.T @ z)


@dataclass(frozen=True)
class PhysicsProblem:
    """Physics equation (A0 + sum theta_i U_i V_i^T) z = b over a domain.

    Dimensions are not checked here; use ``validate_problem``.
    """
    a0: FloatArray
    terms: tuple[FactoredTerm, ...]
    b: FloatArray
    domain: Domain = Domain.INTERVAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "a0", _frozen(self.a0, 2))
        object.__setattr__(self, "b", _frozen(np.ravel(self.b), 1))
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "domain", Domain(self.domain))

    @property
    def m(self) -> int:
        return self.a0.shape[0]

    @property
    def n(self) -> int:
        return self.a0.shape[1]

    @property
    def d(self) -> int:
        return len(self.terms)

    @property
    def term_sizes(self) -> tuple[int, ...]:
        return tuple(t.rank for t in self.terms)

    def dense_term(self, i: int) -> FloatArray:
        """Materialize A_i for a 1-based term index."""
        return self.terms[i - 1].dense()

    def with_domain(self, domain: Domain) -> PhysicsProblem:
        return PhysicsProblem(a0=self.a0, terms=self.terms, b=self.b, domain=domain)


@dataclass(frozen=True)
class FieldSolution:
    z: FloatArray
    residual: float
    solvable: bool

    def __post_init__(self) -> None:
        object.__setattr__(self, "z", _frozen(self.z, 1))


@dataclass(frozen=True)
class QuadraticObjective:
    """f(z) = z^T Q z + 2 q^T z + r, with Q symmetrized on construction."""
    qmat: FloatArray
    qvec: FloatArray
    r: float = 0.0

    def __post_init__(self) -> None:
        q = np.array(self.qmat, dtype=np.float64, ndmin=2)
        object.__setattr__(self, "qmat", _frozen(0.5 * (q + q.T), 2))
        object.__setattr__(self, "qvec", _frozen(np.ravel(self.qvec), 1))
        object.__setattr__(self, "r", float(self.r))

    @property
    def n(self) -> int:
        return self.qvec.shape[0]

    def __call__(self, z: ArrayLike) -> float:
        z = np.asarray(z, dtype=np.float64)
        return float(z @ self.qmat @ z + 2.0 * self.qvec @ z + self.r)

    @classmethod
    def zero(cls, n: int) -> QuadraticObjective:
        return cls(qmat=np.zeros((n, n)), qvec=np.zeros(n), r=0.0)

    @classmethod
    def squared_distance(cls, target: ArrayLike) -> QuadraticObjective:
        """f(z) = ||z - target||^2."""
        t = np.ravel(np.asarray(target, dtype=np.float64))
        return cls(qmat=np.eye(t.size), qvec=-t, r=float(t @ t))


@dataclass(frozen=True)
class ProblemInstance:
    """A problem together with its objective, as read from or written to disk."""
    problem: PhysicsProblem
    objective: QuadraticObjective
    # spectral reconstruction error per term when it was factored from a dense A_i
    reconstruction: tuple[float | None, ...] = field(default_factory=tuple)
    # the dense A_i as written in the file, kept so it is written back unchanged
    dense_sources: tuple[FloatArray | None, ...] = field(default_factory=tuple)
