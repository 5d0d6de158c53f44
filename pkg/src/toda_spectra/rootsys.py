"""Exact su(N) root-system combinatorics.

Weights live in the hyperplane of zero coordinate sum, written in the
overcomplete basis {e_1, ..., e_N} with

    e_i . e_j = delta_ij - 1/N,        sum_i e_i = 0.

All arithmetic is exact rational (fractions.Fraction); floating point
enters only at the boundary to the connection module, because the sign
factors of the orbit sums cancel exactly and must not be perturbed by
rounding.  Subsets and roots are enumerated in lexicographic order so
every orbit sum is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "WeightVector",
    "weight_dot",
    "positive_roots",
    "weyl_vector",
    "weyl_orbit_subsets",
    "subset_weight",
    "fundamental_weight",
]


def _as_fraction_tuple(coords: Iterable) -> tuple[Fraction, ...]:
    return tuple(Fraction(c) for c in coords)


@dataclass(frozen=True)
class WeightVector:
    """A weight of su(N) as zero-sum rational coordinates in the e-basis.

    The e-basis is overcomplete (sum_i e_i = 0), so coordinates are only
    defined up to a common shift; the zero-sum representative is the
    canonical one and is enforced exactly.
    """

    n: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"su(N) needs N >= 2, got N={self.n}")
        if len(self.coeffs) != self.n:
            raise DomainError(
                f"expected {self.n} coordinates, got {len(self.coeffs)}"
            )
        object.__setattr__(self, "coeffs", _as_fraction_tuple(self.coeffs))
        if sum(self.coeffs) != 0:
            raise DomainError("coordinates must sum to zero exactly")

    @classmethod
    def from_e_coords(cls, coords: Sequence) -> "WeightVector":
        """Build from arbitrary e-basis coordinates, projecting to zero sum."""
        coords = _as_fraction_tuple(coords)
        n = len(coords)
        mean = sum(coords) / n
        return cls(n, tuple(c - mean for c in coords))

    def dot(self, other: "WeightVector") -> Fraction:
        return weight_dot(self, other)

    def __add__(self, other: "WeightVector") -> "WeightVector":
        if self.n != other.n:
            raise DomainError("mismatched N in weight addition")
        return WeightVector(self.n, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "WeightVector") -> "WeightVector":
        if self.n != other.n:
            raise DomainError("mismatched N in weight subtraction")
        return WeightVector(self.n, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "WeightVector":
        return WeightVector(self.n, tuple(-a for a in self.coeffs))

    def scale(self, factor) -> "WeightVector":
        factor = Fraction(factor)
        return WeightVector(self.n, tuple(factor * a for a in self.coeffs))

    def as_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=float)


def weight_dot(v: WeightVector, w: WeightVector) -> Fraction:
    """Exact inner product sum_ij v_i w_j (delta_ij - 1/N).

    With zero-sum coordinates this reduces to sum_i v_i w_i, but the full
    bilinear form is kept so non-projected inputs would still be correct.
    """
    if v.n != w.n:
        raise DomainError(f"mismatched N: {v.n} vs {w.n}")
    sv = sum(v.coeffs)
    sw = sum(w.coeffs)
    return sum(a * b for a, b in zip(v.coeffs, w.coeffs)) - sv * sw / v.n


def positive_roots(n: int) -> list[WeightVector]:
    """Positive roots alpha_{k,l} = e_k - e_l, 1 <= k < l <= N, in (k,l) order."""
    if n < 2:
        raise DomainError(f"positive_roots needs N >= 2, got N={n}")
    roots = []
    for k, l in combinations(range(n), 2):
        coords = [Fraction(0)] * n
        coords[k] = Fraction(1)
        coords[l] = Fraction(-1)
        roots.append(WeightVector(n, tuple(coords)))
    return roots


def weyl_vector(n: int) -> WeightVector:
    """Weyl vector rho with e-basis coordinate i equal to (N - 2i + 1) / 2."""
    if n < 2:
        raise DomainError(f"weyl_vector needs N >= 2, got N={n}")
    coords = tuple(Fraction(n - 2 * i + 1, 2) for i in range(1, n + 1))
    return WeightVector(n, coords)


def weyl_orbit_subsets(n: int, k: int) -> list[tuple[int, ...]]:
    """Index subsets S of {1..N} with |S| = k, lexicographically ordered.

    These label the Weyl orbit of the k-th fundamental weight: the orbit
    element attached to S is sum_{i in S} e_i (see subset_weight).
    """
    if n < 2:
        raise DomainError(f"weyl_orbit_subsets needs N >= 2, got N={n}")
    if not 1 <= k <= n - 1:
        raise DomainError(f"orbit weight k must satisfy 1 <= k <= N-1, got k={k}")
    return list(combinations(range(1, n + 1), k))


def subset_weight(n: int, subset: Iterable[int]) -> WeightVector:
    """The orbit element sum_{i in S} e_i as a zero-sum WeightVector."""
    subset = set(subset)
    if not subset or not subset.issubset(range(1, n + 1)):
        raise DomainError(f"subset {sorted(subset)} not inside 1..{n}")
    coords = [Fraction(1) if i in subset else Fraction(0) for i in range(1, n + 1)]
    return WeightVector.from_e_coords(coords)


def fundamental_weight(n: int, k: int) -> WeightVector:
    """Fundamental weight lambda_k = e_1 + ... + e_k."""
    if not 1 <= k <= n - 1:
        raise DomainError(f"fundamental weight index k out of range: {k}")
    return subset_weight(n, range(1, k + 1))
