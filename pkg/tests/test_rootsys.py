"""Exact su(N) combinatorics: spec'd values and rational identities."""

from fractions import Fraction

import pytest

from toda_spectra.errors import DomainError
from toda_spectra.rootsys import (
    WeightVector,
    fundamental_weight,
    positive_roots,
    subset_weight,
    weight_dot,
    weyl_orbit_subsets,
    weyl_vector,
)


def basis_weight(n, i):
    """e_i as a zero-sum WeightVector."""
    coords = [0] * n
    coords[i - 1] = 1
    return WeightVector.from_e_coords(coords)


def test_weight_dot_fundamental_metric():
    e1 = basis_weight(4, 1)
    e2 = basis_weight(4, 2)
    assert weight_dot(e1, e1) == Fraction(3, 4)
    assert weight_dot(e1, e2) == Fraction(-1, 4)


def test_weight_dot_zero_vector():
    # sum_i e_i = 0, so it is the zero weight and all products vanish.
    for n in (2, 3, 5):
        zero = WeightVector.from_e_coords([1] * n)
        assert all(c == 0 for c in zero.coeffs)
        w = WeightVector.from_e_coords(range(n))
        assert weight_dot(zero, w) == 0


def test_weight_dot_dimension_mismatch():
    with pytest.raises(DomainError):
        weight_dot(basis_weight(3, 1), basis_weight(4, 1))


def test_positive_roots_counts_and_norms():
    assert len(positive_roots(2)) == 1
    assert len(positive_roots(4)) == 6
    a13 = positive_roots(3)[1]  # (k,l) lexicographic: (1,2), (1,3), (2,3)
    assert a13.coeffs == (Fraction(1), Fraction(0), Fraction(-1))
    assert weight_dot(a13, a13) == 2
    with pytest.raises(DomainError):
        positive_roots(1)


def test_weyl_vector_values_and_halved_root_sum():
    assert weyl_vector(4).coeffs == (
        Fraction(3, 2), Fraction(1, 2), Fraction(-1, 2), Fraction(-3, 2))
    assert weyl_vector(2).coeffs == (Fraction(1, 2), Fraction(-1, 2))
    for n in range(2, 11):
        total = positive_roots(n)[0]
        for a in positive_roots(n)[1:]:
            total = total + a
        assert total.scale(Fraction(1, 2)) == weyl_vector(n)


def test_orbit_subsets_counts_and_order():
    assert len(weyl_orbit_subsets(4, 2)) == 6
    assert len(weyl_orbit_subsets(5, 3)) == 10
    subsets = weyl_orbit_subsets(4, 2)
    assert subsets == sorted(subsets)
    assert subsets[0] == (1, 2)
    with pytest.raises(DomainError):
        weyl_orbit_subsets(4, 4)
    with pytest.raises(DomainError):
        weyl_orbit_subsets(4, 0)


def test_orbit_weight_dot_root_is_zero_or_pm_one():
    n_weight = subset_weight(3, (1, 2))
    alpha = positive_roots(3)[1]  # e1 - e3
    assert weight_dot(n_weight, alpha) == 1
    for n in range(2, 11):
        k = (n + 1) // 2
        roots = positive_roots(n)
        for subset in weyl_orbit_subsets(n, k):
            w = subset_weight(n, subset)
            for a in roots:
                assert weight_dot(w, a) ** 2 in (0, 1)


def test_sigma_dot_root_is_coordinate_difference():
    coords = [Fraction(3, 7), Fraction(-2, 7), Fraction(5, 7), Fraction(-6, 7)]
    sigma = WeightVector(4, tuple(coords))
    for idx, (k, l) in enumerate([(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]):
        alpha = positive_roots(4)[idx]
        assert weight_dot(sigma, alpha) == coords[k - 1] - coords[l - 1]


def test_rho_dot_orbit_weight_formula():
    # rho . n = M (N + 1) / 2 - sum(S); for N = 2M this is M(2M+1)/2 - sum(S).
    for n in range(2, 11):
        rho = weyl_vector(n)
        m = n // 2 if n % 2 == 0 else (n + 1) // 2
        for subset in weyl_orbit_subsets(n, m):
            expected = Fraction(m * (n + 1), 2) - sum(subset)
            assert weight_dot(rho, subset_weight(n, subset)) == expected


def test_fundamental_weight_is_prefix_subset():
    for n in (3, 6):
        for k in range(1, n):
            assert fundamental_weight(n, k) == subset_weight(n, range(1, k + 1))


def test_weight_vector_validation():
    with pytest.raises(DomainError):
        WeightVector(3, (Fraction(1), Fraction(0), Fraction(0)))
    with pytest.raises(DomainError):
        WeightVector(3, (Fraction(1), Fraction(-1)))
