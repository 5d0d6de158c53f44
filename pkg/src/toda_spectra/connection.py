"""Connection matrix assembly and Weyl-orbit quantization conditions.

The two Floquet-normalized solution bases at the punctures are related by
E = V^-1 T V with T = diag(zeta_1, ..., zeta_N) and V the Vandermonde
matrix V_ij = Sigma_i^(j-1) in the monodromy eigenvalues
Sigma_j = e^(2 pi i sigma_j).  The quantization conditions are the
vanishing of the bottom-left M x M minor of E (M = ceil(N/2)), which this
module computes by three independent routes:

  * minor_det_direct     - pivoted LU on the assembled minor,
  * minor_det_subset_sum - the sign-free subset expansion
        det E[bl] = sum_{|S|=M} prod_{i in S} zeta_i
                    prod_{i in S, j not in S} 1 / (Sigma_i - Sigma_j),
  * qc_value             - the Weyl-orbit sum over subsets S with
        numerator exp(i pi (+-2 eta - rho [+ sigma]) . n) and denominator
        prod_alpha (2 sin(pi sigma . alpha))^((n . alpha)^2).

Their mutual agreement on zero-sum data is the numerical content of the
quantization theorem and is exercised heavily by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMonodromyError, DomainError, ResonantDenominatorError
from .rootsys import weyl_orbit_subsets

__all__ = [
    "ConnectionData",
    "build_connection",
    "minor_det_direct",
    "minor_det_subset_sum",
    "qc_value",
    "QC_CASES",
]

QC_CASES = ("even", "odd_case1", "odd_case2")


@dataclass(frozen=True)
class ConnectionData:
    """Connection matrix E = V^-1 T V together with conditioning data."""

    Sigma: np.ndarray
    zeta: np.ndarray
    E: np.ndarray
    cond_V: float
    residual: float
    warnings: tuple = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return self.Sigma.size


def _kahan_sum(terms):
    """Compensated complex summation in the given (deterministic) order."""
    total = 0j
    comp = 0j
    for t in terms:
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total


def build_connection(Sigma, zeta, tol_abs: float = 1e-12) -> ConnectionData:
    """Solve V E = T V column by column (no explicit Vandermonde inverse)."""
    Sigma = np.asarray(Sigma, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    if Sigma.ndim != 1 or Sigma.shape != zeta.shape:
        raise DomainError("Sigma and zeta must be 1-d arrays of equal length")
    n = Sigma.size
    if n < 2:
        raise DomainError("need at least two monodromy eigenvalues")
    gaps = np.abs(Sigma[:, None] - Sigma[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() <= tol_abs:
        i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        raise DegenerateMonodromyError(
            f"monodromy eigenvalues {i + 1} and {j + 1} coincide within tol_abs "
            f"(gap {gaps.min():.3e})"
        )
    vand = np.vander(Sigma, n, increasing=True)  # V_ij = Sigma_i^(j-1)
    tv = zeta[:, None] * vand
    e_mat = np.linalg.solve(vand, tv)
    cond = float(np.linalg.cond(vand))
    residual = float(
        np.linalg.norm(vand @ e_mat - tv) / max(np.linalg.norm(tv), tol_abs)
    )
    warnings = ()
    if cond > 1e12:
        warnings = (f"Vandermonde condition estimate {cond:.3e} exceeds 1e12",)
    e_mat.setflags(write=False)
    Sigma = Sigma.copy()
    Sigma.setflags(write=False)
    zeta = zeta.copy()
    zeta.setflags(write=False)
    return ConnectionData(Sigma, zeta, e_mat, cond, residual, warnings)


def minor_det_direct(cd: ConnectionData, m: int) -> complex:
    """Determinant of the bottom-left m x m block of E via pivoted LU."""
    n = cd.n
    if not 1 <= m <= n:
        raise DomainError(f"minor size must satisfy 1 <= M <= N, got M={m}")
    block = cd.E[n - m:, :m]
    return complex(np.linalg.det(block))


def minor_det_subset_sum(Sigma, zeta, m: int, tol_abs: float = 1e-12) -> complex:
    """Sign-free subset expansion of the bottom-left minor determinant."""
    Sigma = np.asarray(Sigma, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    n = Sigma.size
    if not 1 <= m <= n:
        raise DomainError(f"minor size must satisfy 1 <= M <= N, got M={m}")
    gaps = np.abs(Sigma[:, None] - Sigma[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() <= tol_abs:
        raise DegenerateMonodromyError(
            f"monodromy eigenvalues coincide within tol_abs (gap {gaps.min():.3e})"
        )
    if m == n:
        return complex(np.prod(zeta))
    diff = Sigma[:, None] - Sigma[None, :]
    terms = []
    for subset in weyl_orbit_subsets(n, m):
        idx = np.array(subset) - 1
        mask = np.zeros(n, dtype=bool)
        mask[idx] = True
        num = np.prod(zeta[idx])
        den = np.prod(diff[np.ix_(mask, ~mask)])
        terms.append(num / den)
    return _kahan_sum(terms)


def qc_value(sigma, zeta, case: str, tol_abs: float = 1e-12) -> complex:
    """Weyl-orbit quantization sum for the given parity case.

    The orbit weight is k = N/2 (case "even") or k = (N+1)/2 (odd cases);
    eta enters only through zeta_i = e^(2 pi i eta_i), because
    e^(2 pi i eta . n) = prod_{i in S} zeta_i for the orbit element n <-> S,
    so no eta branch choice is ever needed.  Case "odd_case2" is
    "odd_case1" with zeta -> 1/zeta.
    """
    sigma = np.asarray(sigma, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    if sigma.ndim != 1 or sigma.shape != zeta.shape:
        raise DomainError("sigma and zeta must be 1-d arrays of equal length")
    n = sigma.size
    if case not in QC_CASES:
        raise DomainError(f"case must be one of {QC_CASES}, got {case!r}")
    if case == "even":
        if n % 2 != 0:
            raise DomainError("case 'even' requires even N")
        m = n // 2
    else:
        if n % 2 != 1:
            raise DomainError(f"case {case!r} requires odd N")
        m = (n + 1) // 2
    sig_sum = np.sum(sigma)
    if abs(sig_sum) > 1e-9:
        raise DomainError(
            f"sigma must sum to zero within 1e-9, got sum = {sig_sum}"
        )

    # 2 sin(pi sigma . alpha) for every positive root alpha = e_i - e_j, i < j.
    sindiff = 2.0 * np.sin(np.pi * (sigma[:, None] - sigma[None, :]))
    iu, ju = np.triu_indices(n, k=1)
    small = np.abs(sindiff[iu, ju]) < tol_abs
    if np.any(small):
        which = int(np.argwhere(small)[0])
        raise ResonantDenominatorError(
            f"sin(pi (sigma_{iu[which] + 1} - sigma_{ju[which] + 1})) vanishes "
            "within tol_abs; exponents collide modulo 1"
        )

    # Exact phase of e^(-i pi rho . n): rho . n = M (N + 1)/2 - sum(S).
    base_phase = (1, -1j, -1, 1j)[(m * (n + 1)) % 4]
    zeta_eff = zeta if case != "odd_case2" else 1.0 / zeta
    odd = case != "even"

    terms = []
    for subset in weyl_orbit_subsets(n, m):
        idx = np.array(subset) - 1
        mask = np.zeros(n, dtype=bool)
        mask[idx] = True
        num = np.prod(zeta_eff[idx]) * base_phase * (-1.0) ** (sum(subset) % 2)
        if odd:
            num = num * np.exp(1j * np.pi * np.sum(sigma[idx]))
        den = _split_pair_product(sindiff, mask)
        terms.append(num / den)
    return _kahan_sum(terms)


def _split_pair_product(sindiff, mask):
    """Product of 2 sin(pi(sigma_i - sigma_j)) over pairs i < j split by S."""
    n = mask.size
    prod = 1.0 + 0j
    for i in range(n):
        for j in range(i + 1, n):
            if mask[i] != mask[j]:
                prod = prod * sindiff[i, j]
    return prod
