"""Independent brute-force spectral solvers for desk-scale validation.

Two mutually independent routes to the same spectra:

  * schrodinger_eigen_N2: the N = 2 operator in position space,
    -hbar^2 phi'' + 2 Lambda^2 cosh(x) phi = E phi, by symmetric second
    order finite differences with Dirichlet walls and Richardson
    extrapolation across two grids.  Quantization roots satisfy
    u_2 = -E_n.

  * difference_collocation_even: the difference operator
    2 Lambda^N cosh(hbar p) + V_N(y) on a periodic grid, with the
    imaginary shifts psi(y +- i hbar) realized exactly as Fourier
    multipliers e^(-+ hbar p).  Quantization prediction
    u_N = (-1)^(N+1) mu_n, i.e. u_N = -mu_n for even N.

Both are variational and self-adjoint, so eigenvalues are real and the
two oracles cross-validate each other at N = 2 where they describe the
same operator in Fourier-conjugate variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, OracleError
from .qfn import ModelParams

__all__ = [
    "GridSpec",
    "SpectraComparison",
    "schrodinger_eigen_N2",
    "difference_collocation_even",
    "compare_spectra",
    "potential_vn",
]

#: cosh overflow guard: hbar * p_max must stay below this.
COSH_GUARD = 40.0


@dataclass(frozen=True)
class GridSpec:
    """Box half-width and point count for the brute-force solvers."""

    box_half_width: float
    points: int

    def __post_init__(self):
        if not self.box_half_width > 0:
            raise DomainError("box_half_width must be positive")
        n = self.points
        if n < 64 or (n & (n - 1)) != 0:
            raise DomainError(
                f"points must be a power of two >= 64, got {n}"
            )


def potential_vn(params: ModelParams, y):
    """V_N(y) = y^N + sum_k (-1)^k u_k y^(N-k): the u_N-free part of t."""
    y = np.asarray(y, dtype=float)
    acc = np.ones_like(y)
    for m in range(1, params.n + 1):
        coeff = 0.0
        if 2 <= m <= params.n - 2:
            coeff = (-1.0) ** m * params.u[m - 2]
        acc = acc * y + coeff
    return acc


def _fd_levels(hbar, lambda_cpl, length, n, count):
    """Lowest Dirichlet eigenvalues on [-L, L] with n interior intervals."""
    h = 2.0 * length / n
    x = -length + h * np.arange(1, n)
    diag = 2.0 * hbar ** 2 / h ** 2 + 2.0 * lambda_cpl ** 2 * np.cosh(x)
    off = np.full(n - 2, -(hbar ** 2) / h ** 2)
    vals, vecs = scipy.linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(0, count - 1)
    )
    return vals, vecs, x


def _node_counts(vecs):
    counts = []
    for k in range(vecs.shape[1]):
        v = vecs[:, k]
        v = v[np.abs(v) > 1e-8 * np.abs(v).max()]
        counts.append(int(np.sum(v[1:] * v[:-1] < 0)))
    return counts


def schrodinger_eigen_N2(hbar: float, lambda_cpl: float, count: int,
                         grid: GridSpec | None = None) -> np.ndarray:
    """Lowest bound-state energies of -hbar^2 d^2/dx^2 + 2 Lambda^2 cosh x.

    Richardson extrapolation across grids (n, 2n) cancels the leading
    h^2 error of the second-order stencil.  The box is auto-enlarged (at
    most three times) until the potential wall comfortably exceeds the
    highest requested level, and the node counts 0, 1, 2, ... of the
    eigenvectors are verified as a Sturm-Liouville sanity check.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    if not (hbar > 0 and lambda_cpl > 0):
        raise DomainError("hbar and Lambda must be positive")
    if grid is None:
        # Harmonic estimate of the count-th level sets the starting box.
        e_top = 2.0 * lambda_cpl ** 2 + \
            hbar * lambda_cpl * np.sqrt(2.0) * (2.0 * count + 1.5)
        length = float(np.arccosh(max(3.0 * e_top, 20.0) /
                                  (2.0 * lambda_cpl ** 2)) + 2.0)
        length = max(length, 6.0)
        n = 2048
    else:
        length, n = grid.box_half_width, grid.points

    for _ in range(4):
        coarse, _, _ = _fd_levels(hbar, lambda_cpl, length, n, count)
        fine, vecs, _ = _fd_levels(hbar, lambda_cpl, length, 2 * n, count)
        wall = 2.0 * lambda_cpl ** 2 * np.cosh(0.85 * length)
        if wall > 2.0 * fine[-1] + 10.0 * hbar * lambda_cpl:
            nodes = _node_counts(vecs)
            if nodes != list(range(count)):
                raise OracleError(
                    f"node counts {nodes} are not 0..{count - 1}; "
                    "discretization too coarse"
                )
            return (4.0 * fine - coarse) / 3.0
        length *= 1.35
    raise OracleError(
        f"box still too small after 3 enlargements (L = {length:.3g})"
    )


def _collocation_levels(params, length, n, count):
    hbar = params.hbar
    p_max = hbar * np.pi * n / (2.0 * length)
    if p_max > COSH_GUARD:
        n_ok = int(2 ** np.floor(np.log2(COSH_GUARD * 2 * length /
                                         (np.pi * hbar))))
        raise OracleError(
            f"cosh overflow guard violated: hbar*pi*n/(2L) = {p_max:.1f} > "
            f"{COSH_GUARD}; try points <= {n_ok} or a larger box"
        )
    y = -length + (2.0 * length / n) * np.arange(n)
    freqs = np.fft.fftfreq(n, d=1.0 / n)  # integers -n/2 .. n/2-1
    p = np.pi * freqs / length
    multiplier = 2.0 * params.lambda_cpl ** params.n * np.cosh(hbar * p)
    col = np.fft.ifft(multiplier)
    if np.abs(col.imag).max() > 1e-9 * np.abs(col.real).max():
        raise OracleError("kinetic circulant is not real; multiplier broken")
    kin = scipy.linalg.circulant(col.real)
    mat = kin + np.diag(potential_vn(params, y))
    mat = 0.5 * (mat + mat.T)
    return scipy.linalg.eigh(mat, eigvals_only=True,
                             subset_by_index=(0, count - 1))


def difference_collocation_even(params: ModelParams, count: int,
                                grid: GridSpec | None = None) -> np.ndarray:
    """Lowest eigenvalues of 2 Lambda^N cosh(hbar p) + V_N(y), N even.

    The refinement check doubles points and box together (which keeps the
    momentum cutoff, and hence the cosh guard, unchanged); if the lowest
    eigenvalue moves by more than 1e-6 the result is rejected as
    spectrally polluted.
    """
    if params.n % 2 != 0:
        raise DomainError("collocation oracle requires even N")
    if count < 1:
        raise DomainError("count must be >= 1")
    if grid is None:
        grid = GridSpec(box_half_width=14.0 * params.hbar, points=128)
    length, n = grid.box_half_width, grid.points
    vals = _collocation_levels(params, length, n, count)
    check = _collocation_levels(params, 2.0 * length, 2 * n, count)
    if abs(vals[0] - check[0]) > 1e-6:
        raise OracleError(
            f"collocation not converged: mu_0 moved by "
            f"{abs(vals[0] - check[0]):.2e} under grid doubling"
        )
    return vals


@dataclass(frozen=True)
class SpectraComparison:
    """Greedy proximity matching report between two eigenvalue lists."""

    pairs: tuple            # (index_a, index_b, |a-b|)
    max_deviation: float
    unmatched_a: tuple
    unmatched_b: tuple
    tol: float

    @property
    def all_matched(self) -> bool:
        return not self.unmatched_a and not self.unmatched_b


def compare_spectra(a, b, tol: float) -> SpectraComparison:
    """Greedily match two spectra by proximity within tol."""
    a = list(np.asarray(a, dtype=float))
    b = list(np.asarray(b, dtype=float))
    free_b = set(range(len(b)))
    pairs = []
    unmatched_a = []
    for i, x in enumerate(a):
        best = None
        for j in free_b:
            d = abs(x - b[j])
            if d <= tol and (best is None or d < best[1]):
                best = (j, d)
        if best is None:
            unmatched_a.append(i)
        else:
            free_b.discard(best[0])
            pairs.append((i, best[0], best[1]))
    max_dev = max((d for _, _, d in pairs), default=0.0)
    return SpectraComparison(
        pairs=tuple(pairs),
        max_deviation=float(max_dev),
        unmatched_a=tuple(unmatched_a),
        unmatched_b=tuple(sorted(free_b)),
        tol=float(tol),
    )
