"""Analytic kernel: spectral polynomial, Hill determinants, Q-functions.

The operator of order N is encoded by the monic polynomial

    t(lam) = lam^N + sum_{k=0}^{N-2} lam^k (-1)^(N-k) u_{N-k}
           = prod_k (lam - tau_k),

with u_1 = u_{N-1} = 0, so the roots tau_k sum to zero.  The semi-infinite
tridiagonal determinants

    K_s(lam) = det [ 1 on the diagonal, 1/t(lam + n*i*hbar*s) above,
                     Lambda^(2N)/t(lam + n*i*hbar*s) below ],   s = +1, -1,

satisfy the two-term recursion D_n = D_{n-1} - c_n D_{n-2} with
c_n = Lambda^(2N) / (t(lam + n*i*hbar*s) t(lam + (n-1)*i*hbar*s)) and
converge absolutely away from the pole lattice.  K_- is built directly
with downward shifts (s = -1); for real couplings this equals the
conjugate construction and for complex u_N it defines the analytic
continuation.

The Q-functions

    Q_+(lam) = (hbar/Lambda)^(+i N lam / hbar) e^(-N pi lam / hbar)
               K_+(lam) / prod_k Gamma(1 - (i/hbar)(lam - tau_k)),
    Q_-(lam) = (hbar/Lambda)^(-i N lam / hbar) e^(-N pi lam / hbar)
               K_-(lam) / prod_k Gamma(1 + (i/hbar)(lam - tau_k)),

both solve the second-order difference equation

    (i Lambda)^N Q(lam + i hbar) + (-i Lambda)^N Q(lam - i hbar) = t(lam) Q(lam),

and their quantum Wronskian W(lam) = Q_+(lam) Q_-(lam + i hbar)
- Q_-(lam) Q_+(lam + i hbar) obeys W(lam + i hbar) = (-1)^N W(lam).

All evaluators accept scalars or ndarrays of evaluation points; array
calls share one determinant recursion, which is what makes contour
scans affordable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DomainError,
    NearPoleError,
    NotConvergedError,
    RemovableSingularityError,
)
from .gammafn import cgamma

__all__ = [
    "ModelParams",
    "TruncationOpts",
    "HILL_ROW_CAP",
    "t_eval",
    "t_poly_coeffs",
    "tau_roots",
    "hill_determinant",
    "q_function",
    "quantum_wronskian",
    "baxter_residual",
]

#: Hard cap on determinant rows reached by adaptive doubling.
HILL_ROW_CAP = 4096


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the order-N operator.

    n          : order N >= 2
    hbar       : positive Planck-like scale (units of lam)
    lambda_cpl : positive coupling Lambda (units of lam)
    u          : real couplings (u_2, ..., u_{N-2}); empty for N <= 3
    u_n        : complex spectral parameter u_N
    """

    n: int
    hbar: float
    lambda_cpl: float
    u: tuple = ()
    u_n: complex = 0j

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"order N must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not self.hbar > 0:
            raise DomainError(f"hbar must be positive, got {self.hbar}")
        if not self.lambda_cpl > 0:
            raise DomainError(f"Lambda must be positive, got {self.lambda_cpl}")
        object.__setattr__(self, "hbar", float(self.hbar))
        object.__setattr__(self, "lambda_cpl", float(self.lambda_cpl))
        n_mid = max(0, self.n - 3)
        u = tuple(float(x) for x in self.u)
        if len(u) != n_mid:
            raise DomainError(
                f"expected {n_mid} middle couplings u_2..u_{{N-2}} for N={self.n}, "
                f"got {len(self.u)}"
            )
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "u_n", complex(self.u_n))

    def with_u_n(self, u_n) -> "ModelParams":
        return ModelParams(self.n, self.hbar, self.lambda_cpl, self.u, complex(u_n))


@dataclass(frozen=True)
class TruncationOpts:
    """Truncation and tolerance knobs for the infinite constructions.

    det_rows     : starting rows kept in K_pm (adaptively doubled to the cap)
    series_terms : starting Floquet window, terms with |n| <= series_terms
    tol_abs      : absolute guard (pole proximity, denominator floors)
    tol_rel      : relative convergence target of adaptive truncations
    """

    det_rows: int = 48
    series_terms: int = 24
    tol_abs: float = 1e-13
    tol_rel: float = 2e-11

    def __post_init__(self):
        if int(self.det_rows) != self.det_rows or self.det_rows < 8:
            raise DomainError(f"det_rows must be an integer >= 8, got {self.det_rows}")
        if int(self.series_terms) != self.series_terms or self.series_terms < 8:
            raise DomainError(
                f"series_terms must be an integer >= 8, got {self.series_terms}"
            )
        object.__setattr__(self, "det_rows", int(self.det_rows))
        object.__setattr__(self, "series_terms", int(self.series_terms))
        if not self.tol_abs > 0:
            raise DomainError("tol_abs must be positive")
        if not 0 < self.tol_rel < 1:
            raise DomainError("tol_rel must lie in (0, 1)")

    def doubled_rows(self) -> "TruncationOpts":
        return TruncationOpts(
            min(2 * self.det_rows, HILL_ROW_CAP),
            self.series_terms,
            self.tol_abs,
            self.tol_rel,
        )


@lru_cache(maxsize=512)
def _poly_coeffs_cached(params: ModelParams) -> tuple:
    n = params.n
    coeffs = [0j] * (n + 1)
    coeffs[0] = 1.0 + 0j
    for m in range(2, n - 1):
        coeffs[m] = (-1.0) ** m * params.u[m - 2]
    coeffs[n] = (-1.0) ** n * params.u_n
    return tuple(coeffs)


def t_poly_coeffs(params: ModelParams) -> np.ndarray:
    """Descending coefficients of t(lam); degree N, monic, no lam^(N-1) term."""
    return np.array(_poly_coeffs_cached(params), dtype=complex)


def t_eval(params: ModelParams, z):
    """Evaluate t(z) by Horner's rule; z may be a scalar or an ndarray."""
    coeffs = _poly_coeffs_cached(params)
    z = np.asarray(z, dtype=complex)
    acc = np.full_like(z, coeffs[0])
    for c in coeffs[1:]:
        acc = acc * z + c
    return acc[()] if acc.ndim == 0 else acc


@lru_cache(maxsize=512)
def _tau_roots_cached(params: ModelParams) -> np.ndarray:
    coeffs = np.array(_poly_coeffs_cached(params), dtype=complex)
    roots = np.roots(coeffs)
    # One Newton polish per root against the exact polynomial.
    dcoeffs = np.polyder(coeffs)
    val = np.polyval(coeffs, roots)
    der = np.polyval(dcoeffs, roots)
    safe = np.abs(der) > 0
    roots[safe] = roots[safe] - val[safe] / der[safe]
    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order]
    scale = max(np.max(np.abs(roots)), 1.0)
    if abs(np.sum(roots)) > 1e-12 * scale * params.n:
        raise NotConvergedError(
            f"tau roots failed the zero-sum check: sum = {np.sum(roots)}"
        )
    roots.setflags(write=False)
    return roots


def tau_roots(params: ModelParams) -> np.ndarray:
    """The N roots of t, sorted by (real, imag); their sum vanishes."""
    return _tau_roots_cached(params)


def tau_min_gap(params: ModelParams) -> float:
    """Smallest pairwise distance between roots of t, relative to max |tau|."""
    taus = tau_roots(params)
    if params.n == 1:
        return np.inf
    diffs = np.abs(taus[:, None] - taus[None, :])
    np.fill_diagonal(diffs, np.inf)
    return float(diffs.min() / max(np.max(np.abs(taus)), 1.0))


def _direction_sign(direction) -> int:
    if direction in ("+", +1):
        return 1
    if direction in ("-", -1):
        return -1
    raise DomainError(f"direction must be '+' or '-', got {direction!r}")


def _hill_kernel_impl(lam, coeffs, step, lam2n, m_start, m_cap, tol_abs,
                      tol_rel, tail_power):
    """Per-element adaptive determinant recursion (numba-compilable).

    Returns (values, err_estimates, bad_shift, bad_elem, nc_elem) where
    bad_shift >= 0 flags a near-pole row and nc_elem >= 0 flags an element
    that failed to converge at the row cap.
    """
    size = lam.size
    ncoef = coeffs.size
    out_v = np.empty(size, np.complex128)
    out_e = np.empty(size, np.float64)
    bad_shift = -1
    bad_elem = -1
    nc_elem = -1
    for b in range(size):
        z0 = lam[b]
        d_prev = 1.0 + 0j
        d_cur = 1.0 + 0j
        z = z0 + step
        t_prev = coeffs[0]
        for k in range(1, ncoef):
            t_prev = t_prev * z + coeffs[k]
        if abs(t_prev) < tol_abs:
            bad_shift = 1
            bad_elem = b
            out_v[b] = np.nan
            out_e[b] = np.nan
            continue
        target = m_start
        n = 2
        incr = 0j
        bad_here = False
        while True:
            while n <= target:
                z = z0 + step * n
                t_n = coeffs[0]
                for k in range(1, ncoef):
                    t_n = t_n * z + coeffs[k]
                if abs(t_n) < tol_abs:
                    bad_shift = n
                    bad_elem = b
                    bad_here = True
                    break
                c = lam2n / (t_n * t_prev)
                d_new = d_cur - c * d_prev
                incr = d_new - d_cur
                d_prev = d_cur
                d_cur = d_new
                t_prev = t_n
                n += 1
            if bad_here:
                out_v[b] = np.nan
                out_e[b] = np.nan
                break
            # Tail bound from the next off-diagonal product; the products
            # decay like n^(-2N), so the tail sum is about
            # |c_{M+1}| * (M+1) / (2N-1).
            z = z0 + step * (target + 1)
            t_nx = coeffs[0]
            for k in range(1, ncoef):
                t_nx = t_nx * z + coeffs[k]
            if abs(t_nx) < tol_abs:
                bad_shift = target + 1
                bad_elem = b
                out_v[b] = np.nan
                out_e[b] = np.nan
                break
            c_nx = lam2n / (t_nx * t_prev)
            tail = abs(c_nx) * abs(d_cur) * (target + 1) / tail_power * 1.5
            err = abs(incr) + tail
            den = abs(d_cur)
            if den < tol_abs:
                den = tol_abs
            if err <= tol_rel * den:
                out_v[b] = d_cur
                out_e[b] = err
                break
            if target >= m_cap:
                nc_elem = b
                out_v[b] = d_cur
                out_e[b] = err
                break
            target = 2 * target
            if target > m_cap:
                target = m_cap
    return out_v, out_e, bad_shift, bad_elem, nc_elem


def _hill_kernel_numpy(lam, coeffs, step, lam2n, m_start, m_cap, tol_abs,
                       tol_rel, tail_power):
    """Vectorized-over-lam fallback with whole-batch adaptive laddering."""

    def horner(z):
        acc = np.full_like(z, coeffs[0])
        for c in coeffs[1:]:
            acc = acc * z + c
        return acc

    d_prev = np.ones(lam.size, dtype=complex)
    d_cur = np.ones(lam.size, dtype=complex)
    incr = np.zeros(lam.size, dtype=complex)
    t_prev = horner(lam + step)
    low = np.abs(t_prev) < tol_abs
    if low.any():
        return d_cur, np.abs(incr), 1, int(np.flatnonzero(low)[0]), -1
    n = 2
    target = min(m_start, m_cap)
    while True:
        while n <= target:
            t_n = horner(lam + step * n)
            low = np.abs(t_n) < tol_abs
            if low.any():
                return d_cur, np.abs(incr), n, int(np.flatnonzero(low)[0]), -1
            c = lam2n / (t_n * t_prev)
            d_new = d_cur - c * d_prev
            incr = d_new - d_cur
            d_prev = d_cur
            d_cur = d_new
            t_prev = t_n
            n += 1
        t_nx = horner(lam + step * (target + 1))
        low = np.abs(t_nx) < tol_abs
        if low.any():
            return d_cur, np.abs(incr), target + 1, int(np.flatnonzero(low)[0]), -1
        c_nx = lam2n / (t_nx * t_prev)
        tail = np.abs(c_nx) * np.abs(d_cur) * (target + 1) / tail_power * 1.5
        err = np.abs(incr) + tail
        ok = err <= tol_rel * np.maximum(np.abs(d_cur), tol_abs)
        if ok.all():
            return d_cur, err, -1, -1, -1
        if target >= m_cap:
            worst = int(np.argmax(err / np.maximum(np.abs(d_cur), tol_abs)))
            return d_cur, err, -1, -1, worst
        target = min(2 * target, m_cap)


try:  # pragma: no cover - exercised indirectly
    from numba import njit as _njit

    _hill_kernel = _njit(cache=True)(_hill_kernel_impl)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _hill_kernel = _hill_kernel_numpy
    HAVE_NUMBA = False


def _hill_batch(params, lam, sign, opts):
    """Determinant recursion for a flat array of lam; returns (value, err)."""
    lam = np.ascontiguousarray(np.asarray(lam, dtype=complex).ravel())
    coeffs = np.array(_poly_coeffs_cached(params), dtype=np.complex128)
    step = complex(1j * params.hbar * sign)
    lam2n = float(params.lambda_cpl ** (2 * params.n))
    m_start = min(max(opts.det_rows, 8), HILL_ROW_CAP)
    vals, errs, bad_shift, bad_elem, nc_elem = _hill_kernel(
        lam, coeffs, step, lam2n, m_start, HILL_ROW_CAP,
        float(opts.tol_abs), float(opts.tol_rel), float(2 * params.n - 1),
    )
    if bad_shift >= 0:
        raise NearPoleError(
            f"shifted polynomial t(lam + {bad_shift}*i*hbar*s) vanishes within "
            f"tol_abs at lam = {lam[bad_elem]}",
            shift_index=int(bad_shift),
        )
    if nc_elem >= 0:
        raise NotConvergedError(
            f"Hill determinant not converged at the {HILL_ROW_CAP}-row cap "
            f"(err_est {errs[nc_elem]:.3e} at lam = {lam[nc_elem]})",
            suggestion="raise tol_rel or accept HILL_ROW_CAP truncation",
        )
    return vals, errs


def hill_determinant(params: ModelParams, lam, direction, opts: TruncationOpts):
    """Truncated K_pm(lam) with an error estimate.

    Runs the two-term recursion starting at det_rows rows and doubles
    adaptively until the increment-plus-tail estimate clears tol_rel, up
    to HILL_ROW_CAP.  Returns (value, err_est); array arguments give
    arrays back.
    """
    sign = _direction_sign(direction)
    lam_arr = np.asarray(lam, dtype=complex)
    vals, errs = _hill_batch(params, lam_arr, sign, opts)
    if lam_arr.ndim == 0:
        return vals[0], float(errs[0])
    return vals.reshape(lam_arr.shape), errs.reshape(lam_arr.shape)


def _q_batch(params, lam, sign, opts):
    """Q_pm on a flat lam array (sign +1 gives Q_+, -1 gives Q_-)."""
    lam = np.asarray(lam, dtype=complex).ravel()
    h = params.hbar
    taus = tau_roots(params)
    # Pole-lattice proximity: lam = tau_k - sign*n*i*hbar, n >= 1, is a
    # removable singularity of Q (K pole cancelling a Gamma pole).
    nu = (taus[None, :] - lam[:, None]) / (1j * h * sign)
    nearest = np.round(nu.real)
    dist = np.abs(nu - nearest) * h
    on_lattice = (nearest >= 1) & (dist < opts.tol_abs)
    if np.any(on_lattice):
        i, k = np.argwhere(on_lattice)[0]
        raise RemovableSingularityError(
            f"lam = {lam[i]} sits on the removable lattice tau_{k + 1} - "
            f"{int(nearest[i, k])}*i*hbar*({sign:+d}); offset lam by more than tol_abs"
        )
    kvals, _ = _hill_batch(params, lam, sign, opts)
    gargs = 1.0 - sign * 1j * (lam[:, None] - taus[None, :]) / h
    gprod = np.prod(cgamma(gargs), axis=1)
    log_scale = np.log(h / params.lambda_cpl)
    pref = np.exp(sign * (1j * params.n * lam / h) * log_scale
                  - params.n * np.pi * lam / h)
    return pref * kvals / gprod


def q_function(params: ModelParams, lam, direction, opts: TruncationOpts):
    """Entire Baxter solution Q_+ or Q_- at lam (scalar or ndarray)."""
    sign = _direction_sign(direction)
    lam_arr = np.asarray(lam, dtype=complex)
    q = _q_batch(params, lam_arr, sign, opts)
    return q[0] if lam_arr.ndim == 0 else q.reshape(lam_arr.shape)


def _wronskian_batch(params, lam, opts, with_scale=False):
    lam = np.asarray(lam, dtype=complex).ravel()
    h = params.hbar
    stacked = np.concatenate([lam, lam + 1j * h])
    qp = _q_batch(params, stacked, +1, opts)
    qm = _q_batch(params, stacked, -1, opts)
    m = lam.size
    term1 = qp[:m] * qm[m:]
    term2 = qm[:m] * qp[m:]
    w = term1 - term2
    if with_scale:
        return w, np.abs(term1) + np.abs(term2)
    return w


def quantum_wronskian(params: ModelParams, lam, opts: TruncationOpts):
    """W(lam) = Q_+(lam) Q_-(lam + i hbar) - Q_-(lam) Q_+(lam + i hbar)."""
    lam_arr = np.asarray(lam, dtype=complex)
    w = _wronskian_batch(params, lam_arr, opts)
    return w[0] if lam_arr.ndim == 0 else w.reshape(lam_arr.shape)


def baxter_residual(params: ModelParams, y, direction, opts: TruncationOpts):
    """Relative residual of the difference equation satisfied by Q_pm.

    |(i L)^N Q(y + i hbar) + (-i L)^N Q(y - i hbar) - t(y) Q(y)|
    normalized by max(|t(y) Q(y)|, tol_abs).
    """
    sign = _direction_sign(direction)
    y_arr = np.asarray(y, dtype=complex)
    flat = y_arr.ravel()
    h = params.hbar
    stacked = np.concatenate([flat + 1j * h, flat - 1j * h, flat])
    q = _q_batch(params, stacked, sign, opts)
    m = flat.size
    lam_n = params.lambda_cpl ** params.n
    lhs = (1j) ** params.n * lam_n * q[:m] + (-1j) ** params.n * lam_n * q[m:2 * m]
    rhs = t_eval(params, flat) * q[2 * m:]
    res = np.abs(lhs - rhs) / np.maximum(np.abs(rhs), opts.tol_abs)
    return float(res[0]) if y_arr.ndim == 0 else res.reshape(y_arr.shape)
