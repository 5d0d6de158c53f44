"""Floquet exponents, multipliers, and Floquet series evaluation.

The exponents sigma_j are recovered from the N zeros of the quantum
Wronskian W(lam) in the fundamental strip |Im lam| <= hbar/2 via
sigma_j = i lam_j / hbar.  Zeros are located by argument-principle
counting on a rectangle, adaptive subdivision until each cell isolates
one zero, and a safeguarded Newton polish; all contour work runs on the
scale-normalized Wronskian W / (|Q_+ Q_-'| + |Q_- Q_+'|) so magnitudes
stay O(1) across the rectangle.

The multipliers are zeta_j = Q_+(-i hbar sigma_j) / Q_-(-i hbar sigma_j),
with principal-branch representatives eta_j = log(zeta_j)/(2 pi i).  The
Floquet series

    F_j(z) = sum_n Q_s(-i hbar sigma_j - i hbar n) z^(sigma_j + n)

(s = + for the z = 0 basis, - for z = infinity) is evaluated from logz so
the branch of z^(sigma + n) is the caller's explicit choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateExponentsError,
    DomainError,
    MissedRootsError,
    MultiplierBlowupError,
    NotConvergedError,
    RemovableSingularityError,
    RootSearchError,
)
from .gammafn import cgamma
from .qfn import (
    ModelParams,
    TruncationOpts,
    _q_batch,
    _wronskian_batch,
    tau_roots,
)
from .rootsys import weyl_vector

__all__ = [
    "FloquetData",
    "locate_sigma",
    "multipliers",
    "eta_small_lambda",
    "floquet_series_eval",
]

_SERIES_CAP = 2048
_CONTOUR_CAP = 6000


@dataclass(frozen=True)
class FloquetData:
    """Floquet exponents and connection multipliers of one parameter point.

    sigma     : N exponents, |Re sigma_j| <= 1/2 up to a recorded shift,
                sorted by (Re, Im), sum an integer brought to 0
    zeta      : multipliers Q_+ / Q_- at the Wronskian zeros
    eta_rep   : principal representatives, zeta_j = e^(2 pi i eta_j)
    residuals : raw |W(-i hbar sigma_j)| after polishing
    scales    : local Wronskian scale |Q_+ Q_-'| + |Q_- Q_+'| per root
    opts_used : truncation options the data was computed with
    sum_shift : integer subtracted from one exponent to zero the sum
    """

    sigma: np.ndarray
    zeta: np.ndarray
    eta_rep: np.ndarray
    residuals: np.ndarray
    scales: np.ndarray
    opts_used: TruncationOpts
    sum_shift: int = 0
    shifted_index: int | None = None

    @property
    def n(self) -> int:
        return self.sigma.size

    @property
    def Sigma(self) -> np.ndarray:
        """Monodromy eigenvalues e^(2 pi i sigma_j)."""
        return np.exp(2j * np.pi * self.sigma)


class _ContourTrouble(Exception):
    """Internal: contour hit a near-zero or refinement cap; nudge and retry."""


def _w_norm_factory(params, opts):
    """Scale-normalized, phase-detwisted Wronskian for contour work.

    Dividing by the local scale keeps magnitudes O(1); multiplying by the
    pure phase e^(2 N pi i Im(lam) / hbar) cancels the global twist of the
    e^(-2 N pi lam / hbar) prefactor, which would otherwise wind the
    vertical contour edges N full turns.  Neither factor vanishes and both
    have zero net winding on closed contours, so zero counts are
    unaffected.  Newton must not use this (it needs the raw, locally
    linear function).
    """
    floor = 1e-300
    twist = 2.0 * params.n * np.pi / params.hbar

    def fun(pts):
        w, scale = _wronskian_batch(params, pts, opts, with_scale=True)
        return w / np.maximum(scale, floor) * np.exp(1j * twist * pts.imag)

    return fun


def _w_raw_factory(params, opts):
    def fun(pts, with_scale=False):
        return _wronskian_batch(params, pts, opts, with_scale=with_scale)

    return fun


def _eval_contour(fun, pts):
    try:
        return fun(pts)
    except RemovableSingularityError as exc:
        raise _ContourTrouble(f"contour point on pole lattice: {exc}")


def _refine_contour(fun, pts, vals, scale):
    """Insert midpoints until every complex-log step is small.

    Bounding |log(f_{k+1}/f_k)| (not just the phase step) makes silent
    2-pi phase aliasing near steep ramps essentially impossible: a fast
    phase always comes with a matching magnitude swing on the normalized
    Wronskian.
    """
    for _ in range(64):
        nxt_vals = np.roll(vals, -1)
        if not np.all(np.isfinite(vals)) or np.any(vals == 0):
            raise _ContourTrouble("Wronskian vanished or overflowed on contour")
        with np.errstate(invalid="ignore", over="ignore"):
            ratio = nxt_vals / vals
            log_steps = np.log(ratio)
        bad = np.abs(log_steps) > 0.8
        if not bad.any():
            return pts, vals, log_steps.imag
        if pts.size + int(bad.sum()) > _CONTOUR_CAP:
            raise _ContourTrouble("contour refinement cap exceeded")
        nxt_pts = np.roll(pts, -1)
        seg_len = np.abs(nxt_pts[bad] - pts[bad])
        if seg_len.min() < 1e-10 * scale:
            raise _ContourTrouble("a zero is pinned to the contour")
        mids = 0.5 * (pts[bad] + nxt_pts[bad])
        vmids = _eval_contour(fun, mids)
        where = np.flatnonzero(bad) + 1
        pts = np.insert(pts, where, mids)
        vals = np.insert(vals, where, vmids)
    raise _ContourTrouble("contour refinement did not settle in 64 rounds")


def _winding(fun, re_lo, re_hi, im_lo, im_hi, hbar):
    """Zero count of fun inside the rectangle by the argument principle."""
    corners = [
        complex(re_lo, im_lo),
        complex(re_hi, im_lo),
        complex(re_hi, im_hi),
        complex(re_lo, im_hi),
    ]
    pts = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        npts = max(8, int(np.ceil(abs(b - a) / (0.2 * hbar))))
        npts = min(npts, 160)
        seg = a + (b - a) * np.arange(npts) / npts
        pts.append(seg)
    pts = np.concatenate(pts)
    vals = _eval_contour(fun, pts)
    pts, vals, steps = _refine_contour(fun, pts, vals, hbar)
    total = steps.sum() / (2.0 * np.pi)
    count = int(np.round(total))
    if abs(total - count) > 0.2:
        raise _ContourTrouble(f"winding sum {total:.3f} is not close to an integer")
    return count


def _isolate_cells(fun, rect, count, hbar):
    """Subdivide until every cell holds one zero; returns list of cells."""
    singles = []
    stack = [(rect, count)]
    while stack:
        (re_lo, re_hi, im_lo, im_hi), cnt = stack.pop()
        if cnt == 0:
            continue
        width = re_hi - re_lo
        height = im_hi - im_lo
        diag = np.hypot(width, height)
        if cnt == 1 and diag <= 0.6 * hbar:
            singles.append((re_lo, re_hi, im_lo, im_hi))
            continue
        if cnt >= 2 and diag < 1e-5 * hbar:
            raise DegenerateExponentsError(
                f"{cnt} Wronskian zeros collide inside a cell of size {diag:.2e}"
            )
        # Zeros often sit exactly on symmetry axes, so scan several cut
        # fractions and both axes before giving up on this cell.
        fracs = (0.5, 0.422, 0.578, 0.467, 0.533, 0.381, 0.619, 0.44)
        attempts = [(width >= height, f) for f in fracs]
        attempts += [(width < height, f) for f in fracs[:4]]
        for cut_re, frac_try in attempts:
            if cut_re:
                mid = re_lo + frac_try * width
                cell_a = (re_lo, mid, im_lo, im_hi)
                cell_b = (mid, re_hi, im_lo, im_hi)
            else:
                mid = im_lo + frac_try * height
                cell_a = (re_lo, re_hi, im_lo, mid)
                cell_b = (re_lo, re_hi, mid, im_hi)
            try:
                cnt_a = _winding(fun, *cell_a, hbar)
            except _ContourTrouble:
                continue
            if 0 <= cnt_a <= cnt:
                break
        else:
            raise _ContourTrouble("could not split cell: zero pinned to every cut")
        stack.append((cell_a, cnt_a))
        stack.append((cell_b, cnt - cnt_a))
    return singles


def _newton_polish(wfun, seeds, boxes, hbar, max_iter=48):
    """Safeguarded batched Newton on the raw Wronskian.

    Each root is normalized by the constant local scale at its seed, so
    magnitudes stay O(1) without distorting the local linear behavior.
    """
    z = np.array(seeds, dtype=complex)
    try:
        _, scale0 = wfun(z, with_scale=True)
    except RemovableSingularityError:
        z = z + 1e-9 * hbar * (1.0 + 1.0j)
        _, scale0 = wfun(z, with_scale=True)
    scale0 = np.maximum(scale0, 1e-300)
    radius = np.array([0.75 * np.hypot(b[1] - b[0], b[3] - b[2]) + 0.05 * hbar
                       for b in boxes])
    centers = np.array([complex(0.5 * (b[0] + b[1]), 0.5 * (b[2] + b[3]))
                        for b in boxes])
    active = np.ones(z.size, dtype=bool)
    failed = np.zeros(z.size, dtype=bool)
    nudges = np.zeros(z.size, dtype=int)
    nudge = 3e-13 * hbar * (1.0 + 1.0j)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        h = 1e-6 * hbar * (1.0 + np.abs(z[idx]) / hbar)
        stacked = np.concatenate([z[idx], z[idx] + h, z[idx] - h])
        try:
            vals = wfun(stacked)
        except RemovableSingularityError:
            # An iterate landed on the pole lattice; nudge the active points.
            z[idx] += nudge
            nudges[idx] += 1
            give_up = idx[nudges[idx] > 3]
            failed[give_up] = True
            active[give_up] = False
            continue
        vals = vals / np.tile(scale0[idx], 3)
        m = idx.size
        f0, fp, fm = vals[:m], vals[m:2 * m], vals[2 * m:]
        der = (fp - fm) / (2.0 * h)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f0 / der
        bad = ~np.isfinite(step)
        if bad.any():
            # Non-finite values usually mean an exact lattice hit; nudge once.
            step[bad] = 0.0
            bad_idx = idx[bad]
            z[bad_idx] += nudge
            nudges[bad_idx] += 1
            give_up = bad_idx[nudges[bad_idx] > 3]
            failed[give_up] = True
            active[give_up] = False
        # Clamp runaway steps to the cell scale.
        too_big = np.abs(step) > 0.5 * hbar
        step[too_big] *= (0.5 * hbar) / np.abs(step[too_big])
        z[idx] = z[idx] - step
        strayed = np.abs(z[idx] - centers[idx]) > radius[idx]
        failed[idx[strayed]] = True
        active[idx[strayed]] = False
        done = np.abs(step) < 1e-13 * (hbar + np.abs(z[idx]))
        active[idx[done & ~strayed & ~bad]] = False
    failed |= active  # ran out of iterations
    return z, failed


def _locate_zeros(params, opts):
    """All Wronskian zeros in one fundamental strip of height hbar."""
    fun = _w_norm_factory(params, opts)
    wfun = _w_raw_factory(params, opts)
    h = params.hbar
    taus = tau_roots(params)
    radius = float(np.max(np.abs(taus))) if taus.size else 0.0
    r_width = max(1.5 * h, radius + 1.5 * h + params.lambda_cpl)
    n_target = params.n

    count = None
    last_err = None
    for enlarge in range(4):
        for nudge in range(6):
            # Vertical shift dodges zeros near the strip boundary; the
            # horizontal jitter breaks symmetry-axis pinning of the cuts.
            shift = h * nudge / 17.0
            jitter = r_width * nudge / 41.0
            re_lo, re_hi = -r_width + jitter, r_width + 1.31 * jitter
            im_lo, im_hi = -0.5 * h + shift, 0.5 * h + shift
            try:
                count = _winding(fun, re_lo, re_hi, im_lo, im_hi, h)
            except _ContourTrouble as exc:
                last_err = exc
                continue
            if count == n_target:
                try:
                    cells = _isolate_cells(
                        fun, (re_lo, re_hi, im_lo, im_hi), count, h
                    )
                    seeds = [complex(0.5 * (c[0] + c[1]), 0.5 * (c[2] + c[3]))
                             for c in cells]
                    zeros, failed = _newton_polish(wfun, seeds, cells, h)
                    if failed.any():
                        zeros, failed = _retry_from_taus(
                            params, wfun, zeros, failed, cells, h
                        )
                    if failed.any():
                        zeros = _bisect_fallback(fun, wfun, zeros, failed, cells, h)
                    return zeros
                except _ContourTrouble as exc:
                    last_err = exc
                    continue
            if count < n_target:
                break  # enlarge the rectangle
            raise MissedRootsError(
                f"winding count {count} exceeds N={n_target} on the strip "
                "rectangle; parameters look non-generic",
                count=count,
            )
        r_width *= 1.6
    raise MissedRootsError(
        f"found {count} of {n_target} Wronskian zeros after enlarging the "
        f"rectangle to |Re lam| <= {r_width:.3g}" +
        (f" (last contour issue: {last_err})" if last_err else ""),
        count=count,
    )


def _retry_from_taus(params, wfun, zeros, failed, cells, hbar):
    """Retry failed cells seeded from strip-projected roots of t.

    At small Lambda the Wronskian zeros sit exponentially close to the
    projected tau_k, where cell-center Newton has no gradient to follow.
    """
    taus = _to_strip(np.asarray(tau_roots(params), dtype=complex), hbar)
    retry_idx, retry_seeds = [], []
    for i in np.flatnonzero(failed):
        re_lo, re_hi, im_lo, im_hi = cells[i]
        inside = [t for t in taus
                  if re_lo <= t.real <= re_hi and im_lo <= t.imag <= im_hi]
        if inside:
            retry_idx.append(i)
            retry_seeds.append(inside[0] + 1e-8 * hbar * (1.0 + 1.0j))
    if retry_idx:
        z2, f2 = _newton_polish(
            wfun, retry_seeds, [cells[i] for i in retry_idx], hbar, max_iter=64
        )
        zeros = zeros.copy()
        failed = failed.copy()
        for k, i in enumerate(retry_idx):
            if not f2[k]:
                zeros[i] = z2[k]
                failed[i] = False
    return zeros, failed


def _bisect_fallback(fun, wfun, zeros, failed, cells, hbar):
    """Re-subdivide cells whose Newton run failed; one retry each."""
    zeros = zeros.copy()
    for i in np.flatnonzero(failed):
        try:
            subcells = _isolate_cells(fun, cells[i], 1, 0.25 * hbar)
        except _ContourTrouble as exc:
            raise RootSearchError(
                f"Newton failed and cell re-subdivision hit contour trouble: {exc}"
            )
        seeds = [complex(0.5 * (c[0] + c[1]), 0.5 * (c[2] + c[3]))
                 for c in subcells]
        z, bad = _newton_polish(wfun, seeds, subcells, hbar, max_iter=64)
        if bad.any():
            raise RootSearchError(
                f"Newton polish failed twice inside cell {cells[i]}"
            )
        zeros[i] = z[0]
    return zeros


def _to_strip(lam, hbar):
    """Canonical representative with Im lam in (-hbar/2, +hbar/2]."""
    k = np.floor(lam.imag / hbar + 0.5)
    return lam - 1j * hbar * k


def _warm_polish(params, seed_sigma, opts):
    """Polish seeds from a previous parameter point; None if unusable."""
    h = params.hbar
    wfun = _w_raw_factory(params, opts)
    seeds = -1j * h * np.asarray(seed_sigma, dtype=complex)
    boxes = [(z.real - 0.3 * h, z.real + 0.3 * h, z.imag - 0.3 * h, z.imag + 0.3 * h)
             for z in seeds]
    try:
        zeros, failed = _newton_polish(wfun, seeds, boxes, h)
    except (NotConvergedError, _ContourTrouble, RemovableSingularityError):
        return None
    if failed.any():
        return None
    zeros = _to_strip(zeros, h)
    gaps = np.abs(zeros[:, None] - zeros[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() < 1e-8 * h:
        return None
    return zeros


def locate_sigma(params: ModelParams, opts: TruncationOpts | None = None,
                 seed_sigma=None) -> FloquetData:
    """Floquet exponents and multipliers from the quantum Wronskian zeros.

    With seed_sigma (exponents of a nearby parameter point) a cheap warm
    Newton polish is tried first; the full argument-principle search runs
    whenever the warm result is missing, collided, or inconsistent.
    """
    opts = opts if opts is not None else TruncationOpts()
    h = params.hbar
    zeros = None
    if seed_sigma is not None and len(seed_sigma) == params.n:
        zeros = _warm_polish(params, seed_sigma, opts)
    if zeros is None:
        zeros = _locate_zeros(params, opts)
        zeros = _to_strip(np.asarray(zeros), h)

    sigma = 1j * zeros / h
    gaps = np.abs(sigma[:, None] - sigma[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() <= opts.tol_rel:
        raise DegenerateExponentsError(
            f"Floquet exponents collide (min gap {gaps.min():.3e}); "
            "monodromy would be non-diagonalizable"
        )

    total = np.sum(sigma)
    shift = int(np.round(total.real))
    if abs(total - shift) > 1e-9:
        raise MissedRootsError(
            f"exponent sum {total} is not an integer within 1e-9; "
            "zeros were likely missed",
            count=params.n,
        )
    shifted_index = None
    if shift != 0:
        shifted_index = int(np.argmax(np.abs(sigma.real)))
        sigma = sigma.copy()
        sigma[shifted_index] -= shift

    order = np.lexsort((sigma.imag, sigma.real))
    sigma = sigma[order]

    zeta, eta = multipliers(params, sigma, opts)
    lam = -1j * h * sigma
    w, scale = _wronskian_batch(params, lam, opts, with_scale=True)
    for arr in (sigma, zeta, eta, w, scale):
        arr.setflags(write=False)
    return FloquetData(
        sigma=sigma,
        zeta=zeta,
        eta_rep=eta,
        residuals=np.abs(w),
        scales=scale,
        opts_used=opts,
        sum_shift=shift,
        shifted_index=shifted_index,
    )


def multipliers(params: ModelParams, sigma, opts: TruncationOpts):
    """Multipliers zeta_j = Q_+(-i hbar sigma_j) / Q_-(-i hbar sigma_j).

    Also returns principal representatives eta_j = log(zeta_j) / (2 pi i)
    with Re eta_j in (-1/2, 1/2].  No zero-sum enforcement is applied to
    eta; downstream formulas consume zeta only.
    """
    sigma = np.asarray(sigma, dtype=complex)
    lam = -1j * params.hbar * sigma
    qp = _q_batch(params, lam, +1, opts)
    qm = _q_batch(params, lam, -1, opts)
    tiny = np.abs(qm) < opts.tol_abs * (np.abs(qp) + np.abs(qm))
    if np.any(tiny):
        j = int(np.argwhere(tiny)[0])
        raise MultiplierBlowupError(
            f"Q_- vanishes at sigma_{j + 1} = {sigma[j]}; multiplier diverges "
            "(on-shell eta divergence nearby)"
        )
    zeta = qp / qm
    eta = np.log(zeta) / (2j * np.pi)
    return zeta, eta


def eta_small_lambda(params: ModelParams, sigma) -> np.ndarray:
    """Leading small-Lambda connection representatives from the one-loop sum.

    Componentwise over positive roots alpha, with a = -i hbar sigma:

        2 pi i eta = - sum_alpha [ i pi/2 + 2 i (alpha.a/hbar) log(Lambda/hbar)
                      + log Gamma(1 - i alpha.a/hbar)
                      - log Gamma(1 + i alpha.a/hbar) ] alpha + i pi rho,

    truncated at O(Lambda^N).  Meaningful for Lambda/hbar << 1.
    """
    sigma = np.asarray(sigma, dtype=complex)
    n = params.n
    if sigma.size != n:
        raise DomainError(f"expected {n} exponents, got {sigma.size}")
    h = params.hbar
    a = -1j * h * sigma
    log_l = np.log(params.lambda_cpl / h)
    acc = np.zeros(n, dtype=complex)
    for k in range(n):
        for l in range(k + 1, n):
            x = (a[k] - a[l]) / h
            g_minus = cgamma(1.0 - 1j * x)
            g_plus = cgamma(1.0 + 1j * x)
            if not (np.isfinite(g_minus) and np.isfinite(g_plus)) or \
                    g_minus == 0 or g_plus == 0:
                raise DomainError(
                    f"Gamma pole at alpha.a/hbar = {x} for root pair ({k+1},{l+1})"
                )
            term = 0.5j * np.pi + 2j * x * log_l + np.log(g_minus) - np.log(g_plus)
            acc[k] -= term
            acc[l] += term
    rho = weyl_vector(n).as_floats()
    return acc / (2j * np.pi) + 0.5 * rho


def floquet_series_eval(params: ModelParams, fd: FloquetData, j: int, which,
                        logz, opts: TruncationOpts | None = None) -> complex:
    """Truncated Floquet series at the point z = exp(logz).

    which = 0 sums Q_+ coefficients (the z -> 0 basis), which = "inf"
    (or numpy.inf) sums Q_- coefficients.  The window |n| <= series_terms
    grows adaptively until the edge terms fall below tol_rel of the
    partial sum.
    """
    opts = opts if opts is not None else fd.opts_used
    if not 0 <= j < fd.n:
        raise DomainError(f"basis index j out of range: {j}")
    if which in (0, "0"):
        sign = +1
    elif which in ("inf", np.inf, float("inf")):
        sign = -1
    else:
        raise DomainError(f"which must be 0 or 'inf', got {which!r}")
    sig = fd.sigma[j]
    zeta_j = fd.zeta[j]
    h = params.hbar
    logz = complex(logz)
    m = max(8, opts.series_terms)
    while True:
        ns = np.arange(-m, m + 1)
        lam = -1j * h * (sig + ns)
        # Each determinant direction loses accuracy on the far side of the
        # lattice (the minimal solution is swamped by rounding); there the
        # on-shell identity Q_+ = zeta Q_- evaluates the same coefficient
        # through the stable direction.  The switch at |n| = 2 leaves an
        # independently evaluated overlap for the ratio identity to test.
        q = np.empty(ns.size, dtype=complex)
        if sign > 0:
            safe = ns <= 2
            q[safe] = _q_batch(params, lam[safe], +1, opts)
            q[~safe] = zeta_j * _q_batch(params, lam[~safe], -1, opts)
        else:
            safe = ns >= -2
            q[safe] = _q_batch(params, lam[safe], -1, opts)
            q[~safe] = _q_batch(params, lam[~safe], +1, opts) / zeta_j
        with np.errstate(over="ignore", under="ignore"):
            terms = q * np.exp((sig + ns) * logz)
        if not np.all(np.isfinite(terms)):
            raise NotConvergedError(
                "Floquet series terms overflowed; reduce |Re logz| or Lambda"
            )
        # Deterministic small-to-large accumulation.
        order = np.argsort(np.abs(terms), kind="stable")
        total = complex(np.sum(terms[order]))
        edge = max(abs(terms[0]), abs(terms[-1]))
        # Second disjunct: near a zero of the series the partial sum
        # cancels, but edge terms below the rounding floor of the largest
        # term cannot change the value any further.
        peak = float(np.max(np.abs(terms)))
        if edge <= opts.tol_rel * max(abs(total), opts.tol_abs) or \
                edge <= 1e-17 * peak:
            return total
        if m >= _SERIES_CAP:
            raise NotConvergedError(
                f"Floquet series did not converge by |n| = {m}; largest term "
                f"at n = {int(ns[np.argmax(np.abs(terms))])}"
            )
        m = min(2 * m, _SERIES_CAP)
