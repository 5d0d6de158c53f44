"""Location of quantization roots in the spectral parameter u_N.

For even N the quantization condition is real-analytic along real u_N
(bound states); a real scan brackets sign changes of Re(qc) and local
minima of |qc|, and a complex Newton iteration refines each candidate.
For odd N (resonances) a coarse rectangular grid over the expected
half-plane supplies seeds: Im u_N > 0 for "odd_case1", mirrored for
"odd_case2".  Those half-plane defaults are heuristics (no a priori
localization of resonances is available) and are user-overridable.

Every accepted root is re-solved with doubled determinant rows; roots
that move more than 1e-7 (1 + |u_N|) are reported separately as suspect.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .connection import qc_value
from .errors import DomainError, RootSearchError, TodaSpectraError
from .floquet import locate_sigma
from .qfn import ModelParams, TruncationOpts

__all__ = [
    "RootRecord",
    "SpectrumResult",
    "quantization_function",
    "scan_real",
    "refine_root",
    "spectrum_list",
]

_NEWTON_CAP = 50
_DEDUPE_REL = 1e-7
_STABLE_REL = 1e-7


@dataclass(frozen=True)
class RootRecord:
    """One located quantization root."""

    u_n: complex
    qc_abs: float
    refinement_steps: int
    truncation_stability: float
    warnings: tuple = ()


@dataclass(frozen=True)
class SpectrumResult:
    """Roots, suspects, candidates, and the scan grid that produced them."""

    case: str
    roots: tuple = ()
    suspect: tuple = ()
    candidates: tuple = ()
    scan_diag: tuple = ()   # (u_N sample, qc value or None on failure)
    gaps: tuple = ()        # scan samples skipped after one subdivision

    def root_values(self) -> np.ndarray:
        return np.array([r.u_n for r in self.roots], dtype=complex)


def _case_for(params: ModelParams, case: str) -> str:
    if case == "even" and params.n % 2 != 0:
        raise DomainError("case 'even' requires even N")
    if case in ("odd_case1", "odd_case2") and params.n % 2 != 1:
        raise DomainError(f"case {case!r} requires odd N")
    return case


def _qc_with_data(base, u_n, case, opts, seed_sigma=None):
    params = base.with_u_n(u_n)
    try:
        fd = locate_sigma(params, opts, seed_sigma=seed_sigma)
        qc = qc_value(fd.sigma, fd.zeta, case, tol_abs=opts.tol_abs)
    except TodaSpectraError as exc:
        raise type(exc)(f"at u_N = {complex(u_n)}: {exc}") from exc
    return qc, fd


def quantization_function(base: ModelParams, u_n, case: str,
                          opts: TruncationOpts | None = None,
                          seed_sigma=None) -> complex:
    """Weyl-orbit quantization value at spectral parameter u_N.

    Composes the Wronskian root search, the multipliers, and the orbit
    sum of the requested parity case; deterministic for fixed opts.
    """
    opts = opts if opts is not None else TruncationOpts()
    _case_for(base, case)
    qc, _ = _qc_with_data(base, u_n, case, opts)
    return qc


def scan_real(base: ModelParams, window, steps: int, case: str = "even",
              opts: TruncationOpts | None = None) -> SpectrumResult:
    """Sample qc on a real u_N grid and emit candidate seeds.

    Candidates are midpoints of sign changes of Re(qc) (where Im(qc) is
    comparatively small) plus strict local minima of |qc|.  Failing grid
    points are subdivided once, then skipped with a logged gap.
    """
    opts = opts if opts is not None else TruncationOpts()
    _case_for(base, case)
    u_lo, u_hi = float(window[0]), float(window[1])
    if not u_lo < u_hi:
        raise DomainError(f"scan window must have u_lo < u_hi, got {window}")
    if steps < 2:
        raise DomainError("scan needs at least 2 steps")
    grid = np.linspace(u_lo, u_hi, steps)
    values: list = []
    gaps = []
    seed = None
    for u in grid:
        qc = None
        for attempt, uu in enumerate((u, u + 0.25 * (u_hi - u_lo) / steps)):
            try:
                qc, fd = _qc_with_data(base, uu, case, opts, seed_sigma=seed)
                seed = fd.sigma
                values.append((complex(uu), complex(qc)))
                break
            except TodaSpectraError:
                if attempt == 1:
                    gaps.append(complex(u))
                    values.append((complex(u), None))
    candidates = _candidates_from_scan(values)
    return SpectrumResult(
        case=case,
        candidates=tuple(candidates),
        scan_diag=tuple(values),
        gaps=tuple(gaps),
    )


def _candidates_from_scan(values):
    good = [(u, qc) for u, qc in values if qc is not None]
    cands = []
    for (u1, q1), (u2, q2) in zip(good, good[1:]):
        re_flip = np.real(q1) * np.real(q2) < 0
        im_small = (abs(np.imag(q1)) <= 0.2 * abs(q1) + 1e-300
                    and abs(np.imag(q2)) <= 0.2 * abs(q2) + 1e-300)
        if re_flip and im_small:
            cands.append(0.5 * (u1 + u2))
    for (u1, q1), (u2, q2), (u3, q3) in zip(good, good[1:], good[2:]):
        if abs(q2) < abs(q1) and abs(q2) < abs(q3):
            cands.append(u2)
    # Merge near-duplicates (sign change plus minimum at the same spot).
    if not good:
        return []
    spacing = abs(good[-1][0] - good[0][0]) / max(len(good) - 1, 1)
    merged: list = []
    for c in sorted(cands, key=lambda z: (z.real, z.imag)):
        if not merged or abs(c - merged[-1]) > 1.5 * spacing:
            merged.append(c)
    return merged


def refine_root(base: ModelParams, seed, case: str,
                opts: TruncationOpts | None = None,
                seed_sigma=None) -> RootRecord:
    """Complex Newton on the analytic map u_N -> qc, from a scan seed.

    The derivative is a central difference with step 1e-6 (1 + |u_N|);
    convergence requires |du_N| < 1e-10 (1 + |u_N|).  The accepted root is
    re-refined with doubled determinant rows and the displacement is
    recorded as truncation_stability.
    """
    opts = opts if opts is not None else TruncationOpts()
    _case_for(base, case)
    u, steps, sigma = _newton_u(base, complex(seed), case, opts, seed_sigma)
    qc, fd = _qc_with_data(base, u, case, opts, seed_sigma=sigma)
    u2, _, _ = _newton_u(base, u, case, opts.doubled_rows(), fd.sigma,
                         max_iter=8)
    stability = abs(u2 - u)
    warnings = ()
    if case == "odd_case1" and u.imag <= 0:
        warnings = ("root left the Im u_N > 0 half-plane expected for case 1",)
    elif case == "odd_case2" and u.imag >= 0:
        warnings = ("root left the Im u_N < 0 half-plane expected for case 2",)
    return RootRecord(
        u_n=u,
        qc_abs=abs(qc),
        refinement_steps=steps,
        truncation_stability=stability,
        warnings=warnings,
    )


def _newton_u(base, u, case, opts, seed_sigma, max_iter=_NEWTON_CAP):
    trajectory = [u]
    sigma = seed_sigma
    for it in range(1, max_iter + 1):
        h = 1e-6 * (1.0 + abs(u))
        f0, fd = _qc_with_data(base, u, case, opts, seed_sigma=sigma)
        sigma = fd.sigma
        fp, _ = _qc_with_data(base, u + h, case, opts, seed_sigma=sigma)
        fm, _ = _qc_with_data(base, u - h, case, opts, seed_sigma=sigma)
        der = (fp - fm) / (2.0 * h)
        if der == 0 or not np.isfinite(der):
            raise RootSearchError(
                f"vanishing qc derivative at u_N = {u}", trajectory=trajectory
            )
        du = f0 / der
        u = u - du
        trajectory.append(u)
        if abs(du) < 1e-10 * (1.0 + abs(u)):
            return u, it, sigma
    raise RootSearchError(
        f"no convergence after {max_iter} Newton steps from {trajectory[0]}",
        trajectory=trajectory,
    )


def _dedupe(records):
    kept: list = []
    for rec in sorted(records, key=lambda r: (r.u_n.real, r.u_n.imag)):
        if any(abs(rec.u_n - k.u_n) < _DEDUPE_REL * (1.0 + abs(k.u_n))
               for k in kept):
            continue
        kept.append(rec)
    return kept


def spectrum_list(base: ModelParams, case: str, window, steps: int = 120,
                  im_max: float | None = None,
                  opts: TruncationOpts | None = None) -> SpectrumResult:
    """Scan, refine, deduplicate, and stability-filter quantization roots.

    window gives the Re u_N range.  For odd cases the search rectangle is
    window x (0, im_max] (case 1) or its mirror image (case 2), with
    im_max defaulting to half the window width; this localization is a
    documented heuristic.
    """
    opts = opts if opts is not None else TruncationOpts()
    _case_for(base, case)
    if case == "even":
        scan = scan_real(base, window, steps, case, opts)
        seeds = scan.candidates
    else:
        scan, seeds = _scan_odd(base, case, window, steps, im_max, opts)
    records = []
    for seed in seeds:
        try:
            records.append(refine_root(base, seed, case, opts))
        except TodaSpectraError:
            continue
    records = _dedupe(records)
    in_window = [r for r in records
                 if window[0] - 1e-9 <= r.u_n.real <= window[1] + 1e-9]
    stable, suspect = [], []
    for rec in in_window:
        if rec.truncation_stability < _STABLE_REL * (1.0 + abs(rec.u_n)):
            stable.append(rec)
        else:
            suspect.append(rec)
    return replace(
        scan,
        roots=tuple(stable),
        suspect=tuple(suspect),
        candidates=tuple(seeds),
    )


def _scan_odd(base, case, window, steps, im_max, opts):
    u_lo, u_hi = float(window[0]), float(window[1])
    if not u_lo < u_hi:
        raise DomainError(f"scan window must have u_lo < u_hi, got {window}")
    if im_max is None:
        im_max = 0.5 * (u_hi - u_lo)
    if not im_max > 0:
        raise DomainError("im_max must be positive")
    sign = +1.0 if case == "odd_case1" else -1.0
    n_re = max(int(steps), 8)
    n_im = max(int(np.ceil(steps / 3)), 6)
    res = np.linspace(u_lo, u_hi, n_re)
    ims = sign * np.linspace(im_max / n_im, im_max, n_im)
    mag = np.full((n_im, n_re), np.nan)
    values = []
    gaps = []
    seed_row = None
    for i, im in enumerate(ims):
        seed = seed_row
        for j, re in enumerate(res):
            u = complex(re, im)
            try:
                qc, fd = _qc_with_data(base, u, case, opts, seed_sigma=seed)
                seed = fd.sigma
                if j == 0:
                    seed_row = fd.sigma
                mag[i, j] = abs(qc)
                values.append((u, complex(qc)))
            except TodaSpectraError:
                gaps.append(u)
                values.append((u, None))
    seeds = []
    for i in range(n_im):
        for j in range(n_re):
            v = mag[i, j]
            if not np.isfinite(v):
                continue
            neigh = mag[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
            if v <= np.nanmin(neigh) and np.isfinite(neigh).sum() >= 4:
                seeds.append(complex(res[j], ims[i]))
    scan = SpectrumResult(case=case, scan_diag=tuple(values), gaps=tuple(gaps))
    return scan, seeds
