"""Command-line front end: JSON job in, CSV/JSON (and gnuplot) out.

Subcommands
-----------
sigma   Floquet exponents and multipliers of one model.
qc      Quantization-condition scan over a u_N window; emits a CSV and a
        gnuplot script plotting |qc| against Re u_N.
solve   Full root search (scan + refine + stability filter).
verify  Identity suites: minor three-way agreement, Wronskian
        quasi-periodicity, Baxter residuals, Floquet monodromy.
oracle  Brute-force spectra, optionally compared against a solve output.

Exit codes: 0 success, 1 numerical failure (JSON error on stderr),
2 configuration error.  Outputs embed the resolved config and library
version; identical configs and versions give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .connection import build_connection, minor_det_direct, minor_det_subset_sum, qc_value
from .errors import ConfigError, TodaSpectraError
from .floquet import floquet_series_eval, locate_sigma
from .oracle import (
    GridSpec,
    compare_spectra,
    difference_collocation_even,
    schrodinger_eigen_N2,
)
from .qfn import ModelParams, TruncationOpts, baxter_residual, quantum_wronskian
from .rootsys import weyl_orbit_subsets
from .spectrum import quantization_function, spectrum_list

__all__ = ["main"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _cplx(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _parse_complex(obj, field):
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, dict) and set(obj) <= {"re", "im"}:
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
    raise ConfigError(f"{field} must be a number or {{'re':..,'im':..}}")


def _load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _model_from(cfg) -> ModelParams:
    try:
        m = cfg["model"]
    except KeyError:
        raise ConfigError("config lacks a 'model' block")
    if not isinstance(m, dict):
        raise ConfigError("'model' must be an object")
    unknown = set(m) - {"n", "hbar", "lambda", "u", "u_n"}
    if unknown:
        raise ConfigError(f"unknown model keys: {sorted(unknown)}")
    try:
        return ModelParams(
            n=m.get("n"),
            hbar=float(m.get("hbar", 1.0)),
            lambda_cpl=float(m.get("lambda", 1.0)),
            u=tuple(m.get("u", ())),
            u_n=_parse_complex(m.get("u_n", 0.0), "model.u_n"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model block: {exc}")


def _trunc_from(cfg, det_rows_override=None) -> TruncationOpts:
    t = cfg.get("truncation", {})
    if not isinstance(t, dict):
        raise ConfigError("'truncation' must be an object")
    unknown = set(t) - {"det_rows", "series_terms", "tol_abs", "tol_rel"}
    if unknown:
        raise ConfigError(f"unknown truncation keys: {sorted(unknown)}")
    kwargs = dict(t)
    if det_rows_override is not None:
        kwargs["det_rows"] = det_rows_override
    try:
        return TruncationOpts(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid truncation block: {exc}")


def _resolved(cfg, model, opts, threads) -> dict:
    return {
        "library": "toda-spectra",
        "version": __version__,
        "threads": threads,
        "model": {
            "n": model.n,
            "hbar": model.hbar,
            "lambda": model.lambda_cpl,
            "u": list(model.u),
            "u_n": _cplx(model.u_n),
        },
        "truncation": {
            "det_rows": opts.det_rows,
            "series_terms": opts.series_terms,
            "tol_abs": opts.tol_abs,
            "tol_rel": opts.tol_rel,
        },
        "config": cfg,
    }


def _write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) if isinstance(x, float) else x for x in row])


def cmd_sigma(cfg, model, opts, out, threads) -> int:
    fd = locate_sigma(model, opts)
    rows = []
    for j in range(fd.n):
        rows.append([
            j + 1,
            float(fd.sigma[j].real), float(fd.sigma[j].imag),
            float(fd.zeta[j].real), float(fd.zeta[j].imag),
            float(fd.residuals[j]),
        ])
    _write_csv(out / "sigma.csv",
               ["j", "re_sigma", "im_sigma", "re_zeta", "im_zeta", "residual"],
               rows)
    payload = _resolved(cfg, model, opts, threads)
    payload["result"] = {
        "sigma": [_cplx(s) for s in fd.sigma],
        "zeta": [_cplx(z) for z in fd.zeta],
        "eta_rep": [_cplx(e) for e in fd.eta_rep],
        "residuals": list(map(float, fd.residuals)),
        "scales": list(map(float, fd.scales)),
        "sum_shift": fd.sum_shift,
        "shifted_index": fd.shifted_index,
    }
    _write_json(out / "sigma.json", payload)
    print(f"wrote {out / 'sigma.csv'} and {out / 'sigma.json'}")
    return 0


def _qc_block(cfg, model):
    q = cfg.get("qc", cfg.get("solve", {}))
    case = q.get("case", "even" if model.n % 2 == 0 else "odd_case1")
    window = q.get("window")
    if window is None or len(window) != 2:
        raise ConfigError("qc/solve block needs 'window': [u_lo, u_hi]")
    steps = int(q.get("steps", 100))
    im_max = q.get("im_max")
    return case, (float(window[0]), float(window[1])), steps, \
        None if im_max is None else float(im_max)


def cmd_qc(cfg, model, opts, out, threads) -> int:
    case, window, steps, im_max = _qc_block(cfg, model)
    if case == "even":
        grid = [complex(u) for u in np.linspace(window[0], window[1], steps)]
    else:
        if im_max is None:
            im_max = 0.5 * (window[1] - window[0])
        sign = 1.0 if case == "odd_case1" else -1.0
        n_im = max(steps // 3, 4)
        grid = [complex(re, sign * im)
                for im in np.linspace(im_max / n_im, im_max, n_im)
                for re in np.linspace(window[0], window[1], steps)]
    rows = []
    seed = None
    for u in grid:
        try:
            params = model.with_u_n(u)
            fd = locate_sigma(params, opts, seed_sigma=seed)
            seed = fd.sigma
            qc = qc_value(fd.sigma, fd.zeta, case, tol_abs=opts.tol_abs)
            rows.append([u.real, u.imag, qc.real, qc.imag, abs(qc)])
        except TodaSpectraError:
            rows.append([u.real, u.imag, float("nan"), float("nan"), float("nan")])
    _write_csv(out / "qc_scan.csv",
               ["re_u", "im_u", "re_qc", "im_qc", "abs_qc"], rows)
    payload = _resolved(cfg, model, opts, threads)
    payload["result"] = {"case": case, "samples": len(rows)}
    _write_json(out / "qc_scan.json", payload)
    gp = (
        "# gnuplot script emitted by toda-spectra qc\n"
        "set datafile separator ','\n"
        "set logscale y\n"
        "set xlabel 'Re u_N'\n"
        "set ylabel '|qc|'\n"
        f"set title 'quantization condition, case {case}'\n"
        f"plot 'qc_scan.csv' every ::1 using 1:5 with lines title '|qc|'\n"
    )
    with open(out / "qc_plot.gp", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(gp)
    print(f"wrote {out / 'qc_scan.csv'}, {out / 'qc_scan.json'}, {out / 'qc_plot.gp'}")
    return 0


def cmd_solve(cfg, model, opts, out, threads) -> int:
    case, window, steps, im_max = _qc_block(cfg, model)
    result = spectrum_list(model, case, window, steps=steps, im_max=im_max,
                           opts=opts)

    def rec(r):
        return {
            "u_n": _cplx(r.u_n),
            "qc_abs": r.qc_abs,
            "refinement_steps": r.refinement_steps,
            "truncation_stability": r.truncation_stability,
            "warnings": list(r.warnings),
        }

    payload = _resolved(cfg, model, opts, threads)
    payload["result"] = {
        "case": result.case,
        "roots": [rec(r) for r in result.roots],
        "suspect": [rec(r) for r in result.suspect],
        "candidates": [_cplx(c) for c in result.candidates],
        "gaps": [_cplx(g) for g in result.gaps],
    }
    _write_json(out / "solve.json", payload)
    _write_csv(out / "solve.csv",
               ["re_u", "im_u", "qc_abs", "refinement_steps",
                "truncation_stability"],
               [[r.u_n.real, r.u_n.imag, r.qc_abs, r.refinement_steps,
                 r.truncation_stability] for r in result.roots])
    print(f"wrote {out / 'solve.json'} and {out / 'solve.csv'} "
          f"({len(result.roots)} roots, {len(result.suspect)} suspect)")
    return 0


def _verify_minor_three_way(orders, draws, seed, perturb):
    rng = np.random.default_rng(seed)
    checks = []
    for n in orders:
        m = (n + 1) // 2 if n % 2 else n // 2
        case = "odd_case1" if n % 2 else "even"
        worst = 0.0
        for k in range(draws):
            while True:
                sig = rng.uniform(-0.5, 0.5, n) + 1j * rng.uniform(-0.05, 0.05, n)
                sig -= sig.mean()
                eta = rng.uniform(-0.5, 0.5, n) + 1j * rng.uniform(-0.3, 0.3, n)
                eta -= eta.mean()
                big_sigma = np.exp(2j * np.pi * sig)
                gaps = np.abs(big_sigma[:, None] - big_sigma[None, :])
                np.fill_diagonal(gaps, np.inf)
                sins = np.abs(np.sin(np.pi * (sig[:, None] - sig[None, :])))
                np.fill_diagonal(sins, np.inf)
                if gaps.min() > 0.1 and sins.min() > 0.05:
                    break
            zeta = np.exp(2j * np.pi * eta)
            zeta_used = zeta.copy()
            if perturb and k == 0:
                zeta_used[0] *= (1.0 + perturb)
            d1 = minor_det_direct(build_connection(big_sigma, zeta), m)
            d2 = minor_det_subset_sum(big_sigma, zeta, m)
            d3 = qc_value(sig, zeta_used, case)
            scale = max(abs(d1), abs(d2), abs(d3))
            worst = max(worst, abs(d1 - d2) / scale, abs(d1 - d3) / scale)
            if n % 2:
                d4 = minor_det_direct(build_connection(big_sigma, 1.0 / zeta), m)
                d5 = qc_value(sig, zeta_used, "odd_case2")
                worst = max(worst, abs(d4 - d5) / max(abs(d4), abs(d5)))
        orbit = len(weyl_orbit_subsets(n, m))
        checks.append((f"minor_three_way_N{n} (orbit size {orbit})",
                       worst, 1e-9))
    return checks


def cmd_verify(cfg, model, opts, out, threads) -> int:
    v = cfg.get("verify", {})
    orders = list(v.get("orders", [2, 3, 4, 5]))
    draws = int(v.get("draws", 25))
    seed = int(v.get("seed", 20260810))
    perturb = float(v.get("perturb_zeta", 0.0))
    model_checks = bool(v.get("model_checks", True))

    checks = _verify_minor_three_way(orders, draws, seed, perturb)

    if model_checks:
        rng = np.random.default_rng(seed + 1)
        taus_scale = 1.0 + abs(model.u_n) ** (1.0 / model.n)
        lam = (rng.uniform(-0.8, 0.8, 10) * taus_scale
               + 1j * rng.uniform(-0.4, 0.4, 10) * model.hbar)
        w0 = quantum_wronskian(model, lam, opts)
        w1 = quantum_wronskian(model, lam + 1j * model.hbar, opts)
        dev = np.max(np.abs(w1 - (-1.0) ** model.n * w0) / np.abs(w0))
        checks.append(("wronskian_quasi_periodicity", float(dev), 1e-8))

        res_p = baxter_residual(model, lam, "+", opts)
        res_m = baxter_residual(model, lam, "-", opts)
        checks.append(("baxter_residual", float(max(res_p.max(), res_m.max())),
                       1e-9))

        fd = locate_sigma(model, opts)
        worst = 0.0
        logz = 0.37 + 0.21j
        for j in range(fd.n):
            f0 = floquet_series_eval(model, fd, j, 0, logz, opts)
            f2 = floquet_series_eval(model, fd, j, 0, logz + 2j * np.pi, opts)
            mono = abs(f2 - np.exp(2j * np.pi * fd.sigma[j]) * f0) / abs(f2)
            finf = floquet_series_eval(model, fd, j, "inf", logz, opts)
            ratio = abs(f0 / finf - fd.zeta[j]) / abs(fd.zeta[j])
            worst = max(worst, mono, ratio)
        checks.append(("floquet_monodromy_and_ratio", float(worst), 1e-8))

    all_pass = True
    lines = []
    for name, value, tol in checks:
        ok = value < tol
        all_pass &= ok
        lines.append((name, value, tol, "PASS" if ok else "FAIL"))
        print(f"{'PASS' if ok else 'FAIL'}  {name:42s} {value:.3e} (tol {tol:.0e})")

    payload = _resolved(cfg, model, opts, threads)
    payload["result"] = {
        "checks": [{"name": n, "value": val, "tol": tol, "status": st}
                   for n, val, tol, st in lines],
        "all_pass": all_pass,
    }
    _write_json(out / "verify.json", payload)
    print(f"wrote {out / 'verify.json'}")
    return 0 if all_pass else 1


def cmd_oracle(cfg, model, opts, out, threads) -> int:
    o = cfg.get("oracle", {})
    if model.n % 2 != 0:
        raise ConfigError(
            f"no brute-force oracle exists for odd N = {model.n}; "
            "resonance validation is property-based (see solve)"
        )
    count = int(o.get("count", 3))
    grid = None
    if "grid" in o:
        grid = GridSpec(box_half_width=float(o["grid"]["box_half_width"]),
                        points=int(o["grid"]["points"]))
    mu = difference_collocation_even(model, count, grid)
    payload = _resolved(cfg, model, opts, threads)
    result = {
        "collocation_eigenvalues": list(map(float, mu)),
        "quantization_prediction_u_n": [float(-m) for m in mu],
    }
    if model.n == 2:
        energies = schrodinger_eigen_N2(model.hbar, model.lambda_cpl, count)
        rep = compare_spectra(energies, mu, float(o.get("tol", 1e-6)))
        result["schrodinger_eigenvalues"] = list(map(float, energies))
        result["cross_oracle_max_deviation"] = rep.max_deviation
        result["cross_oracle_all_matched"] = rep.all_matched
    solve_path = o.get("solve_output")
    if solve_path:
        with open(solve_path, "r", encoding="utf-8") as fh:
            solve_data = json.load(fh)
        roots = [r["u_n"]["re"] for r in solve_data["result"]["roots"]]
        rep = compare_spectra(sorted(-np.array(roots)), mu,
                              float(o.get("tol", 1e-5)))
        result["solve_match"] = {
            "max_deviation": rep.max_deviation,
            "all_matched": rep.all_matched,
            "unmatched_solve": list(rep.unmatched_a),
            "unmatched_oracle": list(rep.unmatched_b),
        }
        print(f"solve-vs-oracle: max dev {rep.max_deviation:.3e} "
              f"matched={rep.all_matched}")
    payload["result"] = result
    _write_json(out / "oracle.json", payload)
    print(f"wrote {out / 'oracle.json'}")
    return 0


_COMMANDS = {
    "sigma": cmd_sigma,
    "qc": cmd_qc,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="toda-spectra",
        description="Floquet data, quantization conditions, and spectra for "
                    "modified-Mathieu-type operators of order N",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON job description")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--det-rows", type=int, default=None,
                        help="override truncation.det_rows")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads (evaluation is sequential and "
                             "deterministic in this implementation)")
    args = parser.parse_args(argv)

    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = _load_config(args.config)
        model = _model_from(cfg)
        opts = _trunc_from(cfg, det_rows_override=args.det_rows)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
    except ConfigError as exc:
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  sys.stderr)
        sys.stderr.write("\n")
        return 2
    try:
        return _COMMANDS[args.command](cfg, model, opts, out, args.threads)
    except ConfigError as exc:
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  sys.stderr)
        sys.stderr.write("\n")
        return 2
    except TodaSpectraError as exc:
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
