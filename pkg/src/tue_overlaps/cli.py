"""Command-line driver for the Monte Carlo experiments.

Subcommands: ``sample``, ``verify``, ``expectation``, ``conjecture``,
``kostlan``, ``figure1``.  Output goes to ``--out PATH`` (stdout if
omitted) as CSV (header row, '.' decimal separator, complex values split
into ``re``/``im`` columns, 17 significant digits) or as a JSON object
``{config, results, discards, runtime_seconds}``.

Exit codes: 0 success; 1 acceptance-threshold violation (``verify``:
max relative error >= 1e-6, ``kostlan``: some order statistic fails its 1%
KS bar); 2 configuration error; 3 Schur solver failure rate above 10%.
Code 2 beats 3 beats 1 when several apply.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .harness import (
    ConfigError,
    ExperimentConfig,
    VERIFY_REL_TOL,
    conjecture_test,
    expectation_scan,
    figure1_data,
    kostlan_check,
    sample_spectra,
    verify_overlaps,
)

__all__ = ["main"]


def _fmt(value) -> str:
    """CSV cell: floats at 17 significant digits, everything else via str."""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _emit(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_text(config: dict, results, discards, runtime: float) -> str:
    doc = {
        "config": config,
        "results": results,
        "discards": discards,
        "runtime_seconds": runtime,
    }
    return json.dumps(doc, indent=2) + "\n"


def _config_dict(command: str, cfg: ExperimentConfig) -> dict:
    return {
        "command": command,
        "n": cfg.n,
        "m": cfg.m,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "q_max": cfg.q_max,
        "gap_tol": cfg.gap_tol,
        "bins": cfg.bins,
        "format": cfg.format,
        "workers": cfg.workers,
    }


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="truncation size N")
    p.add_argument("--m", type=int, default=1, help="number of removed rows/columns")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--q-max", type=int, default=3, dest="q_max")
    p.add_argument("--gap-tol", type=float, default=1e-8, dest="gap_tol")
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--out", default=None, help="output path (stdout if omitted)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument(
        "--workers", type=int, default=os.cpu_count() or 1,
        help="worker processes (default: available parallelism)",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tue",
        description="Monte Carlo experiments for truncated-unitary eigenvector overlaps",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in [
        ("sample", "export eigenvalues of sampled truncations"),
        ("verify", "numeric vs closed-form overlap comparison"),
        ("expectation", "binned diagonal-overlap means vs the exact curve"),
        ("conjecture", "beta-product form of diagonal overlaps"),
        ("kostlan", "order-statistic KS tests of squared radii"),
    ]:
        p = sub.add_parser(name, help=descr)
        _add_common(p)
        if name == "conjecture":
            p.add_argument(
                "--factor",
                choices=["as_written", "edge_corrected"],
                default="edge_corrected",
            )
    p = sub.add_parser("figure1", help="eigenvalue scatter export: parent unitary vs truncation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


def _solver_exit(failures: int, attempts: int) -> int:
    return 3 if attempts > 0 and failures / attempts > 0.10 else 0


def _run_sample(args) -> int:
    cfg = _cfg(args)
    t0 = time.perf_counter()
    rows, failures = sample_spectra(cfg)
    runtime = time.perf_counter() - t0
    if cfg.format == "csv":
        out = _csv_text(
            ["trial", "index", "re", "im"],
            [(t, k, z.real, z.imag) for t, k, z in rows],
        )
    else:
        out = _json_text(
            _config_dict("sample", cfg),
            {
                "eigenvalues": [
                    {"trial": t, "index": k, "re": z.real, "im": z.imag}
                    for t, k, z in rows
                ]
            },
            {"solver_failures": failures},
            runtime,
        )
    _emit(cfg.output_path, out)
    return _solver_exit(failures, cfg.trials)


def _run_verify(args) -> int:
    cfg = _cfg(args)
    t0 = time.perf_counter()
    rep = verify_overlaps(cfg)
    runtime = time.perf_counter() - t0
    if cfg.format == "csv":
        header = [
            "samples_used", "samples_discarded_degenerate", "solver_failures",
            "comparisons", "max_rel_error", "mean_rel_error", "worst_trial",
            "worst_cycle", "worst_numeric_re", "worst_numeric_im",
            "worst_formula_re", "worst_formula_im",
        ]
        row = (
            rep.samples_used, rep.samples_discarded_degenerate, rep.solver_failures,
            rep.comparisons, rep.max_rel_error, rep.mean_rel_error, rep.worst_trial,
            " ".join(str(i) for i in rep.worst_cycle),
            rep.worst_numeric.real, rep.worst_numeric.imag,
            rep.worst_formula.real, rep.worst_formula.imag,
        )
        out = _csv_text(header, [row])
    else:
        out = _json_text(
            _config_dict("verify", cfg),
            {
                "comparisons": rep.comparisons,
                "max_rel_error": rep.max_rel_error,
                "mean_rel_error": rep.mean_rel_error,
                "worst_trial": rep.worst_trial,
                "worst_cycle": list(rep.worst_cycle),
                "worst_numeric": {"re": rep.worst_numeric.real, "im": rep.worst_numeric.imag},
                "worst_formula": {"re": rep.worst_formula.real, "im": rep.worst_formula.imag},
                "rel_tolerance": VERIFY_REL_TOL,
            },
            {
                "samples_used": rep.samples_used,
                "samples_discarded_degenerate": rep.samples_discarded_degenerate,
                "solver_failures": rep.solver_failures,
            },
            runtime,
        )
    _emit(cfg.output_path, out)
    code = _solver_exit(rep.solver_failures, cfg.trials)
    if code:
        return code
    return 1 if rep.max_rel_error >= VERIFY_REL_TOL else 0


def _run_expectation(args) -> int:
    cfg = _cfg(args)
    t0 = time.perf_counter()
    scan = expectation_scan(cfg)
    runtime = time.perf_counter() - t0
    header = list(scan.rows[0].keys())
    if cfg.format == "csv":
        out = _csv_text(header, [tuple(r[k] for k in header) for r in scan.rows])
    else:
        out = _json_text(
            _config_dict("expectation", cfg),
            {"n": scan.n, "bins": scan.bins, "rows": scan.rows},
            {
                "samples_used": scan.samples_used,
                "samples_discarded_degenerate": scan.samples_discarded_degenerate,
                "solver_failures": scan.solver_failures,
            },
            runtime,
        )
    _emit(cfg.output_path, out)
    return _solver_exit(scan.solver_failures, cfg.trials)


def _run_conjecture(args) -> int:
    cfg = _cfg(args)
    t0 = time.perf_counter()
    rep = conjecture_test(cfg, args.factor)
    runtime = time.perf_counter() - t0
    dev = "" if rep.max_equality_dev is None else rep.max_equality_dev
    if cfg.format == "csv":
        header = [
            "factor_mode", "ks_statistic", "n1", "n2", "critical_1pct",
            "numeric_used", "numeric_discarded", "numeric_solver_failures",
            "synthetic_used", "synthetic_discarded", "synthetic_solver_failures",
            "max_equality_dev",
        ]
        row = (
            rep.factor_mode, rep.ks.statistic, rep.ks.n1, rep.ks.n2,
            rep.ks.critical_1pct, rep.numeric_used, rep.numeric_discarded,
            rep.numeric_solver_failures, rep.synthetic_used,
            rep.synthetic_discarded, rep.synthetic_solver_failures, dev,
        )
        out = _csv_text(header, [row])
    else:
        out = _json_text(
            _config_dict("conjecture", cfg) | {"factor": rep.factor_mode},
            {
                "ks_statistic": rep.ks.statistic,
                "n1": rep.ks.n1,
                "n2": rep.ks.n2,
                "critical_1pct": rep.ks.critical_1pct,
                "max_equality_dev": rep.max_equality_dev,
            },
            {
                "numeric_used": rep.numeric_used,
                "numeric_discarded": rep.numeric_discarded,
                "numeric_solver_failures": rep.numeric_solver_failures,
                "synthetic_used": rep.synthetic_used,
                "synthetic_discarded": rep.synthetic_discarded,
                "synthetic_solver_failures": rep.synthetic_solver_failures,
            },
            runtime,
        )
    _emit(cfg.output_path, out)
    failures = rep.numeric_solver_failures + rep.synthetic_solver_failures
    return _solver_exit(failures, 2 * cfg.trials)


def _run_kostlan(args) -> int:
    cfg = _cfg(args)
    t0 = time.perf_counter()
    rep = kostlan_check(cfg)
    runtime = time.perf_counter() - t0
    if cfg.format == "csv":
        header = ["order_statistic", "ks_statistic", "n1", "n2", "critical_1pct", "passed"]
        rows = [
            (k + 1, ks.statistic, ks.n1, ks.n2, ks.critical_1pct, int(ks.passed))
            for k, ks in enumerate(rep.per_order)
        ]
        out = _csv_text(header, rows)
    else:
        out = _json_text(
            _config_dict("kostlan", cfg),
            {
                "per_order": [
                    {
                        "order_statistic": k + 1,
                        "ks_statistic": ks.statistic,
                        "n1": ks.n1,
                        "n2": ks.n2,
                        "critical_1pct": ks.critical_1pct,
                        "passed": ks.passed,
                    }
                    for k, ks in enumerate(rep.per_order)
                ]
            },
            {"samples_used": rep.samples_used, "solver_failures": rep.solver_failures},
            runtime,
        )
    _emit(cfg.output_path, out)
    code = _solver_exit(rep.solver_failures, cfg.trials)
    if code:
        return code
    return 0 if all(ks.passed for ks in rep.per_order) else 1


def _run_figure1(args) -> int:
    t0 = time.perf_counter()
    fig = figure1_data(args.n, args.seed)
    runtime = time.perf_counter() - t0
    if args.format == "csv":
        rows = [("cue", z.real, z.imag) for z in fig.cue]
        rows += [("tue", z.real, z.imag) for z in fig.tue]
        rows.append(("circle", fig.circle_radius, 0.0))
        out = _csv_text(["label", "re", "im"], rows)
    else:
        out = _json_text(
            {"command": "figure1", "n": args.n, "seed": args.seed, "format": args.format},
            {
                "cue": [{"re": z.real, "im": z.imag} for z in fig.cue],
                "tue": [{"re": z.real, "im": z.imag} for z in fig.tue],
                "circle_radius": fig.circle_radius,
            },
            {},
            runtime,
        )
    _emit(args.out, out)
    return 0


def _cfg(args) -> ExperimentConfig:
    return ExperimentConfig(
        n=args.n,
        m=args.m,
        trials=args.trials,
        seed=args.seed,
        q_max=args.q_max,
        gap_tol=args.gap_tol,
        bins=args.bins,
        output_path=args.out,
        format=args.format,
        workers=args.workers,
    ).validate()


_RUNNERS = {
    "sample": _run_sample,
    "verify": _run_verify,
    "expectation": _run_expectation,
    "conjecture": _run_conjecture,
    "kostlan": _run_kostlan,
    "figure1": _run_figure1,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _RUNNERS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
