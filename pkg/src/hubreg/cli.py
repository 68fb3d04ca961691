"""Command-line front end.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
failure inside a pipeline stage.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .ggm import EbicConfig, partial_correlations, select_precision_by_ebic
from .io import RunConfig, ValidationError, ingest_csv, run_pipeline, write_json, write_matrix_csv
from .network import degree_centrality, select_hubs
from .pipeline import StageError
from .simulation import (
    HarnessSettings,
    Scenario,
    run_experiment,
    write_rows_csv,
    write_summary_csv,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

RUN_FLAGS = ("delta", "gamma", "folds", "seed", "tau_override", "test_fraction", "ebic_patience")


def _names(s):
    return [c.strip() for c in s.split(",") if c.strip()] if s else []


def _floats(s):
    return [float(v) for v in s.split(",")]


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--data", required=True, help="input CSV with a header row")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--outcome", help="outcome column")
    p.add_argument("--confounders", help="comma-separated confounder columns")
    p.add_argument("--proteins", help="comma-separated predictor columns")
    p.add_argument("--delta", type=float)
    p.add_argument("--tau", dest="tau_override", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--ebic-patience", dest="ebic_patience", type=int)
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--out", help="output path (default: stdout or current directory)")


def _run_config(args) -> RunConfig:
    base = RunConfig.load(args.config).to_dict() if args.config else {}
    if args.outcome:
        base["outcome"] = args.outcome
    if args.confounders is not None:
        base["confounders"] = _names(args.confounders)
    if args.proteins is not None:
        base["proteins"] = _names(args.proteins)
    for k in RUN_FLAGS:
        v = getattr(args, k, None)
        if v is not None:
            base[k] = v
    return RunConfig.from_dict(base)


def _load(args):
    cfg = _run_config(args)
    if not cfg.proteins:
        with open(args.data, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh), [])
        taken = {cfg.outcome, *cfg.confounders}
        cfg.proteins = [h.strip() for h in header if h.strip() not in taken]
    return ingest_csv(args.data, cfg.outcome, cfg.confounders, cfg.proteins), cfg


def cmd_fit(args) -> int:
    data, cfg = _load(args)
    report = run_pipeline(data, cfg)
    if args.out:
        write_json(args.out, report)
    else:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_network(args) -> int:
    data, cfg = _load(args)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    try:
        sel = select_precision_by_ebic(
            data.X, EbicConfig(gamma=cfg.gamma, lambda_grid=cfg.glasso_lambda_grid, patience=cfg.ebic_patience),
            standardize=cfg.standardize,
        )
        rho = partial_correlations(sel.fit)
        phi = degree_centrality(rho)
        part = select_hubs(phi, cfg.delta, cfg.tau_override)
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        raise StageError("network", exc) from exc
    write_matrix_csv(out / "precision.csv", sel.fit.theta, data.x_names)
    write_matrix_csv(out / "partial_correlations.csv", rho.rho, data.x_names)
    hubs = part.to_dict(data.x_names)
    hubs.update(lam=sel.lam, edges=sel.fit.edge_count)
    write_json(out / "hubs.json", hubs)
    print(f"lambda={sel.lam:.6g} edges={sel.fit.edge_count} hubs={', '.join(h['name'] for h in hubs['hubs'])}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = Scenario(args.n, args.p, args.signal, seed=args.seed)
    settings = HarnessSettings(gamma=args.gamma, ebic_patience=args.ebic_patience)
    res = run_experiment(
        sc, _names(args.methods), _floats(args.delta), args.replicates, args.folds, settings, args.jobs
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rows_csv(out / "replicates.csv", res.rows)
    write_summary_csv(out / "summary.csv", res.summary)
    manifest = dict(res.manifest, failures=res.failures)
    write_json(out / "manifest.json", manifest)
    _print_summary(res.summary)
    return EXIT_OK


def _fmt(mean, sd):
    if mean in (None, "", "NA"):
        return "--"
    return f"{float(mean):.2f} ({float(sd):.2f})"


def _print_summary(rows):
    print(f"{'method':<18}{'RMSE':>14}{'CSL':>14}{'F1':>14}{'MCC':>14}{'failed':>8}")
    for s in rows:
        cells = [_fmt(s.get(f"{k}_mean"), s.get(f"{k}_sd")) for k in ("rmse", "csl", "f1", "mcc")]
        print(f"{s['method']:<18}" + "".join(f"{c:>14}" for c in cells) + f"{s.get('failures', 0):>8}")


def cmd_report(args) -> int:
    path = Path(args.input)
    if not path.is_file():
        raise ValidationError(f"{path}: no such file")
    if path.suffix == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or "rmse_mean" not in rows[0]:
            raise ValidationError(f"{path}: not a summary CSV")
        _print_summary(rows)
        return EXIT_OK
    try:
        rep = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if "hubs" not in rep or "coefficients" not in rep:
        raise ValidationError(f"{path}: not an analysis report")
    h = rep["hubs"]
    print(f"n={rep['n']} p={rep['p']} delta={h['delta']} tau={h['tau']} h={h['h']}")
    print(f"network: lambda={rep['network']['lambda']:.6g} edges={rep['network']['edges']}")
    print("hubs:")
    for name in h["names"]:
        print(f"  {name:<20}{h['centrality'][name]:.4f}")
    t = rep["tuning"]
    print(f"tuning: nu={t['nu']} lambda_n={t['lambda_n']:.6g}")
    print("non-zero coefficients:")
    for c in rep["coefficients"]:
        if abs(c["estimate"]) > 1e-8:
            print(f"  {c['term']:<20}{c['role']:<12}{c['estimate']: .5f}")
    if "evaluation" in rep:
        e = rep["evaluation"]
        print(f"test RMSE={e['test_rmse']:.4f} CSL={e['test_csl']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hubreg", description="Network-guided penalized regression")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the synthetic benchmark")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--p", type=int, default=60)
    s.add_argument("--signal", choices=("strong", "weak"), default="strong")
    s.add_argument("--replicates", type=int, default=100)
    s.add_argument("--methods", default="ng,adaptive_lasso,lasso,elastic_net,ridge")
    s.add_argument("--delta", default="0.06", help="comma-separated delta values for NG")
    s.add_argument("--gamma", type=float, default=0.5)
    s.add_argument("--folds", type=int, default=5)
    s.add_argument("--seed", type=int, default=2024)
    s.add_argument("--ebic-patience", dest="ebic_patience", type=int, default=5)
    s.add_argument("--jobs", type=int, help="worker processes (default: $HUBREG_JOBS or 1)")
    s.add_argument("--out", default="sim_out")
    s.set_defaults(func=cmd_simulate)

    n = sub.add_parser("network", help="estimate the network and hubs, write matrices")
    _add_run_flags(n)
    n.set_defaults(func=cmd_network)

    f = sub.add_parser("fit", help="full pipeline, JSON report")
    _add_run_flags(f)
    f.set_defaults(func=cmd_fit)

    r = sub.add_parser("report", help="print a report JSON or summary CSV")
    r.add_argument("input")
    r.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: numerical failure {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
