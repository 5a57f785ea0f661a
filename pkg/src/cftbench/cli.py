"""Command line: ``cftbench run | sweep | certify``.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from .config import load_config
from .exceptions import ConfigError, SolverError, TruncationError
from .io import atomic_write, dumps
from .runner import SCHEMA_VERSION, certify_config, evaluate, rows_to_csv, sweep

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _parse_range(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--range expects A:B:STEPS, got {text!r}")
    from .config import eval_number

    try:
        steps = int(parts[2])
    except ValueError:
        raise ConfigError(f"--range: STEPS must be an integer, got {parts[2]!r}") from None
    return eval_number(parts[0], "--range start"), eval_number(parts[1], "--range stop"), steps


def build_parser():
    p = argparse.ArgumentParser(prog="cftbench", description="Classical fidelity thresholds for state ensembles.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="TOML configuration file")
        sp.add_argument("--out", help="output path (default: [output].path or stdout)")
        sp.add_argument("--format", choices=("json", "csv"), help="output format")
        sp.add_argument("--seed", type=int, help="see-saw seed")
        sp.add_argument("--grid", type=int, help="Fibonacci grid size for the deterministic LP")
        sp.add_argument("--restarts", type=int, help="see-saw restarts")
        sp.add_argument("--truncation", type=int, help="Fock truncation for coherent ensembles")
        sp.add_argument("--workers", type=int, help="sweep worker processes (0: one per CPU)")

    common(sub.add_parser("run", help="compute thresholds for one scenario"))
    sw = sub.add_parser("sweep", help="tabulate thresholds over a parameter range")
    common(sw)
    sw.add_argument("--param", required=True, help="scenario parameter to vary")
    sw.add_argument("--range", required=True, help="START:STOP:STEPS (radians for angles)")
    ce = sub.add_parser("certify", help="classify a measured average fidelity")
    common(ce)
    ce.add_argument("--fidelity", type=float, required=True, help="measured average fidelity in [0, 1]")
    return p


def _emit(text, path):
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


def _single_row(res):
    cf = res["closed_form"] or {}
    deltas = res["deltas"] or {}
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": res["scenario"],
        "param": "",
        "value": "",
        "det_cft": res["det_cft"],
        "prob_cft": res["prob_cft"],
        "det_closed_form": cf.get("det"),
        "prob_closed_form": cf.get("prob"),
        "det_delta": deltas.get("det"),
        "prob_delta": deltas.get("prob"),
        "branch": cf.get("branch", ""),
    }


def run(argv=None):
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config).with_solver(
        seed=args.seed, grid=args.grid, restarts=args.restarts, truncation=args.truncation, workers=args.workers
    )
    fmt = args.format or cfg.output.format
    path = args.out or cfg.output.path
    t0 = time.perf_counter()
    payload = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": cfg.to_dict()}
    if args.command == "run":
        res = evaluate(cfg)
        payload.update(res)
        text_csv = lambda: rows_to_csv([_single_row(res)])
    elif args.command == "sweep":
        start, stop, steps = _parse_range(args.range)
        rows = sweep(cfg, args.param, start, stop, steps)
        payload.update({"param": args.param, "range": [start, stop, steps], "rows": rows})
        text_csv = lambda: rows_to_csv(rows)
    else:
        if not 0 <= args.fidelity <= 1:
            raise ConfigError(f"--fidelity must lie in [0, 1], got {args.fidelity}")
        res, verdict = certify_config(cfg, args.fidelity)
        payload.update(res)
        payload["verdict"] = verdict.to_dict()
        sys.stderr.write(
            f"{verdict.classification}: F = {verdict.measured_fidelity:.6f}, "
            f"det = {_fmt(verdict.det_threshold)}, prob = {_fmt(verdict.prob_threshold)}\n"
        )
        text_csv = None
    if fmt == "csv":
        if text_csv is None:
            raise ConfigError("certify output is JSON only")
        _emit(text_csv(), path)
    else:
        payload["wall_time"] = time.perf_counter() - t0
        _emit(dumps(payload), path)
    return EXIT_OK


def _fmt(v):
    return "n/a" if v is None else f"{v:.6f}"


def main(argv=None):
    try:
        return run(argv)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (SolverError, TruncationError) as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        report = getattr(exc, "report", None)
        if report:
            sys.stderr.write(dumps(report))
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
