"""Command-line entry points: run, sweep, classical, analyze, predict.

Exit codes: 0 success, 1 configuration error, 2 runtime invariant violation,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .classical import initial_ensemble, second_moment_series
from .observables import predict_timescales
from .rotor import RotatorParams
from .runner import (
    ANALYZE_TASKS,
    Backend,
    ExperimentConfig,
    NormDriftError,
    analyze,
    expand_grid,
    preset,
    run_experiment,
    run_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qrotor",
                                description="kicked-rotator simulator with a "
                                            "noisy gate-circuit backend")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("--backend", choices=["exact", "gates"], required=True)
    run.add_argument("--nq", type=int, required=True)
    run.add_argument("--k", type=float, required=True)
    run.add_argument("--bigk", type=float, required=True,
                     help="classical chaos parameter K")
    run.add_argument("--eps", type=float, default=0.0)
    run.add_argument("--steps", type=int, required=True)
    run.add_argument("--record-every", type=int, default=1)
    run.add_argument("--snapshot-at", type=int, action="append", default=[])
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--realizations", type=int, default=1)
    run.add_argument("--out", type=Path, required=True)

    sweep = sub.add_parser("sweep", help="run a grid of configs")
    src = sweep.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path,
                     help="JSON file with 'base' and 'grid' sections")
    src.add_argument("--preset", choices=["growth", "diffusion", "snapshots", "departure"])
    sweep.add_argument("--include-large", action="store_true",
                       help="include the compute-heavy n_q rows of a preset")
    sweep.add_argument("--out", type=Path, required=True)

    cls = sub.add_parser("classical", help="standard-map diffusion run")
    cls.add_argument("--k", type=float, required=True)
    cls.add_argument("--bigk", type=float, required=True)
    cls.add_argument("--ntraj", type=int, default=10_000)
    cls.add_argument("--steps", type=int, default=1000)
    cls.add_argument("--seed", type=int, default=0)
    cls.add_argument("--out", type=Path, required=True,
                     help="CSV path for the <n^2>(t) series")

    ana = sub.add_parser("analyze", help="post-process a result directory")
    ana.add_argument("input_dir", type=Path)
    ana.add_argument("--task", choices=list(ANALYZE_TASKS), required=True)
    ana.add_argument("--clean", type=Path, default=None,
                     help="noiseless reference run (tp-detect)")
    ana.add_argument("--out", type=Path, default=None)

    pred = sub.add_parser("predict", help="closed-form time scales")
    pred.add_argument("--k", type=float, required=True)
    pred.add_argument("--nq", type=int, required=True)
    pred.add_argument("--eps", type=float, required=True)
    pred.add_argument("--out", type=Path, default=None)
    return p


def _cmd_run(args) -> int:
    config = ExperimentConfig(
        backend=Backend(args.backend), n_q=args.nq, k=args.k, K=args.bigk,
        epsilon=args.eps, steps=args.steps, record_every=args.record_every,
        snapshot_times=tuple(args.snapshot_at), seed=args.seed,
        realizations=args.realizations, output_dir=args.out,
    )
    result = run_experiment(config)
    print(json.dumps({"output_dir": str(args.out),
                      "realizations": len(result.series),
                      "records_per_realization": len(result.series[0])}))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.config is not None:
        grid_spec = json.loads(args.config.read_text())
        configs = expand_grid(grid_spec)
        if not configs:
            raise ValueError(f"no configs produced from {args.config}")
    else:
        configs = preset(args.preset, include_large=args.include_large)
    summary = run_sweep(configs, output_dir=args.out)
    n_failed = sum(1 for e in summary["runs"] if e["status"] != "ok")
    print(json.dumps({"output_dir": str(args.out),
                      "runs": len(summary["runs"]), "failed": n_failed,
                      "collapse": summary.get("collapse")}))
    return EXIT_OK


def _cmd_classical(args) -> int:
    ens = initial_ensemble(args.k, args.bigk / args.k, args.ntraj, args.seed)
    n2 = second_moment_series(ens, args.steps)
    lines = ["t,n2"]
    for t, v in enumerate(n2):
        lines.append(f"{t},{format(v, '.17g')}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines) + "\n")
    D = float(np.polyfit(np.arange(args.steps + 1, dtype=float), n2, 1)[0])
    print(json.dumps({"out": str(args.out), "D_fit": D,
                      "quasilinear_k2_over_2": args.k ** 2 / 2.0}))
    return EXIT_OK


def _cmd_analyze(args) -> int:
    report = analyze(args.input_dir, args.task, clean_dir=args.clean,
                     output_path=args.out)
    print(json.dumps(report.get("result", report.get("prediction"))))
    return EXIT_OK


def _cmd_predict(args) -> int:
    # K drops out of every closed form, so any period builds a valid params set
    params = RotatorParams(k=args.k, T=1.0, n_q=args.nq)
    pred = predict_timescales(params, args.eps)
    payload = asdict(pred)
    print(json.dumps(payload))
    if args.out is not None:
        args.out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "classical": _cmd_classical,
        "analyze": _cmd_analyze,
        "predict": _cmd_predict,
    }
    try:
        return handlers[args.command](args)
    except NormDriftError as exc:
        print(f"runtime invariant violation: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
