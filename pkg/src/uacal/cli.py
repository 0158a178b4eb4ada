"""Command-line surface: calibrate, report, select, bench, perf.

Exit codes: 0 success, 2 dataset format error, 3 parameter error,
4 degenerate fit under --strict.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import calibration, dataset_io, selection, simbench
from .action_space import ActionGrid, Metric, coords_of
from .errors import FormatError, UacalError

EXIT_OK = 0
EXIT_FORMAT = 2
EXIT_PARAMETER = 3
EXIT_DEGENERATE = 4

_MODE_NAMES = {
    "greedy": "greedy",
    "ua": "ua_exact",
    "ua-fast": "ua_fast",
    "ua-restricted": "ua_restricted",
    "gaussian": "gaussian",
}


def _filter_task(samples, task: str):
    if task == "all":
        return samples
    tid = int(task)
    kept = [s for s in samples if s.task_id == tid]
    if not kept:
        raise UacalError(f"no samples with task id {tid}")
    return kept


def _resolve_temperature(arg: str) -> float:
    try:
        return float(arg)
    except ValueError:
        model, _ = dataset_io.read_temperature_file(arg)
        return model.temperature


def _selection_config(args, mode: str) -> selection.SelectionConfig:
    return selection.SelectionConfig(
        metric=Metric(args.metric),
        tau=args.tau,
        alpha=args.alpha,
        k=args.k,
        window=args.window,
        sigma=args.sigma,
        mode=mode,
    )


def cmd_calibrate(args) -> int:
    samples = _filter_task(dataset_io.read_dataset(args.dataset), args.task)
    model = calibration.fit_temperature(samples)
    checksum = dataset_io.dataset_checksum(args.dataset)
    dataset_io.write_temperature_file(args.out, model, checksum)
    print(f"temperature {model.temperature:.17g} nll {model.final_nll:.17g} "
          f"iterations {model.iterations}")
    if model.degenerate:
        print("warning: degenerate fit (NLL constant in T)", file=sys.stderr)
        if args.strict:
            return EXIT_DEGENERATE
    return EXIT_OK


def cmd_report(args) -> int:
    samples = _filter_task(dataset_io.read_dataset(args.dataset), args.task)
    T = _resolve_temperature(args.temperature)
    table = calibration.reliability_bins(samples, T, args.bins)
    dataset_io.write_reliability_csv(args.out, table)
    print(f"ece {table.ece():.17g}")
    by_task: dict[int, float] = {}
    for s in samples:
        h = calibration.entropy(calibration.apply_temperature(s.logits, T))
        by_task[s.task_id] = max(by_task.get(s.task_id, 0.0), h)
    for tid in sorted(by_task):
        print(f"task {tid} max_entropy {by_task[tid]:.17g}")
    return EXIT_OK


def cmd_select(args) -> int:
    samples = dataset_io.read_dataset(args.dataset)
    if not 0 <= args.index < len(samples):
        raise UacalError(f"record index {args.index} out of range "
                         f"[0, {len(samples)})")
    sample = samples[args.index]
    T = _resolve_temperature(args.temperature)
    p = calibration.apply_temperature(sample.logits, T)
    cfg = _selection_config(args, _MODE_NAMES[args.mode])
    res = selection.select(p, cfg)
    coords = coords_of(sample.logits.grid, res.action)
    print(f"action {res.action}")
    print(f"coords {' '.join(str(c) for c in coords)}")
    print(f"score {res.aggregated_score:.17g}")
    print(f"margin {res.runner_up_gap:.17g}")
    if res.flags:
        print(f"flags {' '.join(res.flags)}")
    return EXIT_OK


def cmd_bench(args) -> int:
    task, model = simbench.PRESETS[args.preset]
    cfgs = []
    for name in args.modes.split(","):
        mode = _MODE_NAMES[name.strip()]
        metric = Metric("chebyshev") if mode == "ua_fast" else Metric(args.metric)
        cfgs.append(selection.SelectionConfig(
            metric=metric, tau=args.tau, alpha=args.alpha, k=args.k,
            window=args.window, sigma=args.sigma, mode=mode))
    reports = simbench.evaluate(args.episodes, args.seed, task, model, cfgs,
                                T=args.temperature_value)
    simbench.write_report_csv(args.out, reports)
    for r in reports:
        print(f"{r.mode} success_rate {r.success_rate:.4f} "
              f"stderr {r.stderr:.4f} distractor_hits {r.distractor_hits}")
    return EXIT_OK


def cmd_perf(args) -> int:
    dims = tuple(int(x) for x in args.grid.split(","))
    grid = ActionGrid(dims)
    rng = np.random.default_rng(0)
    values = rng.random(grid.size)
    values /= values.sum()
    p = calibration.ProbField(grid, values)
    cheb = Metric("chebyshev")
    exact_cfg = selection.SelectionConfig(metric=cheb, tau=args.tau, mode="ua_exact")
    fast_cfg = selection.SelectionConfig(metric=cheb, tau=args.tau, mode="ua_fast")

    def best_time(fn):
        best = float("inf")
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            result = fn()
            best = min(best, time.perf_counter() - t0)
        return best, result

    t_exact, r_exact = best_time(lambda: selection.ua_select(p, exact_cfg))
    t_fast, r_fast = best_time(lambda: selection.ua_select_fast(p, fast_cfg))
    agree = r_exact.action == r_fast.action
    print(f"grid {args.grid} tau {args.tau:g}")
    print(f"ua_exact {t_exact * 1e3:.2f} ms")
    print(f"ua_fast {t_fast * 1e3:.2f} ms")
    print(f"speedup {t_exact / t_fast:.1f}x agree {str(agree).lower()}")
    return EXIT_OK


def _add_selection_flags(p, tau_default=1.5):
    p.add_argument("--metric", default="euclidean",
                   choices=("euclidean", "chebyshev", "manhattan"))
    p.add_argument("--tau", type=float, default=tau_default)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--k", type=int, default=selection.DEFAULT_K)
    p.add_argument("--window", type=int, default=selection.DEFAULT_WINDOW)
    p.add_argument("--sigma", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uacal")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fit a temperature on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--task", default="all")
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("report", help="reliability table, ECE, max entropy")
    p.add_argument("--dataset", required=True)
    p.add_argument("--task", default="all")
    p.add_argument("--temperature", default="1.0")
    p.add_argument("--bins", type=int, default=calibration.DEFAULT_BINS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("select", help="run one selection on a dataset record")
    p.add_argument("--dataset", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--mode", required=True, choices=sorted(_MODE_NAMES))
    p.add_argument("--temperature", default="1.0")
    _add_selection_flags(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("bench", help="synthetic distractor benchmark")
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--preset", default="distractor-hard",
                   choices=sorted(simbench.PRESETS))
    p.add_argument("--modes", default="greedy,ua")
    p.add_argument("--temperature-value", type=float, default=1.0)
    p.add_argument("--out", required=True)
    _add_selection_flags(p, tau_default=2.5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("perf", help="time ua vs ua-fast on one grid")
    p.add_argument("--grid", required=True, help="comma-separated dims, e.g. 100,100,100")
    p.add_argument("--tau", type=float, default=4.5)
    p.add_argument("--repeat", type=int, default=3)
    p.set_defaults(func=cmd_perf)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (UacalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER


if __name__ == "__main__":
    sys.exit(main())
