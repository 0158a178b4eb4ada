"""Acceptance suite: one test per criterion, printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
report lines.
"""

import math
import time

import numpy as np
import pytest

from uacal.action_space import ActionGrid, Metric
from uacal.calibration import (
    CalibrationSample,
    LogitField,
    apply_temperature,
    ece,
    entropy,
    fit_temperature,
)
from uacal.dataset_io import read_dataset, write_dataset
from uacal.errors import FormatError
from uacal.selection import SelectionConfig, ua_select, ua_select_fast
from uacal.simbench import PRESETS, evaluate, make_calibration_set

SEED = 987654321


def report(name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] {name}" + (f": {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_c1_argmax_preservation():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    violations = 0
    n_fields = 10_000
    for i in range(n_fields):
        # sizes log-uniform up to 1e5
        size = int(np.exp(rng.uniform(np.log(2), np.log(1e5))))
        logits = rng.normal(0, 3, size=size)
        f = LogitField(ActionGrid((size,)), logits)
        base = int(np.argmax(logits))
        for T in (0.1, 1.0, 10.0):
            if int(np.argmax(apply_temperature(f, T).values)) != base:
                violations += 1
    elapsed = time.perf_counter() - t0
    report("C1 argmax preservation",
           violations == 0 and elapsed < 30.0,
           f"{n_fields} fields, {violations} violations, {elapsed:.1f}s")


def test_c2_oracle_equivalence_fast_vs_exact():
    rng = np.random.default_rng(SEED + 1)
    cheb = Metric("chebyshev")
    mismatches = 0
    worst = 0.0
    for _ in range(200):
        naxes = int(rng.integers(1, 4))
        dims = tuple(int(d) for d in rng.integers(2, 33, size=naxes))
        grid = ActionGrid(dims)
        v = rng.random(grid.size) + 1e-9
        v /= v.sum()
        from uacal.calibration import ProbField
        p = ProbField(grid, v)
        tau = float(rng.choice([1.5, 2.5, 4.5]))
        cfg = SelectionConfig(metric=cheb, tau=tau)
        exact = ua_select(p, cfg)
        fast = ua_select_fast(p, cfg)
        if exact.action != fast.action:
            mismatches += 1
        worst = max(worst, abs(exact.aggregated_score - fast.aggregated_score))
    report("C2 fast/exact oracle equivalence",
           mismatches == 0 and worst <= 1e-9,
           f"200 configs, {mismatches} index mismatches, max score gap {worst:.2e}")


def test_c3_degeneracy_ladder():
    from uacal.calibration import ProbField
    from uacal.selection import gaussian_select, greedy_select, ua_select_restricted
    rng = np.random.default_rng(SEED + 2)
    eucl = Metric("euclidean")
    bad = 0
    for _ in range(100):
        naxes = int(rng.integers(1, 3))
        dims = tuple(int(d) for d in rng.integers(2, 13, size=naxes))
        grid = ActionGrid(dims)
        v = rng.random(grid.size) + 1e-9
        v /= v.sum()
        p = ProbField(grid, v)
        greedy = greedy_select(p).action
        if ua_select(p, SelectionConfig(metric=eucl, tau=0.5)).action != greedy:
            bad += 1
        full = ua_select(p, SelectionConfig(metric=eucl, tau=2.0)).action
        restricted = ua_select_restricted(p, SelectionConfig(
            metric=eucl, tau=2.0, alpha=0.0, k=grid.size,
            window=2 * max(grid.dims), mode="ua_restricted")).action
        if restricted != full:
            bad += 1
        if gaussian_select(p, SelectionConfig(mode="gaussian",
                                              sigma=1e-6)).action != greedy:
            bad += 1
    report("C3 degeneracy ladder", bad == 0, f"100 fields x 3 checks, {bad} mismatches")


def test_c4_temperature_recovery():
    grid = ActionGrid((64,))
    ok = True
    details = []
    for gain in (0.5, 2.0, 5.0):
        data = make_calibration_set(2000, gain, grid, seed=SEED + 3)
        t0 = time.perf_counter()
        model = fit_temperature(data)
        fit_time = time.perf_counter() - t0
        rel = abs(model.temperature - gain) / gain
        # independent vectorized grid scan of the NLL objective
        logits = np.stack([s.logits.values for s in data])
        experts = np.array([s.expert for s in data])
        ts = np.geomspace(0.1, 10.0, 200)
        scans = []
        for T in ts:
            z = logits / T
            z = z - z.max(axis=1, keepdims=True)
            logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
            scans.append(-logp[np.arange(len(data)), experts].mean())
        t_scan = float(ts[int(np.argmin(scans))])
        step = math.log(ts[1] / ts[0])
        ok &= rel <= 0.05 and fit_time < 5.0
        ok &= abs(math.log(model.temperature) - math.log(t_scan)) <= 1.5 * step
        details.append(f"g={gain}: T={model.temperature:.3f} "
                       f"({100 * rel:.1f}% off, scan {t_scan:.3f}, {fit_time:.1f}s)")
    report("C4 temperature recovery", ok, "; ".join(details))


def test_c5_ece_improvement():
    grid = ActionGrid((64,))
    data = make_calibration_set(5000, 4.0, grid, seed=SEED + 4)
    model = fit_temperature(data)
    before = ece(data, 1.0, 15)
    after = ece(data, model.temperature, 15)
    report("C5 ECE improvement", after <= 0.5 * before,
           f"ECE {before:.4f} -> {after:.4f} at T={model.temperature:.3f}")


def test_c6_distractor_benchmark():
    task, model = PRESETS["distractor-hard"]
    cfgs = [SelectionConfig(mode="greedy"),
            SelectionConfig(metric=Metric("euclidean"), tau=2.5, mode="ua_exact")]
    t0 = time.perf_counter()
    greedy, ua = evaluate(1000, 42, task, model, cfgs)
    elapsed = time.perf_counter() - t0
    # frozen regression values from the first verified run
    ok = (greedy.successes == 394 and ua.successes == 997
          and greedy.success_rate <= 0.75 and ua.success_rate >= 0.95
          and elapsed < 60.0)
    report("C6 distractor benchmark", ok,
           f"greedy {greedy.success_rate:.3f}, ua {ua.success_rate:.3f}, "
           f"{elapsed:.1f}s")


def test_c7_fast_path_performance():
    from uacal.calibration import ProbField
    grid = ActionGrid((100, 100, 100))
    rng = np.random.default_rng(SEED + 5)
    v = rng.random(grid.size)
    v /= v.sum()
    p = ProbField(grid, v)
    cheb = Metric("chebyshev")
    cfg = SelectionConfig(metric=cheb, tau=4.5)  # 9^3 box
    t0 = time.perf_counter()
    exact = ua_select(p, cfg)
    t_exact = time.perf_counter() - t0
    t_fast = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        fast = ua_select_fast(p, cfg)
        t_fast = min(t_fast, time.perf_counter() - t0)
    ok = (fast.action == exact.action and t_fast <= 0.250
          and t_exact / t_fast >= 10.0)
    report("C7 fast-path performance", ok,
           f"fast {t_fast * 1e3:.0f} ms, exact {t_exact * 1e3:.0f} ms, "
           f"speedup {t_exact / t_fast:.0f}x")


def test_c8_format_round_trips(tmp_path):
    rng = np.random.default_rng(SEED + 6)
    failures = 0
    for trial in range(100):
        naxes = int(rng.integers(1, 5))
        dims = tuple(int(d) for d in rng.integers(1, 6, size=naxes))
        grid = ActionGrid(dims)
        samples = [
            CalibrationSample(
                LogitField(grid, rng.normal(0, 2, size=grid.size)
                           .astype(np.float32).astype(np.float64)),
                int(rng.integers(0, grid.size)), int(rng.integers(0, 3)))
            for _ in range(int(rng.integers(0, 10)))
        ]
        p1 = tmp_path / "a.uacl"
        p2 = tmp_path / "b.uacl"
        write_dataset(p1, samples, grid=grid)
        write_dataset(p2, read_dataset(p1), grid=grid)
        if p1.read_bytes() != p2.read_bytes():
            failures += 1
    # corruption classes
    good = tmp_path / "a.uacl"
    bad_magic = bytearray(good.read_bytes())
    bad_magic[:4] = b"XXXX"
    (tmp_path / "bad.uacl").write_bytes(bytes(bad_magic))
    with pytest.raises(FormatError):
        read_dataset(tmp_path / "bad.uacl")
    truncated = good.read_bytes()[:-1] if good.stat().st_size > 21 else b"UAC"
    (tmp_path / "trunc.uacl").write_bytes(truncated)
    with pytest.raises(FormatError):
        read_dataset(tmp_path / "trunc.uacl")
    report("C8 format round trips", failures == 0,
           f"100 round trips, {failures} byte mismatches; corruption raises")


def test_c9_entropy_diagnostic():
    grid = ActionGrid((8, 8))
    rng = np.random.default_rng(SEED + 7)
    samples = []
    for i in range(300):
        logits = rng.normal(0, float(rng.uniform(0.5, 3.0)), size=64)
        samples.append(CalibrationSample(LogitField(grid, logits),
                                         int(rng.integers(0, 64)), i % 4))
    # module path: entropy() over temperature-scaled fields, max per task
    got = {}
    for s in samples:
        h = entropy(apply_temperature(s.logits, 1.0))
        got[s.task_id] = max(got.get(s.task_id, 0.0), h)
    # direct per-sample scan with an independent entropy formula
    want = {}
    worst = 0.0
    for s in samples:
        z = np.exp(s.logits.values - s.logits.values.max())
        p = z / z.sum()
        h = float(-sum(pi * math.log(pi) for pi in p if pi > 0))
        want[s.task_id] = max(want.get(s.task_id, 0.0), h)
    for tid in want:
        worst = max(worst, abs(got[tid] - want[tid]))
    report("C9 entropy diagnostic", worst <= 1e-12,
           f"4 tasks, max |delta| {worst:.2e}")
