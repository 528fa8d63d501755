"""Acceptance checks, one per criterion, each printing a pass/fail line.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines as they
complete. Criteria 6-8 share one 50-trial grid (several minutes); the
determinism check re-runs the whole grid once more.
"""

import time

import numpy as np
import pytest

from wspgl1 import (
    DriverConfig,
    ExperimentPlan,
    WeightVector,
    make_instance,
    pareto_phi,
    project_weighted_l1_ball,
    records_to_csv,
    run_algorithm,
    run_grid,
    solve_spgl1,
    solve_wspgl1,
    summarize,
    trace_paths,
    weighted_l1,
)

_PLAN = ExperimentPlan(N=400, n_fractions=(0.1, 0.25, 0.5),
                       sparsity_ratios=(0.1, 0.2, 0.3, 0.4, 0.5),
                       trials=50, algorithms=("spgl1", "wspgl1", "irwl1"),
                       seed_base=0)


def _report(num, ok, detail):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num} failed: {detail}"


@pytest.fixture(scope="session")
def grid():
    started = time.perf_counter()
    records = run_grid(_PLAN, jobs=1)
    return records, time.perf_counter() - started


def _bisect_project(v, w, tau, iters=200):
    # reference projection by bisection on the threshold theta
    a = np.abs(v)
    wv = w.values
    if float(np.dot(wv, a)) <= tau:
        return v.copy()
    lo, hi = 0.0, float(np.max(a / wv))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if float(np.dot(wv, np.maximum(a - mid * wv, 0.0))) > tau:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    return np.sign(v) * np.maximum(a - theta * wv, 0.0)


def test_criterion_1_projection_matches_bisection():
    rng = np.random.default_rng(0)
    started = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        size = int(rng.integers(1, 21))
        v = rng.standard_normal(size) * float(10.0 ** rng.uniform(-1.0, 1.0))
        if rng.random() < 0.2:
            w = WeightVector.ones(size)
        else:
            w = WeightVector(rng.uniform(0.05, 1.0, size=size))
        tau = float(rng.uniform(0.0, 1.2)) * max(weighted_l1(v, w), 1e-12)
        gap = np.max(np.abs(project_weighted_l1_ball(v, w, tau) - _bisect_project(v, w, tau)))
        worst = max(worst, float(gap))
    elapsed = time.perf_counter() - started
    _report(1, worst <= 1e-8 and elapsed < 5.0,
            f"max coordinate gap {worst:.3e} over 1000 draws in {elapsed:.2f}s")


def _curve_instances():
    for seed in range(10):
        op, sig, meas = make_instance(30, 100, 4, seed)
        ynorm = float(np.linalg.norm(meas.y))
        tau_hat = solve_spgl1(op.fork(), meas.y, 1e-6 * ynorm).trace.points[-1].tau
        yield op, meas.y, ynorm, tau_hat


def test_criterion_2_pareto_derivative():
    started = time.perf_counter()
    uniform = WeightVector.ones(100)
    worst = 0.0
    for op, y, ynorm, tau_hat in _curve_instances():
        for frac in (0.2, 0.35, 0.5, 0.65, 0.8):
            tau = frac * tau_hat
            h = 1e-3 * tau
            pts = pareto_phi(op.fork(), y, uniform, np.array([tau - h, tau, tau + h])).points
            deriv = (pts[2].residual_norm - pts[0].residual_norm) / (2.0 * h)
            worst = max(worst, abs(deriv + pts[1].lam) / pts[1].lam)
    elapsed = time.perf_counter() - started
    _report(2, worst <= 0.01 and elapsed < 60.0,
            f"max relative derivative error {worst:.3e} at 50 curve points in {elapsed:.1f}s")


def test_criterion_3_pareto_shape():
    uniform = WeightVector.ones(100)
    drop, dip = 0.0, 0.0
    for op, y, ynorm, tau_hat in _curve_instances():
        grid = np.linspace(0.0, 1.02 * tau_hat, 22)
        phi = np.array([p.residual_norm for p in
                        pareto_phi(op.fork(), y, uniform, grid).points])
        drop = max(drop, float(np.max(np.diff(phi))) / ynorm)
        second = phi[:-2] - 2.0 * phi[1:-1] + phi[2:]
        dip = min(dip, float(np.min(second)) / ynorm)
    ok = drop <= 1e-9 and dip >= -1e-6
    _report(3, ok, f"max increase {drop:.3e}, min second difference {dip:.3e} (per ||y||)")


def test_criterion_4_first_step_bitwise():
    exact = True
    for n, N, k, seed in ((50, 200, 10, 0), (50, 200, 10, 1), (50, 200, 10, 2),
                          (100, 400, 20, 0)):
        op, sig, meas = make_instance(n, N, k, seed)
        eps = 1e-6 * float(np.linalg.norm(meas.y))
        plain = solve_spgl1(op.fork(), meas.y, eps).trace.points
        weighted = solve_wspgl1(op.fork(), meas.y, eps).trace.points
        for i in (0, 1):
            exact = exact and (plain[i].tau, plain[i].residual_norm, plain[i].lam) \
                == (weighted[i].tau, weighted[i].residual_norm, weighted[i].lam)
    _report(4, exact, "first Newton step identical bit-for-bit on 4 instances")


def test_criterion_5_desk_scale_paths():
    started = time.perf_counter()
    op, sig, meas = make_instance(100, 400, 20, 0)
    ynorm = float(np.linalg.norm(meas.y))
    eps = 1e-6 * ynorm
    result = solve_wspgl1(op.fork(), meas.y, eps)
    rel = float(np.linalg.norm(result.x_hat - sig.values) / np.linalg.norm(sig.values))
    traces = trace_paths(op, meas.y, eps, sig.support)
    prefix = all(
        (traces["spgl1"].points[i].tau, traces["spgl1"].points[i].residual_norm)
        == (traces["wspgl1"].points[i].tau, traces["wspgl1"].points[i].residual_norm)
        for i in (0, 1))
    fw = traces["wspgl1"].points[-1]
    fo = traces["oracle"].points[-1]
    dtau = abs(fw.tau - fo.tau) / fo.tau
    dres = abs(fw.residual_norm - fo.residual_norm) / ynorm
    elapsed = time.perf_counter() - started
    ok = rel <= 1e-3 and prefix and dtau <= 0.01 and dres <= 0.01 and elapsed < 60.0
    _report(5, ok, f"success rel_error {rel:.2e}, shared prefix {prefix}, "
                   f"final tau gap {dtau:.2e}, residual gap {dres:.2e} of ||y|| "
                   f"in {elapsed:.1f}s")


def test_criterion_6_phase_transition_ordering(grid):
    records, elapsed = grid
    rows = {(s.algorithm, s.n, s.k): s.success_rate for s in summarize(records)}
    cells = _PLAN.cells()
    ws_gap = min(rows[("wspgl1", n, k)] - rows[("spgl1", n, k)] for n, k in cells)
    mid = min(cells, key=lambda cell: abs(rows[("spgl1", *cell)] - 0.5))
    gain = rows[("wspgl1", *mid)] - rows[("spgl1", *mid)]
    irw_cell = min(cells, key=lambda cell: rows[("irwl1", *cell)] - rows[("wspgl1", *cell)])
    irw_gap = rows[("irwl1", *irw_cell)] - rows[("wspgl1", *irw_cell)]
    ok = ws_gap >= -0.02 - 1e-12 and gain >= 0.10 and irw_gap >= -0.10 - 1e-12
    _report(6, ok, f"min wspgl1-spgl1 gap {ws_gap:+.2f}; mid cell n={mid[0]} k={mid[1]} "
                   f"(spgl1 {rows[('spgl1', *mid)]:.2f}) gain {gain:+.2f}; "
                   f"min irwl1-wspgl1 gap {irw_gap:+.2f} at n={irw_cell[0]} "
                   f"k={irw_cell[1]}; grid in {elapsed:.0f}s")


def test_criterion_7_cost_parity(grid):
    records, _ = grid
    means = {}
    for name in ("spgl1", "wspgl1"):
        batch = [r.products for r in records if r.algorithm == name]
        means[name] = sum(batch) / len(batch)
    ratio = means["wspgl1"] / means["spgl1"]
    _report(7, ratio <= 2.0, f"mean products wspgl1/spgl1 = "
                             f"{means['wspgl1']:.0f}/{means['spgl1']:.0f} = {ratio:.2f}x")


def test_criterion_8_support_identification(grid):
    records, _ = grid
    wins = [r for r in records if r.algorithm == "wspgl1" and r.success]
    driver = DriverConfig(omega=_PLAN.omega, support_size=_PLAN.support_size)
    misses = oversized = 0
    for r in wins:
        op, sig, meas = make_instance(r.n, r.N, r.k, r.seed)
        eps = _PLAN.epsilon_rel * float(np.linalg.norm(meas.y))
        result = run_algorithm("wspgl1", op.fork(), meas.y, eps, driver=driver)
        needed = {int(i) for i in sig.support
                  if abs(sig.values[i]) > _PLAN.success_threshold}
        if not needed <= result.final_support.as_set():
            misses += 1
            if r.k > result.final_support.size:
                oversized += 1
    ok = len(wins) > 0 and misses == 0
    detail = (f"{len(wins) - misses}/{len(wins)} successful trials put every "
              f"above-threshold true index in the final support")
    if misses:
        detail += (f"; {oversized}/{misses} misses at cells whose true sparsity "
                   f"exceeds the support-estimate size")
    _report(8, ok, detail)


def test_criterion_9_grid_determinism(grid):
    records, _ = grid
    fresh = records_to_csv(run_grid(_PLAN, jobs=1))
    ok = fresh == records_to_csv(records)
    _report(9, ok, f"re-run produced byte-identical records.csv ({len(fresh)} bytes)")
