"""Phase-transition experiments: seeded trial grids, success accounting,
CSV emission, and solution-path traces.

Instance generation is a pure function of the plan, and every algorithm
in a trial sees the same operator and data through independent counter
views, so reruns of a plan reproduce records byte-for-byte (wall time is
recorded as 0.0 unless timing is requested).
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import IrwConfig, solve_irwl1
from .drivers import DriverConfig, solve_oracle_weighted, solve_spgl1, solve_wspgl1
from .linop import Measurement, gaussian_operator, mix64, sparse_signal

__all__ = [
    "KNOWN_ALGORITHMS",
    "RECORDS_HEADER",
    "TRACE_HEADER",
    "ExperimentPlan",
    "TrialRecord",
    "SummaryRow",
    "make_instance",
    "run_algorithm",
    "run_grid",
    "summarize",
    "records_to_csv",
    "summary_to_csv",
    "trace_to_csv",
    "write_records_csv",
    "write_summary_csv",
    "write_trace_csv",
    "trace_paths",
]

KNOWN_ALGORITHMS = ("spgl1", "wspgl1", "oracle", "irwl1")

RECORDS_HEADER = "algorithm,N,n,k,trial,seed,success,rel_error,newton_iters,products,wall_time_s"
SUMMARY_HEADER = "algorithm,n,k,sparsity,success_rate,mean_products,mean_error"
TRACE_HEADER = "point_index,tau,residual_norm,lambda,weighted"

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ExperimentPlan:
    """Grid description for a phase-transition experiment.

    Row counts are ``round(f * N)`` for each fraction f, and sparsity
    levels ``round(rho * n)`` for each ratio rho. Every trial derives
    its own seed from ``seed_base`` and its grid coordinates, so any
    sub-grid of a plan reproduces the corresponding records exactly.
    """

    N: int = 2000
    n_fractions: tuple = (0.1, 0.25, 0.5)
    sparsity_ratios: tuple = (0.1, 0.2, 0.3, 0.4, 0.5)
    trials: int = 100
    algorithms: tuple = ("spgl1", "wspgl1", "irwl1")
    seed_base: int = 0
    success_threshold: float = 1e-3
    epsilon_rel: float = 1e-6
    omega: float = 0.3
    support_size: int | None = None

    def validation_errors(self):
        """List of problems with this plan; empty when valid."""
        errs = []
        if self.N < 2:
            errs.append(f"N must be at least 2, got {self.N}")
        if self.trials < 1:
            errs.append(f"trials must be at least 1, got {self.trials}")
        if not self.n_fractions:
            errs.append("n_fractions must be nonempty")
        elif not all(0.0 < f < 1.0 for f in self.n_fractions):
            errs.append(f"n_fractions must lie in (0, 1), got {self.n_fractions}")
        if not self.sparsity_ratios:
            errs.append("sparsity_ratios must be nonempty")
        elif not all(0.0 < r < 1.0 for r in self.sparsity_ratios):
            errs.append(f"sparsity_ratios must lie in (0, 1), got {self.sparsity_ratios}")
        if not self.algorithms:
            errs.append("algorithms must be nonempty")
        else:
            unknown = sorted(set(self.algorithms) - set(KNOWN_ALGORITHMS))
            if unknown:
                errs.append(f"unknown algorithms {unknown}; known: {list(KNOWN_ALGORITHMS)}")
            if len(set(self.algorithms)) != len(self.algorithms):
                errs.append(f"algorithms must be distinct, got {self.algorithms}")
        if not self.success_threshold > 0.0:
            errs.append(f"success_threshold must be positive, got {self.success_threshold}")
        if self.epsilon_rel < 0.0:
            errs.append(f"epsilon_rel must be nonnegative, got {self.epsilon_rel}")
        if not 0.0 < self.omega <= 1.0:
            errs.append(f"omega must lie in (0, 1], got {self.omega}")
        if self.support_size is not None and self.support_size < 1:
            errs.append(f"support_size must be at least 1, got {self.support_size}")
        if not errs:
            for f in self.n_fractions:
                n = int(round(f * self.N))
                if not 2 <= n < self.N:
                    errs.append(f"n_fraction {f} gives n={n}, need 2 <= n < N={self.N}")
                    continue
                for rho in self.sparsity_ratios:
                    k = int(round(rho * n))
                    if not 1 <= k < n:
                        errs.append(f"cell (fraction {f}, ratio {rho}) gives k={k}, need 1 <= k < n={n}")
        return errs

    def cells(self):
        """Grid cells as (n, k) pairs, in row-major plan order."""
        out = []
        for f in self.n_fractions:
            n = int(round(f * self.N))
            for rho in self.sparsity_ratios:
                out.append((n, int(round(rho * n))))
        return out

    def trial_seed(self, n, k, trial):
        """Deterministic per-trial seed; independent of the algorithm list."""
        return (self.seed_base ^ mix64(n, k, trial)) & _MASK64


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one algorithm on one planted instance."""

    algorithm: str
    N: int
    n: int
    k: int
    trial: int
    seed: int
    success: bool
    rel_error: float
    newton_iters: int
    products: int
    wall_time_s: float


@dataclass(frozen=True)
class SummaryRow:
    """Per-cell aggregate over trials of one algorithm."""

    algorithm: str
    n: int
    k: int
    sparsity: float
    success_rate: float
    mean_products: float
    mean_error: float


def make_instance(n, N, k, seed):
    """Deterministic planted instance: operator, signal, noiseless data.

    The operator and signal use seeds split from ``seed`` with
    :func:`mix64`, so the same seed always rebuilds the same instance.

    Returns
    -------
    (MeasurementOperator, SparseSignal, Measurement)
    """
    op = gaussian_operator(n, N, mix64(seed, 1))
    signal = sparse_signal(N, k, mix64(seed, 2))
    y = op.matrix @ signal.values
    return op, signal, Measurement(y=y, epsilon=0.0)


def run_algorithm(algorithm, op, y, epsilon, signal=None, driver=None, irw=None):
    """Dispatch one named algorithm on a prepared instance.

    ``signal`` is required for the oracle (it needs the true support).
    """
    cfg = DriverConfig() if driver is None else driver
    if algorithm == "spgl1":
        return solve_spgl1(op, y, epsilon, cfg)
    if algorithm == "wspgl1":
        return solve_wspgl1(op, y, epsilon, cfg)
    if algorithm == "oracle":
        if signal is None:
            raise ValueError("oracle needs the planted signal")
        return solve_oracle_weighted(op, y, epsilon, signal.support, cfg)
    if algorithm == "irwl1":
        return solve_irwl1(op, y, epsilon, IrwConfig(driver=cfg) if irw is None else irw)
    raise ValueError(f"unknown algorithm {algorithm!r}; known: {list(KNOWN_ALGORITHMS)}")


def _run_trial(plan, n, k, trial, measure_time):
    """All algorithms of the plan on one instance; returns TrialRecords."""
    seed = plan.trial_seed(n, k, trial)
    data_op, signal, meas = make_instance(n, plan.N, k, seed)
    y = meas.y
    epsilon = plan.epsilon_rel * float(np.linalg.norm(y))
    driver = DriverConfig(omega=plan.omega, support_size=plan.support_size)
    xnorm = float(np.linalg.norm(signal.values))
    records = []
    for algorithm in plan.algorithms:
        op = data_op.fork()
        started = time.perf_counter() if measure_time else 0.0
        result = run_algorithm(algorithm, op, y, epsilon, signal=signal, driver=driver)
        wall = time.perf_counter() - started if measure_time else 0.0
        rel = float(np.linalg.norm(result.x_hat - signal.values)) / xnorm
        records.append(TrialRecord(
            algorithm=algorithm, N=plan.N, n=n, k=k, trial=trial, seed=seed,
            success=bool(rel <= plan.success_threshold), rel_error=rel,
            newton_iters=result.newton_iters, products=result.total_products,
            wall_time_s=wall,
        ))
    return records


def _run_trial_star(args):
    return _run_trial(*args)


def run_grid(plan, jobs=1, measure_time=False, progress=None):
    """Run every (n, k, trial) cell of the plan and return sorted records.

    Records are sorted by (algorithm, n, k, trial) and, with the default
    ``measure_time=False``, are a pure function of the plan: reruns and
    different ``jobs`` values produce identical lists. Pass
    ``measure_time=True`` to capture real per-trial wall times at the
    cost of that reproducibility.

    Parameters
    ----------
    plan : ExperimentPlan
    jobs : int
        Worker processes; 1 runs in-process.
    measure_time : bool
        Record wall-clock seconds per trial instead of 0.0.
    progress : callable, optional
        Called as ``progress(done_cells, total_cells, n, k)`` after each
        grid cell finishes.

    Returns
    -------
    list of TrialRecord
    """
    errs = plan.validation_errors()
    if errs:
        raise ValueError("invalid plan: " + "; ".join(errs))
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")
    cells = plan.cells()
    records = []
    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for done, (n, k) in enumerate(cells, start=1):
            argsets = [(plan, n, k, t, measure_time) for t in range(plan.trials)]
            if executor is None:
                batches = [_run_trial_star(a) for a in argsets]
            else:
                batches = list(executor.map(_run_trial_star, argsets))
            for batch in batches:
                records.extend(batch)
            if progress is not None:
                progress(done, len(cells), n, k)
    finally:
        if executor is not None:
            executor.shutdown()
    records.sort(key=lambda r: (r.algorithm, r.n, r.k, r.trial))
    return records


def summarize(records):
    """Aggregate records into per-(algorithm, n, k) summary rows.

    Success rates are exact fractions of the trial count; products and
    errors are arithmetic means.
    """
    if not records:
        raise ValueError("no records to summarize")
    groups = {}
    for r in records:
        groups.setdefault((r.algorithm, r.n, r.k), []).append(r)
    rows = []
    for (algorithm, n, k) in sorted(groups):
        batch = groups[(algorithm, n, k)]
        rows.append(SummaryRow(
            algorithm=algorithm, n=n, k=k, sparsity=k / n,
            success_rate=sum(r.success for r in batch) / len(batch),
            mean_products=sum(r.products for r in batch) / len(batch),
            mean_error=sum(r.rel_error for r in batch) / len(batch),
        ))
    return rows


def _fmt(value):
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(value))


def records_to_csv(records):
    """Records as CSV text (LF newlines, shortest round-trip floats)."""
    lines = [RECORDS_HEADER]
    for r in sorted(records, key=lambda r: (r.algorithm, r.n, r.k, r.trial)):
        lines.append(",".join([
            r.algorithm, str(r.N), str(r.n), str(r.k), str(r.trial), str(r.seed),
            str(int(r.success)), _fmt(r.rel_error), str(r.newton_iters),
            str(r.products), _fmt(r.wall_time_s),
        ]))
    return "\n".join(lines) + "\n"


def summary_to_csv(rows):
    """Summary rows as CSV text."""
    lines = [SUMMARY_HEADER]
    for s in rows:
        lines.append(",".join([
            s.algorithm, str(s.n), str(s.k), _fmt(s.sparsity), _fmt(s.success_rate),
            _fmt(s.mean_products), _fmt(s.mean_error),
        ]))
    return "\n".join(lines) + "\n"


def trace_to_csv(trace):
    """A ParetoTrace as CSV text, one row per sampled curve point."""
    lines = [TRACE_HEADER]
    for i, p in enumerate(trace.points):
        lines.append(",".join([
            str(i), _fmt(p.tau), _fmt(p.residual_norm), _fmt(p.lam), str(int(p.weighted)),
        ]))
    return "\n".join(lines) + "\n"


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_records_csv(records, path):
    _write_text(path, records_to_csv(records))


def write_summary_csv(rows, path):
    _write_text(path, summary_to_csv(rows))


def write_trace_csv(trace, path):
    _write_text(path, trace_to_csv(trace))


def trace_paths(op, y, epsilon, true_support, config=None):
    """Solution-path traces of the three drivers on one instance.

    Runs plain SPGL1, WSPGL1, and the oracle-weighted driver on counter
    views of the same operator and returns their Pareto traces keyed by
    algorithm name. The first trace points coincide by construction;
    the curves separate once WSPGL1 starts reweighting.

    Parameters
    ----------
    op : MeasurementOperator
    y : array_like, shape (n,)
    epsilon : float
        Residual target.
    true_support : array_like or SupportEstimate
        True support for the oracle driver.
    config : DriverConfig, optional

    Returns
    -------
    dict mapping name -> ParetoTrace
    """
    cfg = DriverConfig() if config is None else config
    return {
        "spgl1": solve_spgl1(op.fork(), y, epsilon, cfg).trace,
        "wspgl1": solve_wspgl1(op.fork(), y, epsilon, cfg).trace,
        "oracle": solve_oracle_weighted(op.fork(), y, epsilon, true_support, cfg).trace,
    }
