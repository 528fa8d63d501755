"""Sparse signal recovery via Pareto root finding.

Solvers for basis pursuit denoise and its weighted variants built on a
spectral projected-gradient LASSO kernel: plain SPGL1, the
support-adaptive WSPGL1, an oracle-weighted reference, and an
iteratively reweighted l1 baseline, plus a phase-transition experiment
harness and CLI.
"""

from .baselines import IrwConfig, reweight, solve_irwl1
from .drivers import (
    DriverConfig,
    ParetoTrace,
    RecoveryResult,
    TracePoint,
    default_support_size,
    pareto_phi,
    solve_oracle_weighted,
    solve_spgl1,
    solve_weighted_bpdn,
    solve_wspgl1,
)
from .harness import (
    KNOWN_ALGORITHMS,
    ExperimentPlan,
    SummaryRow,
    TrialRecord,
    make_instance,
    records_to_csv,
    run_algorithm,
    run_grid,
    summarize,
    summary_to_csv,
    trace_paths,
    trace_to_csv,
    write_records_csv,
    write_summary_csv,
    write_trace_csv,
)
from .linop import (
    Measurement,
    MeasurementOperator,
    SparseSignal,
    gaussian_operator,
    mix64,
    sparse_signal,
)
from .norms import (
    SupportEstimate,
    WeightVector,
    project_weighted_l1_ball,
    top_k_support,
    weighted_l1,
    weighted_linf_dual,
)
from .spg import LassoSolution, SpgConfig, duality_gap, solve_lasso

__version__ = "0.1.0"

__all__ = [
    "DriverConfig",
    "ExperimentPlan",
    "IrwConfig",
    "KNOWN_ALGORITHMS",
    "LassoSolution",
    "Measurement",
    "MeasurementOperator",
    "ParetoTrace",
    "RecoveryResult",
    "SparseSignal",
    "SpgConfig",
    "SummaryRow",
    "SupportEstimate",
    "TracePoint",
    "TrialRecord",
    "WeightVector",
    "default_support_size",
    "duality_gap",
    "gaussian_operator",
    "make_instance",
    "mix64",
    "pareto_phi",
    "project_weighted_l1_ball",
    "records_to_csv",
    "reweight",
    "run_algorithm",
    "run_grid",
    "solve_irwl1",
    "solve_lasso",
    "solve_oracle_weighted",
    "solve_spgl1",
    "solve_weighted_bpdn",
    "solve_wspgl1",
    "sparse_signal",
    "summarize",
    "summary_to_csv",
    "top_k_support",
    "trace_paths",
    "trace_to_csv",
    "weighted_l1",
    "weighted_linf_dual",
    "write_records_csv",
    "write_summary_csv",
    "write_trace_csv",
]
