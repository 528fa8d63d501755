"""Newton root finding on the (weighted) Pareto curve.

A driver walks tau along the trade-off curve phi(tau) = ||y - A x_tau||_2
of the weighted LASSO family until phi(tau) = epsilon, solving one
subproblem per step and warm-starting each solve at the previous iterate.
The curve is convex and differentiable with slope -lambda, where lambda
is the weighted dual norm of A.T r divided by ||r||_2, so the Newton
update needs nothing beyond quantities the subproblem solver already
computed. Weight schedules distinguish the drivers: uniform weights give
plain basis pursuit denoise; a fixed two-level vector solves the
support-informed weighted problem; re-estimating the support from each
iterate gives the adaptive weighted driver.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .norms import (
    SupportEstimate,
    WeightVector,
    top_k_support,
    weighted_l1,
    weighted_linf_dual,
)
from .spg import _EXACT_FIT_RTOL, SpgConfig, solve_lasso

# iteration cap for the full-accuracy polish of a loosened subproblem; the
# outer loop recovers on the next Newton step if the cap ever bites
_POLISH_MAX_ITERS = 2000

__all__ = [
    "DriverConfig",
    "TracePoint",
    "ParetoTrace",
    "RecoveryResult",
    "default_support_size",
    "solve_spgl1",
    "solve_weighted_bpdn",
    "solve_wspgl1",
    "solve_oracle_weighted",
    "pareto_phi",
]


@dataclass(frozen=True)
class DriverConfig:
    """Constants for the root-finding drivers.

    ``support_size`` is the size of the support estimate used by the
    adaptive driver (and for the reported final support); ``None`` picks
    :func:`default_support_size`. ``root_tol`` is relative to
    max(1, ||y||_2).
    """

    omega: float = 0.3
    support_size: int | None = None
    max_newton_iters: int = 40
    root_tol: float = 1e-6
    spg: SpgConfig = field(default_factory=SpgConfig)

    def __post_init__(self):
        if not 0.0 < self.omega <= 1.0:
            raise ValueError(f"omega must lie in (0, 1], got {self.omega}")
        if self.support_size is not None and self.support_size < 1:
            raise ValueError(f"support_size must be at least 1, got {self.support_size}")
        if self.max_newton_iters < 1:
            raise ValueError(f"max_newton_iters must be at least 1, got {self.max_newton_iters}")
        if not self.root_tol > 0.0:
            raise ValueError(f"root_tol must be positive, got {self.root_tol}")


@dataclass(frozen=True)
class TracePoint:
    """One sampled point of the Pareto curve.

    ``lam`` is the dual variable at the point (the negative curve slope);
    ``weighted`` records whether non-uniform weights were in effect.
    """

    tau: float
    residual_norm: float
    lam: float
    weighted: bool


@dataclass
class ParetoTrace:
    """Sampled root-finding path.

    ``points`` starts at tau = 0 and appends one point per Newton step.
    ``rebase_events`` collects (old_tau, new_tau) pairs recorded when a
    weight change re-expressed the current iterate's radius in the new
    weighted norm.
    """

    points: list = field(default_factory=list)
    rebase_events: list = field(default_factory=list)


@dataclass(eq=False)
class RecoveryResult:
    """Driver output: estimate, support, cost counters, and curve trace."""

    x_hat: np.ndarray
    final_support: SupportEstimate
    newton_iters: int
    total_products: int
    trace: ParetoTrace
    converged: bool


def default_support_size(n, N):
    """Support-estimate size n / (2 ln(N/n)), rounded and clamped to [1, n-1].

    The ratio mirrors the k log(N/k) sampling rule of thumb: it is the
    largest sparsity one can hope to recover from n rows. Requires
    2 <= n < N so the clamp range is nonempty.
    """
    if not 2 <= n < N:
        raise ValueError(f"need 2 <= n < N, got n={n}, N={N}")
    k = int(round(n / (2.0 * math.log(N / n))))
    return max(1, min(n - 1, k))


def _resolve_support_size(cfg, op):
    if cfg.support_size is not None:
        if cfg.support_size >= op.rows:
            raise ValueError(
                f"support_size must be smaller than n={op.rows}, got {cfg.support_size}")
        return cfg.support_size
    return default_support_size(op.rows, op.cols)


def _run_newton(op, y, epsilon, cfg, schedule):
    """Root-find phi_w(tau) = epsilon with per-iteration weights.

    ``schedule(t, x_prev)`` returns the WeightVector for Newton step
    t >= 1, given the iterate entering the step. Returns the tuple
    (x, trace, iters, products, converged).
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (op.rows,):
        raise ValueError(f"y has shape {y.shape}, expected ({op.rows},)")
    if not np.all(np.isfinite(y)):
        raise ValueError("y must be finite")
    if not np.isfinite(epsilon) or epsilon < 0.0:
        raise ValueError(f"epsilon must be nonnegative and finite, got {epsilon}")

    products_before = op.product_count
    ynorm = float(np.linalg.norm(y))
    trace = ParetoTrace()
    x = np.zeros(op.cols)

    if epsilon >= ynorm:
        # x = 0 is already feasible for the epsilon constraint
        w1 = schedule(1, x)
        lam0 = 0.0
        if ynorm > 0.0:
            lam0 = weighted_linf_dual(op.apply_adjoint(y), w1) / ynorm
        trace.points.append(TracePoint(0.0, ynorm, lam0, not w1.is_uniform))
        return x, trace, 0, op.product_count - products_before, True

    exact_fit = _EXACT_FIT_RTOL * max(1.0, ynorm)
    root_slack = cfg.root_tol * max(1.0, ynorm)
    r = y.copy()
    rnorm = ynorm
    atr = op.apply_adjoint(y)
    w_prev = None
    tau = 0.0
    lo, hi = 0.0, None
    converged = False
    iters = 0
    for t in range(1, cfg.max_newton_iters + 1):
        w = schedule(t, x)
        changed = w_prev is None or not np.array_equal(w.values, w_prev.values)
        if t == 1:
            lam0 = weighted_linf_dual(atr, w) / rnorm
            trace.points.append(TracePoint(0.0, rnorm, lam0, not w.is_uniform))
        tau_base = weighted_l1(x, w)
        if changed:
            if t > 1:
                trace.rebase_events.append((tau, tau_base))
            # the bracket lives in the current weighted norm; reset it
            lo, hi = 0.0, None
        gdual = weighted_linf_dual(atr, w)
        if rnorm <= exact_fit or gdual <= 0.0:
            # curve floor: the residual cannot shrink further
            if hi is None:
                break
            tau = 0.5 * (lo + hi)
        else:
            step = (rnorm - epsilon) * rnorm / gdual
            base = max(tau_base, lo) if rnorm > epsilon else tau_base
            tau = base + step
            if hi is not None and not (lo < tau < hi):
                tau = 0.5 * (lo + hi)
        # inexact Newton: far from the root a crude curve value steers the
        # update just as well, so let the subproblem gap tolerance track the
        # remaining root error, floored at the configured tolerance
        rel_root = abs(rnorm - epsilon) / max(1.0, rnorm)
        tol = min(0.1, max(cfg.spg.optimality_tol, 0.1 * rel_root))
        loosened = tol > cfg.spg.optimality_tol
        if loosened:
            # a loosened solve only steers the next update; cap its effort
            # and let later iterations resume from the returned point
            sub_cfg = replace(cfg.spg, optimality_tol=tol,
                              max_iterations=min(cfg.spg.max_iterations,
                                                 _POLISH_MAX_ITERS))
        else:
            sub_cfg = cfg.spg
        entry_rel = rel_root
        prev = (x, r, rnorm, atr)
        sol = solve_lasso(op, y, w, tau, x0=x, config=sub_cfg)
        if (loosened and abs(sol.residual_norm - epsilon) <= root_slack
                and sol.status not in ("residual_floor", "exact_fit")):
            # the root test may hold only loosely: polish at the configured
            # tolerance before testing acceptance
            polish_cfg = replace(cfg.spg, max_iterations=min(cfg.spg.max_iterations,
                                                             _POLISH_MAX_ITERS))
            sol = solve_lasso(op, y, w, tau, x0=sol.x, config=polish_cfg)
        x, r, rnorm, atr = sol.x, sol.residual, sol.residual_norm, sol.adjoint_residual
        trace.points.append(TracePoint(tau, rnorm, sol.dual_lambda, not w.is_uniform))
        w_prev = w
        iters = t
        in_band = abs(rnorm - epsilon) <= root_slack
        if in_band and (entry_rel <= 0.01 or sol.status == "optimal"):
            # past the exact-fit radius the subproblem solution is not
            # unique, and a solve that plunges to the residual floor from a
            # distant start can land anywhere on the optimal face; only
            # accept the root from a short hop (or a gap-certified stop) so
            # the minimizer is pinned down before landing
            converged = True
            break
        if in_band or rnorm < epsilon:
            # untrusted point in or past the root band: record the band
            # edge but retry from the pre-solve iterate, since adopting it
            # would poison later warm starts; the identical re-proposal
            # then falls outside (lo, hi) and bisects instead
            hi = tau if hi is None else min(hi, tau)
            x, r, rnorm, atr = prev
            if hi - lo <= 1e-12 * max(1.0, hi):
                break
        else:
            # the scaled dual value bounds the curve from below; only a
            # certified value may raise lo, since an inexact residual can
            # sit above epsilon at a tau that is past the root
            dual_value = (float(y @ r) - tau * weighted_linf_dual(atr, w)) / rnorm
            if dual_value > epsilon:
                lo = max(lo, tau)
    return x, trace, iters, op.product_count - products_before, converged


def solve_spgl1(op, y, epsilon, config=None):
    """Basis pursuit denoise: min ||u||_1 s.t. ||A u - y||_2 <= epsilon.

    Newton root finding on the plain Pareto curve with uniform weights.

    Parameters
    ----------
    op : MeasurementOperator
    y : array_like, shape (n,)
        Data vector.
    epsilon : float
        Residual target, epsilon >= 0. Values at or above ||y||_2
        return x = 0 immediately.
    config : DriverConfig, optional

    Returns
    -------
    RecoveryResult
    """
    cfg = DriverConfig() if config is None else config
    w = WeightVector.ones(op.cols)
    x, trace, iters, products, conv = _run_newton(op, y, epsilon, cfg, lambda t, xp: w)
    support = top_k_support(x, _resolve_support_size(cfg, op))
    return RecoveryResult(x_hat=x, final_support=support, newton_iters=iters,
                          total_products=products, trace=trace, converged=conv)


def solve_weighted_bpdn(op, y, epsilon, weights, config=None):
    """Weighted basis pursuit denoise with a fixed weight vector.

    Same root finding as :func:`solve_spgl1` but on the curve of the
    weighted problem min ||u||_{1,w} s.t. ||A u - y||_2 <= epsilon.
    """
    cfg = DriverConfig() if config is None else config
    if len(weights) != op.cols:
        raise ValueError(f"weights have length {len(weights)}, expected {op.cols}")
    x, trace, iters, products, conv = _run_newton(op, y, epsilon, cfg, lambda t, xp: weights)
    support = top_k_support(x, _resolve_support_size(cfg, op))
    return RecoveryResult(x_hat=x, final_support=support, newton_iters=iters,
                          total_products=products, trace=trace, converged=conv)


def solve_wspgl1(op, y, epsilon, config=None):
    """Weighted SPGL1: support-adaptive weights inside the root finding.

    Each Newton step re-estimates the support as the nonzero entries
    among the ``support_size`` largest magnitudes of the current iterate
    and solves the next subproblem with weight ``omega`` there and one
    elsewhere. The first step starts from x = 0, whose estimated support
    is empty, so it coincides with the uniform driver. On a weight
    change the current radius is re-expressed in the new weighted norm
    before the Newton update (recorded in ``trace.rebase_events``).

    Parameters and return value as in :func:`solve_spgl1`.
    """
    cfg = DriverConfig() if config is None else config
    k_est = _resolve_support_size(cfg, op)
    uniform = WeightVector.ones(op.cols)

    def schedule(t, x_prev):
        idx = top_k_support(x_prev, k_est).indices if np.any(x_prev) else np.empty(0, np.intp)
        idx = idx[x_prev[idx] != 0.0]
        if idx.size == 0:
            return uniform
        return WeightVector.two_level(op.cols, idx, cfg.omega)

    x, trace, iters, products, conv = _run_newton(op, y, epsilon, cfg, schedule)
    support = top_k_support(x, k_est)
    return RecoveryResult(x_hat=x, final_support=support, newton_iters=iters,
                          total_products=products, trace=trace, converged=conv)


def solve_oracle_weighted(op, y, epsilon, true_support, config=None):
    """Weighted basis pursuit denoise with oracle support weights.

    Places weight ``omega`` on the given true support and one elsewhere,
    then root-finds the weighted curve. This is the performance ceiling
    for any support-adaptive scheme with the same omega.

    Parameters
    ----------
    op, y, epsilon, config
        As in :func:`solve_spgl1`.
    true_support : array_like or SupportEstimate
        Indices of the signal's true support.
    """
    cfg = DriverConfig() if config is None else config
    idx = np.asarray(getattr(true_support, "indices", true_support), dtype=np.intp)
    w = WeightVector.two_level(op.cols, idx, cfg.omega)
    x, trace, iters, products, conv = _run_newton(op, y, epsilon, cfg, lambda t, xp: w)
    return RecoveryResult(x_hat=x, final_support=SupportEstimate(indices=idx),
                          newton_iters=iters, total_products=products, trace=trace,
                          converged=conv)


def pareto_phi(op, y, weights, tau_grid, config=None):
    """Sample the Pareto curve phi(tau) = min ||A u - y||_2 on a tau grid.

    Solves the weighted LASSO at each grid point to high accuracy
    (default: relative gap 1e-9), warm-starting along the grid, and
    returns the sampled curve as a trace. Intended for curve studies
    and derivative checks rather than recovery.

    Parameters
    ----------
    op : MeasurementOperator
    y : array_like, shape (n,)
    weights : WeightVector
    tau_grid : array_like
        Nonnegative, strictly increasing radii.
    config : SpgConfig, optional
        Subproblem accuracy; the default is much tighter than the
        drivers' so sampled values behave like true curve points.

    Returns
    -------
    ParetoTrace
    """
    cfg = SpgConfig(optimality_tol=1e-9, max_iterations=100000) if config is None else config
    grid = np.asarray(tau_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("tau_grid must be a nonempty 1-d array")
    if not np.all(np.isfinite(grid)) or grid[0] < 0.0:
        raise ValueError("tau_grid must be finite and nonnegative")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("tau_grid must be strictly increasing")
    trace = ParetoTrace()
    x = None
    for tau in grid:
        sol = solve_lasso(op, y, weights, float(tau), x0=x, config=cfg)
        trace.points.append(TracePoint(float(tau), sol.residual_norm, sol.dual_lambda,
                                       not weights.is_uniform))
        x = sol.x
    return trace
