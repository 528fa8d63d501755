"""Tests for the weighted norm pair, support extraction, and projection.

The projection tests check the sort-based implementation against an
independent bisection oracle on the threshold theta, which exists only
here in the test suite.
"""

import numpy as np
import pytest

from wspgl1 import (
    SupportEstimate,
    WeightVector,
    project_weighted_l1_ball,
    top_k_support,
    weighted_l1,
    weighted_linf_dual,
)


def bisect_project(v, w, tau, iters=200):
    """Projection via bisection on theta; independent of the sort-based code."""
    v = np.asarray(v, dtype=np.float64)
    wv = w.values
    if float(np.dot(wv, np.abs(v))) <= tau:
        return v.copy()
    if tau == 0.0:
        return np.zeros_like(v)

    def mass(theta):
        return float(np.dot(wv, np.maximum(np.abs(v) - theta * wv, 0.0)))

    lo, hi = 0.0, float(np.max(np.abs(v) / wv))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mass(mid) > tau:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    return np.sign(v) * np.maximum(np.abs(v) - theta * wv, 0.0)


def test_weight_vector_validation():
    w = WeightVector([0.3, 1.0, 0.5])
    assert len(w) == 3
    assert not w.is_uniform
    assert WeightVector.ones(4).is_uniform
    with pytest.raises(ValueError):
        WeightVector([0.0, 1.0])  # zero breaks the dual norm
    with pytest.raises(ValueError):
        WeightVector([-0.1, 1.0])
    with pytest.raises(ValueError):
        WeightVector([1.5, 1.0])
    with pytest.raises(ValueError):
        WeightVector([])
    with pytest.raises(ValueError):
        WeightVector([[0.5, 0.5]])
    with pytest.raises(ValueError):
        WeightVector([np.nan, 1.0])


def test_weight_vector_is_read_only():
    w = WeightVector([0.5, 1.0])
    with pytest.raises(ValueError):
        w.values[0] = 0.9


def test_two_level_weights():
    w = WeightVector.two_level(5, [1, 3], 0.3)
    assert np.array_equal(w.values, [1.0, 0.3, 1.0, 0.3, 1.0])
    est = SupportEstimate(indices=np.array([0, 4]))
    w2 = WeightVector.two_level(5, est, 0.25)
    assert np.array_equal(w2.values, [0.25, 1.0, 1.0, 1.0, 0.25])
    # empty support degenerates to uniform weights
    assert WeightVector.two_level(4, [], 0.3).is_uniform
    with pytest.raises(ValueError):
        WeightVector.two_level(5, [5], 0.3)
    with pytest.raises(ValueError):
        WeightVector.two_level(5, [0], 0.0)


def test_support_estimate_validation():
    est = SupportEstimate(indices=np.array([4, 1, 2]))
    assert est.size == 3
    assert est.as_set() == {1, 2, 4}
    with pytest.raises(ValueError):
        SupportEstimate(indices=np.array([1, 1]))
    with pytest.raises(ValueError):
        SupportEstimate(indices=np.array([[1, 2]]))


def test_weighted_l1_examples():
    assert weighted_l1([1.0, -2.0, 3.0], WeightVector.ones(3)) == 6.0
    assert weighted_l1([1.0, -2.0, 3.0], WeightVector([0.3, 1.0, 0.3])) == pytest.approx(3.2)
    assert weighted_l1(np.zeros(3), WeightVector.ones(3)) == 0.0
    with pytest.raises(ValueError):
        weighted_l1(np.zeros(4), WeightVector.ones(3))


def test_weighted_l1_uniform_equals_plain_l1():
    rng = np.random.default_rng(3)
    for _ in range(100):
        u = rng.standard_normal(int(rng.integers(1, 30)))
        assert weighted_l1(u, WeightVector.ones(u.size)) == float(np.abs(u).sum())


def test_weighted_linf_dual_examples():
    assert weighted_linf_dual([0.3, 0.2], WeightVector([0.3, 1.0])) == pytest.approx(1.0)
    rng = np.random.default_rng(4)
    for _ in range(50):
        v = rng.standard_normal(int(rng.integers(1, 20)))
        assert weighted_linf_dual(v, WeightVector.ones(v.size)) == float(np.max(np.abs(v)))
    with pytest.raises(ValueError):
        weighted_linf_dual(np.zeros(2), WeightVector.ones(3))


def test_dual_norm_inequality_and_attainment():
    """Holder pair: <u, v> <= |u|_1w |v|_invw, tight at the analytic maximizer."""
    rng = np.random.default_rng(5)
    for _ in range(200):
        N = int(rng.integers(2, 25))
        u = rng.standard_normal(N)
        v = rng.standard_normal(N)
        w = WeightVector(rng.uniform(0.05, 1.0, size=N))
        bound = weighted_l1(u, w) * weighted_linf_dual(v, w)
        assert float(u @ v) <= bound + 1e-12 * max(1.0, bound)
        # maximizer: mass tau/w_j at the argmax of |v_i|/w_i, sign matching v_j
        j = int(np.argmax(np.abs(v) / w.values))
        tau = float(rng.uniform(0.5, 2.0))
        ustar = np.zeros(N)
        ustar[j] = np.sign(v[j]) * tau / w.values[j]
        attained = float(ustar @ v)
        bound = weighted_l1(ustar, w) * weighted_linf_dual(v, w)
        assert attained == pytest.approx(bound, rel=1e-12)


def test_top_k_support_examples():
    assert top_k_support([5.0, -7.0, 1.0], 2).as_set() == {1, 0}
    assert np.array_equal(top_k_support([5.0, -7.0, 1.0], 2).indices, [1, 0])
    # ties break toward the lower index
    assert top_k_support([3.0, 3.0, 0.0], 1).as_set() == {0}
    assert top_k_support(np.arange(6.0), 6).as_set() == set(range(6))
    with pytest.raises(ValueError):
        top_k_support(np.zeros(3), 4)
    with pytest.raises(ValueError):
        top_k_support(np.zeros(3), 0)


def test_top_k_orders_by_magnitude():
    rng = np.random.default_rng(6)
    for _ in range(50):
        u = rng.standard_normal(20)
        k = int(rng.integers(1, 21))
        idx = top_k_support(u, k).indices
        mags = np.abs(u)[idx]
        assert np.all(np.diff(mags) <= 0)  # largest first
        assert np.min(mags) >= np.max(np.abs(np.delete(u, idx))) if k < 20 else True


def test_projection_trivial_cases():
    w = WeightVector.ones(3)
    v = np.array([0.5, -0.25, 0.1])
    assert np.array_equal(project_weighted_l1_ball(v, w, 2.0), v)  # interior point
    assert np.array_equal(project_weighted_l1_ball(v, w, 0.0), np.zeros(3))
    with pytest.raises(ValueError):
        project_weighted_l1_ball(v, w, -1.0)
    with pytest.raises(ValueError):
        project_weighted_l1_ball(np.zeros(4), w, 1.0)


def test_projection_pinned_example():
    # theta = 1 removes one unit of mass from each coordinate
    u = project_weighted_l1_ball(np.array([3.0, 1.0]), WeightVector.ones(2), 2.0)
    oracle = bisect_project(np.array([3.0, 1.0]), WeightVector.ones(2), 2.0)
    assert np.allclose(u, [2.0, 0.0], atol=1e-12)
    assert np.allclose(u, oracle, atol=1e-10)


def test_projection_matches_bisection_oracle():
    rng = np.random.default_rng(7)
    for _ in range(300):
        N = int(rng.integers(1, 21))
        v = rng.standard_normal(N) * float(rng.uniform(0.1, 10.0))
        w = WeightVector(rng.uniform(0.05, 1.0, size=N))
        tau = float(rng.uniform(0.0, 1.2) * weighted_l1(v, w))
        u = project_weighted_l1_ball(v, w, tau)
        assert np.max(np.abs(u - bisect_project(v, w, tau))) <= 1e-8


def test_projection_active_constraint_accuracy():
    rng = np.random.default_rng(8)
    for _ in range(200):
        N = int(rng.integers(2, 30))
        v = rng.standard_normal(N) * 3.0
        w = WeightVector(rng.uniform(0.1, 1.0, size=N))
        tau = float(rng.uniform(0.05, 0.9) * weighted_l1(v, w))
        mass = weighted_l1(project_weighted_l1_ball(v, w, tau), w)
        assert tau - 1e-10 * max(1.0, tau) <= mass <= tau


def test_projection_idempotent():
    rng = np.random.default_rng(9)
    for _ in range(100):
        N = int(rng.integers(2, 25))
        v = rng.standard_normal(N) * 2.0
        w = WeightVector(rng.uniform(0.1, 1.0, size=N))
        tau = float(rng.uniform(0.1, 1.5) * weighted_l1(v, w))
        u = project_weighted_l1_ball(v, w, tau)
        again = project_weighted_l1_ball(u, w, tau)
        assert np.max(np.abs(again - u)) <= 1e-10


def test_projection_nonexpansive():
    rng = np.random.default_rng(10)
    for _ in range(100):
        N = int(rng.integers(2, 25))
        v1 = rng.standard_normal(N)
        v2 = rng.standard_normal(N)
        w = WeightVector(rng.uniform(0.1, 1.0, size=N))
        tau = float(rng.uniform(0.2, 2.0))
        d_in = float(np.linalg.norm(v1 - v2))
        d_out = float(np.linalg.norm(
            project_weighted_l1_ball(v1, w, tau) - project_weighted_l1_ball(v2, w, tau)))
        assert d_out <= d_in + 1e-12


def test_projection_optimality_certificate():
    """The projection is closer to v than any random feasible point."""
    rng = np.random.default_rng(11)
    for _ in range(100):
        N = int(rng.integers(2, 20))
        v = rng.standard_normal(N) * 2.0
        w = WeightVector(rng.uniform(0.1, 1.0, size=N))
        tau = float(rng.uniform(0.2, 1.0) * weighted_l1(v, w))
        u = project_weighted_l1_ball(v, w, tau)
        du = float(np.linalg.norm(u - v))
        for _ in range(5):
            z = rng.standard_normal(N)
            zmass = weighted_l1(z, w)
            if zmass > tau:
                z *= tau / zmass * rng.uniform(0.0, 1.0)
            assert du <= float(np.linalg.norm(z - v)) + 1e-9


def test_projection_returns_fresh_array():
    v = np.array([0.1, 0.2])
    u = project_weighted_l1_ball(v, WeightVector.ones(2), 5.0)
    assert u is not v
    u[0] = 9.0
    assert v[0] == 0.1
