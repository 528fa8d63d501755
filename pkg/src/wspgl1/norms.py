"""Weighted one-norm machinery: the norm/dual pair, top-k support
extraction, and exact Euclidean projection onto the weighted l1 ball."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WeightVector",
    "SupportEstimate",
    "weighted_l1",
    "weighted_linf_dual",
    "top_k_support",
    "project_weighted_l1_ball",
]


class WeightVector:
    """Per-coordinate weights w in (0, 1]^N.

    Defines the weighted one-norm sum_i w_i |u_i| and its dual norm
    max_i |v_i| / w_i. Zero weights are rejected because the dual norm
    divides by w. The stored array is read-only; ``is_uniform`` flags
    all-ones weights so hot paths can skip the weighting arithmetic.
    """

    __slots__ = ("values", "is_uniform")

    def __init__(self, values):
        w = np.array(values, dtype=np.float64, copy=True)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must form a nonempty 1-d vector")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w <= 0.0) or np.any(w > 1.0):
            raise ValueError("weights must lie in (0, 1]")
        w.setflags(write=False)
        self.values = w
        self.is_uniform = bool(np.all(w == 1.0))

    def __len__(self):
        return self.values.size

    @classmethod
    def ones(cls, size):
        """Uniform weights of the given length."""
        return cls(np.ones(size))

    @classmethod
    def two_level(cls, size, support, omega):
        """Weights equal to ``omega`` on ``support`` and one elsewhere.

        ``support`` may be an index array or a :class:`SupportEstimate`;
        an empty support gives uniform weights.
        """
        if not 0.0 < omega <= 1.0:
            raise ValueError(f"omega must lie in (0, 1], got {omega}")
        idx = np.asarray(getattr(support, "indices", support), dtype=np.intp)
        if idx.ndim != 1:
            raise ValueError("support must be a 1-d index collection")
        if idx.size and (idx.min() < 0 or idx.max() >= size):
            raise ValueError(f"support indices must lie in [0, {size})")
        w = np.ones(size)
        w[idx] = omega
        return cls(w)


@dataclass(frozen=True, eq=False)
class SupportEstimate:
    """Index set of presumed-support coordinates.

    Indices produced by :func:`top_k_support` are ordered by decreasing
    magnitude of the source vector.
    """

    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp)
        if idx.ndim != 1:
            raise ValueError("support indices must be 1-d")
        if np.unique(idx).size != idx.size:
            raise ValueError("support indices must be distinct")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self):
        return int(self.indices.size)

    def as_set(self):
        return set(int(i) for i in self.indices)


def _check_length(u, w, name):
    if u.shape != (len(w),):
        raise ValueError(f"{name} has shape {u.shape}, expected ({len(w)},)")


def weighted_l1(u, w):
    """Weighted one-norm sum_i w_i |u_i|.

    Parameters
    ----------
    u : array_like
        Vector to measure.
    w : WeightVector
        Weights, same length as ``u``.

    Returns
    -------
    float
    """
    u = np.asarray(u, dtype=np.float64)
    _check_length(u, w, "u")
    if w.is_uniform:
        # bitwise identical to the plain l1 norm, not just close
        return float(np.abs(u).sum())
    return float(np.dot(w.values, np.abs(u)))


def weighted_linf_dual(v, w):
    """Dual of the weighted one-norm: max_i |v_i| / w_i."""
    v = np.asarray(v, dtype=np.float64)
    _check_length(v, w, "v")
    return float(np.max(np.abs(v) / w.values))


def top_k_support(u, k):
    """Indices of the k largest-magnitude entries, largest first.

    Ties are broken toward the lower index, so the result is a
    deterministic function of ``u``.

    Parameters
    ----------
    u : array_like
        Vector to rank.
    k : int
        Number of indices to return, 1 <= k <= len(u).

    Returns
    -------
    SupportEstimate
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1:
        raise ValueError("u must be 1-d")
    if not 1 <= k <= u.size:
        raise ValueError(f"k must lie in [1, {u.size}], got {k}")
    order = np.argsort(-np.abs(u), kind="stable")
    return SupportEstimate(indices=order[:k].copy())


def project_weighted_l1_ball(v, w, tau):
    """Euclidean projection of v onto {u : sum_i w_i |u_i| <= tau}.

    The projection is weighted soft thresholding,
    u_i = sign(v_i) * max(|v_i| - theta * w_i, 0), where theta >= 0 is
    the root of the piecewise-linear equation
    sum_i w_i * max(|v_i| - theta * w_i, 0) = tau. The root is located
    exactly by sorting the breakpoints |v_i| / w_i and scanning prefix
    sums, so the whole projection is O(N log N).

    Parameters
    ----------
    v : array_like
        Point to project.
    w : WeightVector
        Weights, same length as ``v``.
    tau : float
        Ball radius, tau >= 0.

    Returns
    -------
    numpy.ndarray
        The projected vector (always a fresh array).
    """
    v = np.asarray(v, dtype=np.float64)
    _check_length(v, w, "v")
    if not np.isfinite(tau) or tau < 0.0:
        raise ValueError(f"tau must be nonnegative and finite, got {tau}")
    wv = w.values
    a = np.abs(v)
    if w.is_uniform:
        if float(np.sum(a)) <= tau:
            return v.copy()
        if tau == 0.0:
            return np.zeros_like(v)
        breakpoints = np.sort(a)[::-1]
        thetas = (np.cumsum(breakpoints) - tau) / np.arange(1.0, a.size + 1.0)
    else:
        if float(np.dot(wv, a)) <= tau:
            return v.copy()
        if tau == 0.0:
            return np.zeros_like(v)
        ratios = a / wv
        order = np.argsort(-ratios)
        wa = (wv * a)[order]
        ww = (wv * wv)[order]
        thetas = (np.cumsum(wa) - tau) / np.cumsum(ww)
        breakpoints = ratios[order]
    # the optimal prefix is the largest one whose candidate threshold
    # still keeps its own breakpoint active; tau > 0 makes prefix 1 valid
    active = thetas < breakpoints
    last = int(np.nonzero(active)[0][-1])
    theta = thetas[last]
    if w.is_uniform:
        trimmed = np.maximum(a - theta, 0.0)
    else:
        trimmed = np.maximum(a - theta * wv, 0.0)
    u = np.sign(v) * trimmed
    # rounding in the prefix sums can leave the result a hair outside;
    # each pass shrinks the mass by at least an ulp, so this terminates
    for _ in range(4):
        mass = weighted_l1(u, w)
        if mass <= tau:
            break
        u *= tau / mass
    return u
