"""Dense measurement operators and seeded problem-instance generation."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MeasurementOperator",
    "SparseSignal",
    "Measurement",
    "gaussian_operator",
    "sparse_signal",
    "mix64",
]

_MASK64 = (1 << 64) - 1


def mix64(*values):
    """Mix integers into a 64-bit seed (SplitMix64 finalizer per value).

    Pure integer arithmetic, so derived seeds are identical across
    platforms and processes. Used to split a base seed into per-trial
    and per-stream seeds.

    Parameters
    ----------
    *values : int
        One or more integers to fold into the hash.

    Returns
    -------
    int
        Unsigned 64-bit value.
    """
    h = 0x9E3779B97F4A7C15
    for v in values:
        h = (h + (int(v) & _MASK64)) & _MASK64
        h ^= h >> 30
        h = (h * 0xBF58476D1CE4E5B9) & _MASK64
        h ^= h >> 27
        h = (h * 0x94D049BB133111EB) & _MASK64
        h ^= h >> 31
    return h


class MeasurementOperator:
    """Dense real n-by-N measurement matrix with product accounting.

    The matrix is copied, stored row-major, and frozen at construction;
    only the two product counters mutate afterwards. A solver's cost on
    an instance is the increase of ``forward_count + adjoint_count``
    across its run. Instances are not meant to be shared by concurrent
    solves: give each solver its own view (see :meth:`fork`).

    Parameters
    ----------
    matrix : array_like, shape (n, N)
        Measurement matrix with n <= N, finite entries.
    """

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=np.float64, order="C", copy=True)
        if matrix.ndim != 2:
            raise ValueError("measurement matrix must be 2-d")
        n, cols = matrix.shape
        if n < 1 or cols < 1:
            raise ValueError("measurement matrix must be nonempty")
        if n > cols:
            raise ValueError(f"operator must be underdetermined: n={n} exceeds N={cols}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("measurement matrix entries must be finite")
        matrix.setflags(write=False)
        self._matrix = matrix
        self.forward_count = 0
        self.adjoint_count = 0

    @property
    def matrix(self):
        """Read-only view of the underlying matrix."""
        return self._matrix

    @property
    def rows(self):
        return self._matrix.shape[0]

    @property
    def cols(self):
        return self._matrix.shape[1]

    @property
    def shape(self):
        return self._matrix.shape

    @property
    def product_count(self):
        """Total matrix-vector products applied so far (forward + adjoint)."""
        return self.forward_count + self.adjoint_count

    def apply(self, u):
        """Forward product A @ u. Increments ``forward_count``."""
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (self.cols,):
            raise ValueError(f"apply expects a vector of length {self.cols}, got shape {u.shape}")
        self.forward_count += 1
        return self._matrix @ u

    def apply_adjoint(self, v):
        """Adjoint product A.T @ v. Increments ``adjoint_count``."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.rows,):
            raise ValueError(f"apply_adjoint expects a vector of length {self.rows}, got shape {v.shape}")
        self.adjoint_count += 1
        return self._matrix.T @ v

    def fork(self):
        """New operator sharing this matrix, with counters reset to zero."""
        clone = object.__new__(MeasurementOperator)
        clone._matrix = self._matrix
        clone.forward_count = 0
        clone.adjoint_count = 0
        return clone


@dataclass(frozen=True, eq=False)
class SparseSignal:
    """Planted k-sparse signal together with its true support.

    ``support`` holds the sorted indices of the nonzero entries;
    ``values`` is the full-length vector.
    """

    values: np.ndarray
    support: np.ndarray
    seed: int

    @property
    def k(self):
        return int(self.support.size)


@dataclass(frozen=True, eq=False)
class Measurement:
    """Observed data vector and the noise level it was produced with."""

    y: np.ndarray
    epsilon: float = 0.0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        if y.ndim != 1 or y.size == 0:
            raise ValueError("measurement vector must be a nonempty 1-d vector")
        if not np.all(np.isfinite(y)):
            raise ValueError("measurement vector must be finite")
        if not np.isfinite(self.epsilon) or self.epsilon < 0.0:
            raise ValueError(f"epsilon must be nonnegative and finite, got {self.epsilon}")
        object.__setattr__(self, "y", y)


def gaussian_operator(n, N, seed):
    """Random operator with i.i.d. Gaussian entries of variance 1/n.

    The 1/sqrt(n) scaling gives columns unit expected norm, keeping dual
    quantities comparable across row counts. Entries come from NumPy's
    PCG64 stream seeded with ``seed``, so identical arguments reproduce
    the matrix bit-for-bit.

    Parameters
    ----------
    n, N : int
        Row and column counts, 1 <= n <= N.
    seed : int
        Seed for the generator.

    Returns
    -------
    MeasurementOperator
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if n > N:
        raise ValueError(f"need n <= N, got n={n}, N={N}")
    rng = np.random.default_rng(seed)
    return MeasurementOperator(rng.standard_normal((n, N)) / np.sqrt(n))


def sparse_signal(N, k, seed):
    """Planted k-sparse vector: uniform random support, Gaussian values.

    The support is drawn without replacement among {0, ..., N-1} and the
    k nonzero values are standard normal. Fully determined by ``seed``.

    Parameters
    ----------
    N : int
        Ambient dimension.
    k : int
        Number of nonzeros, 1 <= k <= N.
    seed : int
        Seed for the generator.

    Returns
    -------
    SparseSignal
    """
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if k > N:
        raise ValueError(f"k must not exceed N, got k={k}, N={N}")
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(N, size=k, replace=False)).astype(np.intp)
    values = np.zeros(N)
    values[support] = rng.standard_normal(k)
    values.setflags(write=False)
    support.setflags(write=False)
    return SparseSignal(values=values, support=support, seed=int(seed))
