"""Matrix-series container, vec/Kronecker utilities and the matrix normal law.

Conventions used throughout the package:

* ``vec`` stacks columns (column-major), so that vec(A X B') = (B kron A) vec(X).
* A matrix normal draw E ~ MN(0, S1, S2) satisfies vec(E) ~ N(0, S2 kron S1),
  where S1 is the row covariance and S2 the column covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MatrixSeries",
    "MatNormSpec",
    "vec",
    "unvec",
    "kron",
    "matnorm_logpdf",
    "matnorm_sample",
]

_SYM_TOL = 1e-10

_LOG_2PI = float(np.log(2.0 * np.pi))


def _as_float_array(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class MatrixSeries:
    """An ordered sequence of T real matrices, each n1 x n2.

    ``data`` has shape (T, n1, n2).  Entries must be finite; the array is
    frozen after construction so instances can be shared freely.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = _as_float_array(self.data, "series data")
        if arr.ndim != 3:
            raise ValueError(f"series data must be 3-dimensional (T, n1, n2), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise ValueError(f"series dimensions must be positive, got shape {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def t_len(self) -> int:
        return self.data.shape[0]

    @property
    def n1(self) -> int:
        return self.data.shape[1]

    @property
    def n2(self) -> int:
        return self.data.shape[2]

    def __len__(self) -> int:
        return self.t_len

    def diff(self) -> "MatrixSeries":
        """First differences, a series of length T - 1."""
        if self.t_len < 2:
            raise ValueError("need at least two observations to difference")
        return MatrixSeries(np.diff(self.data, axis=0))


def _cholesky_spd(m: np.ndarray, name: str) -> np.ndarray:
    """Cholesky factor of ``m``, rejecting asymmetric or non-PD input."""
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if np.max(np.abs(m - m.T), initial=0.0) > _SYM_TOL:
        raise ValueError(f"{name} is not symmetric within {_SYM_TOL:g}")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{name} is not positive definite") from exc


@dataclass(frozen=True)
class MatNormSpec:
    """Row/column covariance pair (S1, S2) of a matrix normal distribution.

    Both matrices must be symmetric positive definite; this is verified by
    Cholesky factorization at construction time.
    """

    sigma1: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        s1 = _as_float_array(self.sigma1, "sigma1").copy()
        s2 = _as_float_array(self.sigma2, "sigma2").copy()
        _cholesky_spd(s1, "sigma1")
        _cholesky_spd(s2, "sigma2")
        s1.setflags(write=False)
        s2.setflags(write=False)
        object.__setattr__(self, "sigma1", s1)
        object.__setattr__(self, "sigma2", s2)

    @property
    def n1(self) -> int:
        return self.sigma1.shape[0]

    @property
    def n2(self) -> int:
        return self.sigma2.shape[0]


def vec(m) -> np.ndarray:
    """Column-major stacking of a matrix into a vector."""
    arr = _as_float_array(m, "matrix")
    if arr.ndim != 2:
        raise ValueError(f"vec expects a matrix, got ndim={arr.ndim}")
    return arr.reshape(-1, order="F")


def unvec(v, n1: int, n2: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a length n1*n2 vector to n1 x n2."""
    arr = _as_float_array(v, "vector")
    if arr.ndim != 1 or arr.size != n1 * n2:
        raise ValueError(f"expected vector of length {n1 * n2}, got shape {arr.shape}")
    return arr.reshape((n1, n2), order="F")


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is a[i, j] * b."""
    return np.kron(_as_float_array(a, "a"), _as_float_array(b, "b"))


def matnorm_logpdf(e, spec: MatNormSpec) -> float:
    """Log-density of the matrix normal MN(0, S1, S2) at ``e``.

    Includes the 2*pi constant, so it agrees with the multivariate normal
    log-density of vec(e) under covariance S2 kron S1.
    """
    arr = _as_float_array(e, "e")
    n1, n2 = spec.n1, spec.n2
    if arr.shape != (n1, n2):
        raise ValueError(f"e must have shape ({n1}, {n2}), got {arr.shape}")
    l1 = _cholesky_spd(spec.sigma1, "sigma1")
    l2 = _cholesky_spd(spec.sigma2, "sigma2")
    logdet1 = 2.0 * float(np.sum(np.log(np.diag(l1))))
    logdet2 = 2.0 * float(np.sum(np.log(np.diag(l2))))
    # tr(S1^-1 e S2^-1 e') = ||L1^-1 e L2^-T||_F^2
    w = np.linalg.solve(l1, arr)
    w = np.linalg.solve(l2, w.T).T
    quad = float(np.sum(w * w))
    return -0.5 * (n1 * n2 * _LOG_2PI + n2 * logdet1 + n1 * logdet2 + quad)


def matnorm_sample(rng: np.random.Generator, spec: MatNormSpec) -> np.ndarray:
    """One draw from MN(0, S1, S2) as L1 Z L2' with Z iid standard normal.

    Pure function of (rng state, spec): the same seeded generator produces
    bit-identical output.
    """
    l1 = _cholesky_spd(spec.sigma1, "sigma1")
    l2 = _cholesky_spd(spec.sigma2, "sigma2")
    z = rng.standard_normal((spec.n1, spec.n2))
    return l1 @ z @ l2.T
