"""Matrix error correction model: parameters, likelihood and identification.

The MECM(p) for an n1 x n2 matrix series Y_t is

    dY_t = D + U1 U3' Y_{t-1} U4 U2' + sum_j Phi1_j dY_{t-j} Phi2_j' + E_t,

with E_t matrix normal MN(0, S1, S2).  U3 (n1 x r1) and U4 (n2 x r2) are the
row/column cointegrating matrices, U1 and U2 the corresponding adjustment
loadings, and the Phi pairs the short-run matrix-autoregressive coefficients.
Vectorized, the error-correction coefficient is (U2 kron U1)(U4 kron U3)', so
the model is a VECM whose loadings, cointegrating matrix and short-run
coefficients all carry Kronecker structure.

The log-likelihood drops the 2*pi constant.  With R_t the model residual and
T_eff = T - p - 1 effective observations,

    L = sum_t [ -(n2/2) log|S1| - (n1/2) log|S2|
                - 1/2 tr(S1^-1 R_t S2^-1 R_t') ].

The determinant multipliers (n2 on |S1|, n1 on |S2|) are the ones forced by
|S2 kron S1| = |S1|^n2 |S2|^n1, i.e. by the equivalence with the multivariate
normal density of vec(R_t).

Identification follows the usual normalization: the top r1 x r1 block of U3
and the top r2 x r2 block of U4 are the identity, ||S1||_F = 1, and
||Phi1_j||_F = 1 for every lag.  All normalizations are performed with
compensating transforms on the paired factor, so the likelihood is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import MatNormSpec, MatrixSeries, kron

__all__ = [
    "RankPair",
    "MecmParams",
    "effective_params",
    "vecm_param_count",
    "residuals",
    "log_likelihood",
    "normalize_identification",
    "to_vecm",
]


@dataclass(frozen=True)
class RankPair:
    """Row/column cointegration ranks (r1, r2).

    Rank 0 means no error correction along that dimension; the standard grid
    searched by rank selection starts at 1.
    """

    r1: int
    r2: int

    def __post_init__(self):
        if int(self.r1) != self.r1 or int(self.r2) != self.r2:
            raise ValueError("ranks must be integers")
        object.__setattr__(self, "r1", int(self.r1))
        object.__setattr__(self, "r2", int(self.r2))
        if self.r1 < 0 or self.r2 < 0:
            raise ValueError(f"ranks must be nonnegative, got ({self.r1}, {self.r2})")

    def validate_for(self, n1: int, n2: int) -> None:
        if not (self.r1 <= n1 and self.r2 <= n2):
            raise ValueError(f"ranks ({self.r1}, {self.r2}) out of range for dimensions ({n1}, {n2})")

    def astuple(self) -> tuple[int, int]:
        return (self.r1, self.r2)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MecmParams:
    """Full MECM parameter set (D, U1..U4, Phi pairs, S1, S2).

    ``phi1``/``phi2`` are tuples of length p holding the row/column short-run
    coefficients per lag.  Instances are immutable; use the module functions
    to derive transformed parameter sets.
    """

    d: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    u4: np.ndarray
    phi1: tuple
    phi2: tuple
    sigma: MatNormSpec
    ranks: RankPair

    def __post_init__(self):
        d = _freeze(self.d)
        if d.ndim != 2:
            raise ValueError("d must be a matrix")
        n1, n2 = d.shape
        r1, r2 = self.ranks.r1, self.ranks.r2
        self.ranks.validate_for(n1, n2)
        u1 = _freeze(self.u1)
        u2 = _freeze(self.u2)
        u3 = _freeze(self.u3)
        u4 = _freeze(self.u4)
        for name, arr, shape in (
            ("u1", u1, (n1, r1)),
            ("u3", u3, (n1, r1)),
            ("u2", u2, (n2, r2)),
            ("u4", u4, (n2, r2)),
        ):
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
        phi1 = tuple(_freeze(m) for m in self.phi1)
        phi2 = tuple(_freeze(m) for m in self.phi2)
        if len(phi1) != len(phi2):
            raise ValueError("phi1 and phi2 must have the same number of lags")
        for j, (a, b) in enumerate(zip(phi1, phi2)):
            if a.shape != (n1, n1) or b.shape != (n2, n2):
                raise ValueError(f"lag {j + 1} coefficients must be ({n1},{n1}) and ({n2},{n2})")
        if self.sigma.n1 != n1 or self.sigma.n2 != n2:
            raise ValueError("sigma dimensions do not match d")
        for name, arr in (("d", d), ("u1", u1), ("u2", u2), ("u3", u3), ("u4", u4)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "u1", u1)
        object.__setattr__(self, "u2", u2)
        object.__setattr__(self, "u3", u3)
        object.__setattr__(self, "u4", u4)
        object.__setattr__(self, "phi1", phi1)
        object.__setattr__(self, "phi2", phi2)

    @property
    def n1(self) -> int:
        return self.d.shape[0]

    @property
    def n2(self) -> int:
        return self.d.shape[1]

    @property
    def p(self) -> int:
        return len(self.phi1)


def effective_params(ranks: RankPair, p: int, n1: int, n2: int) -> int:
    """Number of effective parameters r1(2n1-r1) + r2(2n2-r2) + p(n1^2+n2^2).

    Excludes the unrestricted deterministic term; this is the count penalized
    by the information criteria.
    """
    ranks.validate_for(n1, n2)
    if p < 0:
        raise ValueError("lag order must be nonnegative")
    r1, r2 = ranks.r1, ranks.r2
    return r1 * (2 * n1 - r1) + r2 * (2 * n2 - r2) + p * (n1 * n1 + n2 * n2)


def vecm_param_count(n: int, r: int, p: int) -> int:
    """Parameter count r(2n-r) + p n^2 of an unrestricted rank-r VECM."""
    if not (0 <= r <= n):
        raise ValueError(f"rank {r} out of range for dimension {n}")
    if p < 0:
        raise ValueError("lag order must be nonnegative")
    return r * (2 * n - r) + p * n * n


def _lag_arrays(data: np.ndarray, p: int):
    """Split a (T, n1, n2) array into aligned dY_t, Y_{t-1} and dY_{t-j} stacks.

    Effective observations are t = p+2, ..., T (1-based), i.e. T - p - 1 rows.
    """
    t_len = data.shape[0]
    if t_len < p + 2:
        raise ValueError(f"need at least p + 2 = {p + 2} observations, got {t_len}")
    dy = np.diff(data, axis=0)
    dye = dy[p:]
    ylag = data[p : t_len - 1]
    dylags = [dy[p - j : t_len - 1 - j] for j in range(1, p + 1)]
    return dye, ylag, dylags


def _predict(params: MecmParams, ylag: np.ndarray, dylags) -> np.ndarray:
    """Model-implied dY_t for stacked regressor arrays."""
    pred = np.broadcast_to(params.d, ylag.shape).copy()
    if params.ranks.r1 > 0 and params.ranks.r2 > 0:
        p_row = params.u1 @ params.u3.T
        p_col = params.u4 @ params.u2.T
        pred += p_row @ ylag @ p_col
    for phi1, phi2, dyl in zip(params.phi1, params.phi2, dylags):
        pred += phi1 @ dyl @ phi2.T
    return pred


def residuals(params: MecmParams, series: MatrixSeries) -> np.ndarray:
    """Model residuals, shape (T - p - 1, n1, n2).

    Row k corresponds to time t = p + 2 + k (1-based), the first observation
    for which the lagged difference regressors exist.
    """
    if (series.n1, series.n2) != (params.n1, params.n2):
        raise ValueError(
            f"series shape ({series.n1}, {series.n2}) does not match "
            f"parameters ({params.n1}, {params.n2})"
        )
    dye, ylag, dylags = _lag_arrays(series.data, params.p)
    return dye - _predict(params, ylag, dylags)


def _loglik_terms(sigma1: np.ndarray, sigma2: np.ndarray):
    """(logdet1, logdet2, inv1, inv2) with a PD check on the symmetric part.

    Determinants and inverses are computed from the matrices as given, so the
    likelihood stays a smooth function of the raw entries (as needed by
    finite-difference checks); genuine non-PD input is rejected.
    """
    try:
        np.linalg.cholesky(0.5 * (sigma1 + sigma1.T))
        np.linalg.cholesky(0.5 * (sigma2 + sigma2.T))
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not positive definite") from exc
    sign1, logdet1 = np.linalg.slogdet(sigma1)
    sign2, logdet2 = np.linalg.slogdet(sigma2)
    if sign1 <= 0 or sign2 <= 0:
        raise ValueError("covariance is not positive definite")
    return logdet1, logdet2, np.linalg.inv(sigma1), np.linalg.inv(sigma2)


def _loglik_from_residuals(resid: np.ndarray, sigma1: np.ndarray, sigma2: np.ndarray) -> float:
    t_eff, n1, n2 = resid.shape
    logdet1, logdet2, inv1, inv2 = _loglik_terms(sigma1, sigma2)
    quad = float(np.sum((inv1 @ resid @ inv2) * resid))
    return -0.5 * t_eff * (n2 * logdet1 + n1 * logdet2) - 0.5 * quad


def log_likelihood(params: MecmParams, series: MatrixSeries) -> float:
    """Gaussian log-likelihood without the 2*pi constant.

    Equals the sum of matrix-normal log-densities over the residuals plus
    T_eff * (n1 n2 / 2) log(2 pi).
    """
    resid = residuals(params, series)
    return _loglik_from_residuals(resid, params.sigma.sigma1, params.sigma.sigma2)


def _solve_right(a: np.ndarray, m: np.ndarray, block: str) -> np.ndarray:
    """a @ inv(m), rejecting singular or badly conditioned top blocks."""
    if m.shape[0] == 0:
        return a
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > 1e12:
        raise ValueError(
            f"top {m.shape[0]}x{m.shape[0]} block of {block} is singular "
            "(consider reordering the series so the leading block is invertible)"
        )
    return np.linalg.solve(m.T, a.T).T


def normalize_identification(params: MecmParams) -> MecmParams:
    """Apply the identification restrictions without changing the likelihood.

    U3's top r1 x r1 block and U4's top r2 x r2 block become the identity
    (absorbed into U1/U2), S1 is scaled to unit Frobenius norm (absorbed into
    S2) and each Phi1_j likewise (absorbed into Phi2_j).
    """
    r1, r2 = params.ranks.r1, params.ranks.r2
    u1, u2, u3, u4 = params.u1, params.u2, params.u3, params.u4
    if r1 > 0:
        m3 = u3[:r1, :]
        u3 = _solve_right(u3, m3, "u3")
        u1 = u1 @ m3.T
    if r2 > 0:
        m4 = u4[:r2, :]
        u4 = _solve_right(u4, m4, "u4")
        u2 = u2 @ m4.T
    c = float(np.linalg.norm(params.sigma.sigma1))
    sigma = MatNormSpec(params.sigma.sigma1 / c, params.sigma.sigma2 * c)
    phi1 = []
    phi2 = []
    for a, b in zip(params.phi1, params.phi2):
        cj = float(np.linalg.norm(a))
        if cj == 0.0:
            raise ValueError("cannot normalize a zero short-run coefficient matrix")
        phi1.append(a / cj)
        phi2.append(b * cj)
    return MecmParams(
        d=params.d,
        u1=u1,
        u2=u2,
        u3=u3,
        u4=u4,
        phi1=tuple(phi1),
        phi2=tuple(phi2),
        sigma=sigma,
        ranks=params.ranks,
    )


def to_vecm(params: MecmParams):
    """Vectorized-form coefficients (alpha, beta, phis).

    alpha = U2 kron U1 and beta = U4 kron U3 are n1*n2 x r1*r2; phis[j] is the
    n1*n2 x n1*n2 short-run coefficient Phi2_j kron Phi1_j.  The vec-form
    error-correction coefficient is alpha @ beta.T.
    """
    alpha = kron(params.u2, params.u1)
    beta = kron(params.u4, params.u3)
    phis = [kron(b, a) for a, b in zip(params.phi1, params.phi2)]
    return alpha, beta, phis
