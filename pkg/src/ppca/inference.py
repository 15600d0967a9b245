"""Loading specification tests and eigenvalue-ratio factor counting.

``test_g_zero`` asks whether the covariates explain anything about the
loadings (H0: G(X) = 0) and is built on the regular-PCA factor estimate,
since the projection is not meaningful under that null.  Conversely
``test_gamma_zero`` asks whether the covariates explain everything
(H0: Gamma = 0) and uses the projected-PCA factors.  ``select_k`` picks
the number of factors as the argmax of adjacent eigenvalue ratios of the
(optionally projected) T x T data Gram matrix.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .estimator import (
    PanelData,
    estimate_sigma_u,
    fit_projected_pca,
    fit_regular_pca,
)
from .exceptions import (
    BoundaryWarning,
    EigenFailureError,
    InvalidSpecError,
    RangeEmptyError,
    SingularWeightError,
)
from .projection import Projector

EIG_FLOOR_REL = 1e-12


@dataclass(frozen=True)
class TestResult:
    statistic: float
    standardized: float
    df: int
    p_value_normal: float
    p_value_chisq: float
    k_used: int
    which: str

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "standardized": self.standardized,
            "df": self.df,
            "p_normal": self.p_value_normal,
            "p_chisq": self.p_value_chisq,
            "K": self.k_used,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class SelectionResult:
    k_hat: int
    eigenvalues: np.ndarray
    ratios: np.ndarray
    method: str
    at_boundary: bool

    def to_dict(self) -> dict:
        return {
            "K_hat": self.k_hat,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "ratios": [float(v) for v in self.ratios],
            "method": self.method,
            "at_boundary": self.at_boundary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def test_g_zero(data: PanelData, P: Projector, K: int) -> TestResult:
    """Test H0: G(X) = 0 via S_G = tr(W1 F'Y'PYF) / (T^2 p).

    F here is the regular-PCA factor estimate and W1 the inverse of the
    normalized loading Gram matrix.  Under the null p * S_G is
    asymptotically chi-square with m K degrees of freedom (m = number of
    effective basis columns); both the normal standardization and the
    chi-square upper-tail p-value are reported.
    """
    if K < 1:
        raise InvalidSpecError("K must be >= 1")
    y = data.y
    T, p = data.T, data.p
    reg = fit_regular_pca(y, K)
    lam = reg.lambda_hat
    w_inv = lam.T @ lam / p
    cond = np.linalg.cond(w_inv)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularWeightError("loading Gram matrix is numerically singular")
    w1 = np.linalg.inv(w_inv)
    yf = y @ reg.f_hat
    core = yf.T @ P.project(yf)
    s_g = float(np.trace(w1 @ core)) / (T**2 * p)
    m = P.rank
    df = m * K
    standardized = (p * s_g - df) / np.sqrt(2.0 * df)
    return TestResult(
        statistic=s_g,
        standardized=float(standardized),
        df=df,
        p_value_normal=float(stats.norm.sf(standardized)),
        p_value_chisq=float(stats.chi2.sf(p * s_g, df)),
        k_used=K,
        which="g_zero",
    )


def test_gamma_zero(
    data: PanelData, P: Projector, K: int, sigma_u: Optional[np.ndarray] = None
) -> TestResult:
    """Test H0: Gamma = 0 via S_Gamma = tr(Lam'(I-P) Sigma_u^-1 (I-P) Lam).

    Lam = Y F_hat / T with the projected-PCA factors, and Sigma_u is the
    floored diagonal residual-variance estimate (pass ``sigma_u`` to
    override, e.g. when the noise variances are known).  Under the null
    (with Gaussian, serially independent noise) T * S_Gamma is
    asymptotically chi-square with p K degrees of freedom; p-values are
    calibrated only under those conditions.
    """
    if K < 1:
        raise InvalidSpecError("K must be >= 1")
    T, p = data.T, data.p
    fit = fit_projected_pca(data, P, K)
    sigma = estimate_sigma_u(data.y, fit.f_hat) if sigma_u is None else np.asarray(sigma_u)
    gam = fit.gamma_hat
    s_gamma = float(np.sum(gam**2 / sigma[:, None]))
    df = p * K
    standardized = (T * s_gamma - df) / np.sqrt(2.0 * df)
    return TestResult(
        statistic=s_gamma,
        standardized=float(standardized),
        df=df,
        p_value_normal=float(stats.norm.sf(standardized)),
        p_value_chisq=float(stats.chi2.sf(T * s_gamma, df)),
        k_used=K,
        which="gamma_zero",
    )


def select_k(y: np.ndarray, P: Optional[Projector], m: int) -> SelectionResult:
    """Eigenvalue-ratio estimate of the number of factors.

    Searches K_hat = argmax over 0 < k < m/2 of the ratio of adjacent
    eigenvalues of Y'PY (projected mode, when a projector is given) or
    Y'Y (plain mode).  Eigenvalues below ``1e-12 * lambda_1`` are floored
    before forming ratios; ties pick the smallest k.
    """
    y = np.asarray(y, dtype=float)
    if m < 4:
        raise RangeEmptyError(f"need m >= 4 for a nonempty search range, got m={m}")
    T = y.shape[1]
    if P is not None:
        z = P.q.T @ y
        gram = z.T @ z
        mode = "projected"
    else:
        gram = y.T @ y
        mode = "plain"
    try:
        lam = np.linalg.eigvalsh(gram)[::-1]
    except np.linalg.LinAlgError as exc:
        raise EigenFailureError(f"eigenvalue computation failed: {exc}") from exc
    # largest k with k < m/2, limited by the T available eigenvalues
    k_max = min((m - 1) // 2 if m % 2 else m // 2 - 1, T - 1)
    if k_max < 1:
        raise RangeEmptyError(f"search range 0 < k < m/2 is empty (m={m}, T={T})")
    lam = lam[: k_max + 1]
    floor = EIG_FLOOR_REL * max(lam[0], 0.0)
    lam = np.maximum(lam, floor if floor > 0 else EIG_FLOOR_REL)
    ratios = lam[:-1] / lam[1:]
    k_hat = int(np.argmax(ratios)) + 1
    at_boundary = k_hat == k_max
    if at_boundary:
        warnings.warn(
            f"eigenvalue-ratio argmax at the search boundary k={k_hat}",
            BoundaryWarning,
        )
    return SelectionResult(
        k_hat=k_hat,
        eigenvalues=lam,
        ratios=ratios,
        method=mode,
        at_boundary=at_boundary,
    )
