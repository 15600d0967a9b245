"""Additive sieve design matrices built from observed covariates.

Each covariate gets a block of ``J`` basis functions (cubic B-spline,
polynomial, Fourier, or a single constant column).  Blocks are stacked
side by side, every non-intercept column is mean-centered, and a single
global intercept column may be prepended.  The centered design matrix is
what the projection and estimation code consumes; the stored knots,
standardization parameters, and centering constants let fitted additive
curves be evaluated at new points.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .exceptions import (
    InvalidSpecError,
    OutOfRangeError,
    RankWarning,
    ZeroVarianceError,
)

FAMILIES = ("bspline_cubic", "polynomial", "fourier", "constant")


@dataclass(frozen=True)
class BasisSpec:
    """Configuration of the additive sieve basis.

    ``J`` counts basis functions per covariate.  The ``constant`` family
    ignores the covariates entirely and produces a single column of ones
    regardless of ``J``, ``d``, or the intercept flag.
    """

    family: str = "bspline_cubic"
    J: int = 8
    knot_rule: str = "quantile"
    include_intercept: bool = True
    standardize: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpecError(f"unknown basis family {self.family!r}")
        if self.knot_rule not in ("quantile", "uniform"):
            raise InvalidSpecError(f"unknown knot rule {self.knot_rule!r}")
        if self.family == "constant":
            object.__setattr__(self, "J", 1)
        if self.J < 1:
            raise InvalidSpecError("J must be >= 1")
        if self.family == "bspline_cubic" and self.J < 4:
            raise InvalidSpecError("cubic B-splines need J >= 4")

    def n_columns(self, d: int) -> int:
        if self.family == "constant":
            return 1
        return self.J * d + (1 if self.include_intercept else 0)

    def to_json(self) -> str:
        return json.dumps(
            {
                "family": self.family,
                "J": self.J,
                "knot_rule": self.knot_rule,
                "intercept": self.include_intercept,
                "standardize": self.standardize,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "BasisSpec":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpecError(f"basis spec is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise InvalidSpecError("basis spec JSON must be an object")
        known = {"family", "J", "knot_rule", "intercept", "standardize"}
        unknown = set(obj) - known
        if unknown:
            raise InvalidSpecError(f"unknown basis spec keys: {sorted(unknown)}")
        kwargs = {}
        if "family" in obj:
            kwargs["family"] = obj["family"]
        if "J" in obj:
            if not isinstance(obj["J"], int):
                raise InvalidSpecError("J must be an integer")
            kwargs["J"] = obj["J"]
        if "knot_rule" in obj:
            kwargs["knot_rule"] = obj["knot_rule"]
        if "intercept" in obj:
            kwargs["include_intercept"] = bool(obj["intercept"])
        if "standardize" in obj:
            kwargs["standardize"] = bool(obj["standardize"])
        return cls(**kwargs)


@dataclass
class BasisMatrix:
    """A built p x m design matrix plus everything needed to re-evaluate it.

    ``knots`` holds the full (clamped) knot vector per covariate for the
    B-spline family and is empty otherwise.  ``supports`` holds the
    per-covariate evaluation interval on the (possibly standardized)
    scale; points outside are clamped.  ``centers`` are the column means
    subtracted from the non-intercept columns.
    """

    values: np.ndarray
    spec: BasisSpec
    knots: list
    supports: list
    standardization: list
    centers: np.ndarray
    column_names: list = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def d(self) -> int:
        return len(self.supports)


def standardize_covariates(X: np.ndarray):
    """Center and scale each covariate column to mean 0, sample variance 1.

    Uses the sample standard deviation (denominator p - 1).  Returns the
    transformed matrix and the per-column ``(mean, sd)`` pairs so the
    same transform can be applied to new evaluation points.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidSpecError("covariate matrix must be 2-dimensional")
    params = []
    out = np.empty_like(X)
    for j in range(X.shape[1]):
        mu = X[:, j].mean()
        sd = X[:, j].std(ddof=1) if X.shape[0] > 1 else 0.0
        if sd <= 0.0 or not np.isfinite(sd):
            raise ZeroVarianceError(j)
        out[:, j] = (X[:, j] - mu) / sd
        params.append((mu, sd))
    return out, params


def default_J(p: int, T: int, C: float = 3.0, kappa: float = 4.0) -> int:
    """Sieve dimension rule J = floor(C * (p * min(T, p))^(1/kappa)).

    Clamped below at 4 so the result is always usable with cubic
    B-splines.
    """
    if p < 1 or T < 1:
        raise InvalidSpecError("p and T must be positive")
    if C <= 0 or kappa < 4:
        raise InvalidSpecError("need C > 0 and kappa >= 4")
    J = math.floor(C * (p * min(T, p)) ** (1.0 / kappa))
    return max(J, 4)


def _bspline_knots(x: np.ndarray, J: int, rule: str) -> np.ndarray:
    """Clamped cubic knot vector with J - 4 interior knots."""
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        raise InvalidSpecError("covariate has no spread; cannot place knots")
    n_int = J - 4
    if n_int > 0:
        if rule == "quantile":
            qs = np.arange(1, n_int + 1) / (n_int + 1)
            interior = np.quantile(x, qs)
        else:
            interior = lo + (hi - lo) * np.arange(1, n_int + 1) / (n_int + 1)
        interior = np.asarray(interior, dtype=float)
        eps = 1e-12 * max(1.0, abs(hi - lo))
        if np.any(np.diff(interior) <= eps) or interior[0] <= lo or interior[-1] >= hi:
            raise InvalidSpecError(
                "knots are not strictly increasing; too few distinct covariate values"
            )
    else:
        interior = np.empty(0)
    return np.concatenate(([lo] * 4, interior, [hi] * 4))


def _bspline_block(x: np.ndarray, knots: np.ndarray) -> np.ndarray:
    xc = np.clip(x, knots[0], knots[-1])
    dm = BSpline.design_matrix(xc, knots, 3, extrapolate=False)
    return dm.toarray()


def _polynomial_block(x: np.ndarray, J: int) -> np.ndarray:
    return np.column_stack([x**j for j in range(1, J + 1)])


def _fourier_block(x: np.ndarray, J: int, support) -> np.ndarray:
    lo, hi = support
    t = (np.clip(x, lo, hi) - lo) / (hi - lo)
    cols = []
    for j in range(1, J + 1):
        freq = (j + 1) // 2
        if j % 2 == 1:
            cols.append(np.sin(2 * np.pi * freq * t))
        else:
            cols.append(np.cos(2 * np.pi * freq * t))
    return np.column_stack(cols)


def _raw_block(x: np.ndarray, spec: BasisSpec, knots, support) -> np.ndarray:
    """Evaluate one covariate's uncentered basis block at points x."""
    if spec.family == "bspline_cubic":
        return _bspline_block(x, knots)
    if spec.family == "polynomial":
        return _polynomial_block(np.clip(x, support[0], support[1]), spec.J)
    if spec.family == "fourier":
        return _fourier_block(x, spec.J, support)
    raise InvalidSpecError(f"no block evaluation for family {spec.family!r}")


def build_basis(X: np.ndarray, spec: BasisSpec) -> BasisMatrix:
    """Build the p x m additive sieve design matrix from raw covariates.

    Column order is (intercept, covariate-1 block, ..., covariate-d
    block); every non-intercept column is mean-centered.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidSpecError("covariate matrix must be p x d with p, d >= 1")
    if not np.all(np.isfinite(X)):
        raise InvalidSpecError("covariate matrix has non-finite entries")
    p, d = X.shape

    if spec.family == "constant":
        return BasisMatrix(
            values=np.ones((p, 1)),
            spec=spec,
            knots=[],
            supports=[],
            standardization=[],
            centers=np.zeros(1),
            column_names=["const"],
        )

    m = spec.n_columns(d)
    if p <= m:
        raise InvalidSpecError(f"need p > m but p={p}, m={m}")

    if spec.standardize:
        Xs, std_params = standardize_covariates(X)
    else:
        Xs, std_params = X, [(0.0, 1.0)] * d

    knots = []
    supports = []
    blocks = []
    names = []
    for l in range(d):
        x = Xs[:, l]
        lo, hi = float(x.min()), float(x.max())
        supports.append((lo, hi))
        if spec.family == "bspline_cubic":
            kv = _bspline_knots(x, spec.J, spec.knot_rule)
            knots.append(kv)
            blocks.append(_bspline_block(x, kv))
        else:
            knots.append(None)
            blocks.append(_raw_block(x, spec, None, (lo, hi)))
        names.extend(f"x{l}_b{j}" for j in range(spec.J))

    raw = np.hstack(blocks)
    centers = raw.mean(axis=0)
    centered = raw - centers
    col_scale = np.abs(raw).max(axis=0)
    dead = np.abs(centered).max(axis=0) <= 1e-12 * np.maximum(col_scale, 1.0)
    if np.any(dead):
        warnings.warn(
            f"{int(dead.sum())} basis column(s) numerically zero after centering",
            RankWarning,
        )

    if spec.include_intercept:
        values = np.hstack([np.ones((p, 1)), centered])
        centers = np.concatenate(([0.0], centers))
        names = ["const"] + names
    else:
        values = centered
        names = list(names)

    return BasisMatrix(
        values=values,
        spec=spec,
        knots=knots,
        supports=supports,
        standardization=std_params,
        centers=centers,
        column_names=names,
    )


@dataclass
class CurveValues:
    """Evaluated additive loading curves at a set of points.

    ``total`` is n x K; ``per_covariate`` is n x d x K with the centered
    contribution of each covariate block; ``intercept`` is the length-K
    constant term (zeros when the basis has no intercept).
    """

    total: np.ndarray
    per_covariate: np.ndarray
    intercept: np.ndarray


def design_row(basis: BasisMatrix, x: np.ndarray, strict: bool = False) -> np.ndarray:
    """Evaluate the centered design matrix at new points (n x m)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    spec = basis.spec
    if spec.family == "constant":
        return np.ones((x.shape[0], 1))
    if x.shape[1] != basis.d:
        raise InvalidSpecError(
            f"expected points with d={basis.d} coordinates, got {x.shape[1]}"
        )
    blocks = []
    offset = 1 if spec.include_intercept else 0
    for l in range(basis.d):
        mu, sd = basis.standardization[l]
        xl = (x[:, l] - mu) / sd
        lo, hi = basis.supports[l]
        if strict and (np.any(xl < lo) or np.any(xl > hi)):
            raise OutOfRangeError(
                f"evaluation point outside training range of covariate {l}"
            )
        xl = np.clip(xl, lo, hi)
        block = _raw_block(xl, spec, basis.knots[l], basis.supports[l])
        sl = slice(offset + l * spec.J, offset + (l + 1) * spec.J)
        blocks.append(block - basis.centers[sl])
    rows = np.hstack(blocks)
    if spec.include_intercept:
        rows = np.hstack([np.ones((rows.shape[0], 1)), rows])
    return rows


def eval_curves(
    B_hat: np.ndarray, basis: BasisMatrix, x: np.ndarray, strict: bool = False
) -> CurveValues:
    """Evaluate fitted additive loading curves g_k at points x.

    Reuses the stored knots, centering constants, and standardization
    parameters, so evaluation at a training point reproduces the
    corresponding row of Phi(X) @ B_hat.
    """
    B_hat = np.asarray(B_hat, dtype=float)
    if B_hat.ndim == 1:
        B_hat = B_hat[:, None]
    if B_hat.shape[0] != basis.m:
        raise InvalidSpecError(
            f"coefficient rows ({B_hat.shape[0]}) != basis columns ({basis.m})"
        )
    rows = design_row(basis, x, strict=strict)
    n, K = rows.shape[0], B_hat.shape[1]
    total = rows @ B_hat
    spec = basis.spec
    if spec.family == "constant":
        return CurveValues(
            total=total,
            per_covariate=np.zeros((n, 0, K)),
            intercept=np.zeros(K),
        )
    offset = 1 if spec.include_intercept else 0
    per_cov = np.empty((n, basis.d, K))
    for l in range(basis.d):
        sl = slice(offset + l * spec.J, offset + (l + 1) * spec.J)
        per_cov[:, l, :] = rows[:, sl] @ B_hat[sl, :]
    intercept = B_hat[0, :].copy() if spec.include_intercept else np.zeros(K)
    return CurveValues(total=total, per_covariate=per_cov, intercept=intercept)
