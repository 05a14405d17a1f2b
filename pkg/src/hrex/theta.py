"""Extremal coefficients of the Gaussian-array limit law.

The limit CDF at levels x = (x_1, ..., x_d) is exp(-sum_i theta_i(x) e^-x_i),
where each coefficient is a Gaussian orthant-type probability

    theta_i(x) = P( A/2 + sqrt(delta) * W  <=  delta + (x_t - x_i)/2
                    for every active constraint ),

with A ~ Exp(1) independent of a centred Gaussian vector W.  One
constraint is active per pair (lag ell, component t) with
delta_ti(ell) < infinity: for the first component only positive lags
enter; for component i >= 2 the lag-0 pairs with smaller-indexed
components enter as well, which is what removes double counting of
simultaneous exceedances.  The W entries have unit variance and

    Cov(W_{k}^{(j)}, W_{l}^{(t)}) =
        (delta_ji(k-1) + delta_ti(l-1) - delta_jt(|k-l|))
        / (2 sqrt(delta_ji(k-1) * delta_ti(l-1))),

where the W index k = lag + 1.  A zero lag-0 coefficient contributes a
pure-A constraint (the Gaussian part drops out); zero coefficients at
positive lags are rejected upstream.

When no constraint is active the coefficient is exactly 1 and the
corresponding margin is pure Gumbel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

from .correlation import DeltaSpec
from .errors import DegenerateDelta, InvalidDeltaSpec
from .norming import std_normal_cdf
from .rng import RngKey, standard_exponential, standard_normal

__all__ = [
    "WIndex",
    "WCovariance",
    "ConstraintRow",
    "ConstraintSet",
    "ThetaEstimate",
    "TruncationGap",
    "build_w_covariance",
    "build_constraints",
    "estimate_theta",
    "theta_for_spec",
    "theta_oracle_single",
    "theta_oracle_single_trapezoid",
    "theta_bivariate_closed_form",
]

_PSD_TOL = 1e-10
_BATCH = 1 << 16


@dataclass(frozen=True, order=True)
class WIndex:
    """Gaussian constraint index: W slot k = lag + 1, component t."""

    k: int
    t: int


@dataclass(frozen=True, eq=False)
class WCovariance:
    target: int
    indices: tuple[WIndex, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class ConstraintRow:
    w_index: WIndex | None  # None for pure-A rows (zero lag-0 coefficient)
    scale: float
    bound: float


@dataclass(frozen=True)
class ConstraintSet:
    target: int
    x: tuple[float, ...]
    rows: tuple[ConstraintRow, ...]
    truncation_lag: int
    # Targets beyond the first carry an extra same-time block against the
    # lower-numbered components; the first target has no such block.
    includes_lag0_cross: bool = False


@dataclass(frozen=True)
class ThetaEstimate:
    value: float
    std_error: float
    samples: int
    truncation_K: int

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("theta estimate outside [0, 1]")
        if self.std_error > 0.5 / math.sqrt(max(self.samples, 1)) + 1e-15:
            raise ValueError("std_error exceeds the binomial bound")

    def to_jsonable(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "samples": self.samples,
            "truncation_K": self.truncation_K,
        }


@dataclass(frozen=True)
class TruncationGap:
    lag: int
    lag_doubled: int
    value: float
    value_doubled: float
    gap: float


def _resolve_lag(spec: DeltaSpec, max_lag: int | None) -> int:
    if max_lag is None:
        if not math.isfinite(spec.finite_horizon):
            raise ValueError(
                "spec has no finite horizon; supply an explicit truncation lag"
            )
        return int(spec.finite_horizon)
    if max_lag < 0:
        raise ValueError("need truncation lag >= 0")
    return int(max_lag)


def _active_indices(spec: DeltaSpec, i: int, max_lag: int) -> list[WIndex]:
    out = []
    for lag in range(0, max_lag + 1):
        for t in range(1, spec.d + 1):
            value = spec.delta(t, i, lag)
            if 0.0 < value < math.inf:
                out.append(WIndex(k=lag + 1, t=t))
    return out


def build_w_covariance(spec: DeltaSpec, i: int, max_lag: int | None = None) -> WCovariance:
    """Covariance of the Gaussian constraint vector for component i.

    Instantiates one W entry per (lag <= max_lag, component) pair carrying
    a finite positive coefficient, fills the matrix from the coefficient
    formula above, and rejects the coefficient set if the result is materially
    indefinite (smallest eigenvalue below -1e-10 * dim) or if a needed
    cross coefficient is infinite while its endpoints are finite: points
    at finite dependence distance cannot be infinitely far from each
    other.
    """
    if not 1 <= i <= spec.d:
        raise ValueError("target component out of range")
    max_lag = _resolve_lag(spec, max_lag)
    indices = _active_indices(spec, i, max_lag)
    q = len(indices)
    matrix = np.eye(q)
    for a in range(q):
        ka, ta = indices[a].k, indices[a].t
        da = spec.delta(ta, i, ka - 1)
        for b in range(a + 1, q):
            kb, tb = indices[b].k, indices[b].t
            db = spec.delta(tb, i, kb - 1)
            cross = spec.delta(ta, tb, abs(ka - kb))
            if math.isinf(cross):
                raise InvalidDeltaSpec(
                    "delta(%d,%d,%d) is infinite but both endpoints sit at finite"
                    " dependence distance from component %d; no Gaussian array"
                    " realises these coefficients" % (ta, tb, abs(ka - kb), i)
                )
            denom = 2.0 * math.sqrt(da * db)
            if denom == 0.0:
                raise DegenerateDelta("zero coefficient reached the W covariance")
            matrix[a, b] = matrix[b, a] = (da + db - cross) / denom
    if q:
        min_eig = float(np.linalg.eigvalsh(matrix).min())
        if min_eig < -_PSD_TOL * q:
            raise InvalidDeltaSpec(
                "constraint covariance for component %d is not PSD (min eigenvalue"
                " %.3e); the coefficient spec is inconsistent" % (i, min_eig)
            )
    return WCovariance(target=i, indices=tuple(indices), matrix=matrix)


def build_constraints(
    spec: DeltaSpec, x: Sequence[float], i: int, max_lag: int | None = None
) -> ConstraintSet:
    """Constraint rows defining theta_i(x).

    Positive lags contribute rows for every component; lag 0 contributes
    rows only for components s < i (and only when i >= 2).  A zero lag-0
    coefficient yields a pure-A row with scale 0.
    """
    if len(x) != spec.d:
        raise ValueError("need one level per component")
    if any(math.isnan(v) or math.isinf(v) for v in x):
        raise ValueError("need finite levels x")
    if not 1 <= i <= spec.d:
        raise ValueError("target component out of range")
    max_lag = _resolve_lag(spec, max_lag)
    rows = []
    if i >= 2:
        for s in range(1, i):
            value = spec.delta(s, i, 0)
            if math.isinf(value):
                continue
            rows.append(
                ConstraintRow(
                    w_index=(WIndex(k=1, t=s) if value > 0.0 else None),
                    scale=math.sqrt(value),
                    bound=value + (x[s - 1] - x[i - 1]) / 2.0,
                )
            )
    for lag in range(1, max_lag + 1):
        for t in range(1, spec.d + 1):
            value = spec.delta(t, i, lag)
            if math.isinf(value):
                continue
            rows.append(
                ConstraintRow(
                    w_index=WIndex(k=lag + 1, t=t),
                    scale=math.sqrt(value),
                    bound=value + (x[t - 1] - x[i - 1]) / 2.0,
                )
            )
    return ConstraintSet(
        target=i,
        x=tuple(x),
        rows=tuple(rows),
        truncation_lag=max_lag,
        includes_lag0_cross=(i >= 2),
    )


def _factor(matrix: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(matrix)
        if w.min() < -_PSD_TOL * max(len(w), 1):
            raise InvalidDeltaSpec("constraint covariance is not PSD") from None
        return v * np.sqrt(np.clip(w, 0.0, None))[None, :]


def estimate_theta(
    cs: ConstraintSet, wcov: WCovariance, samples: int, key: RngKey
) -> ThetaEstimate:
    """Monte Carlo estimate of P(all constraint rows hold).

    Each fixed-size batch b draws from substream key.child(b): first the
    exponential A, then the Gaussian block, so two estimators sharing a
    key and covariance see identical variates (common random numbers).
    An empty constraint set short-circuits to the exact value 1.
    The standard error is the binomial sqrt(p(1-p)/N).
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if not cs.rows:
        return ThetaEstimate(
            value=1.0, std_error=0.0, samples=samples, truncation_K=cs.truncation_lag
        )
    column = {index: pos for pos, index in enumerate(wcov.indices)}
    for row in cs.rows:
        if row.w_index is not None and row.w_index not in column:
            raise ValueError("constraint references a W index outside the covariance")
    factor_t = _factor(wcov.matrix).T.copy()
    q = len(wcov.indices)
    hits = 0
    done = 0
    batch_index = 0
    while done < samples:
        b = min(_BATCH, samples - done)
        gen = key.child(batch_index).generator()
        a_half = 0.5 * standard_exponential(gen, b)
        w = standard_normal(gen, (b, q)) @ factor_t if q else None
        ok = np.ones(b, dtype=bool)
        for row in cs.rows:
            lhs = a_half if row.w_index is None else a_half + row.scale * w[:, column[row.w_index]]
            ok &= lhs <= row.bound
        hits += int(ok.sum())
        done += b
        batch_index += 1
    p = hits / samples
    return ThetaEstimate(
        value=p,
        std_error=math.sqrt(p * (1.0 - p) / samples),
        samples=samples,
        truncation_K=cs.truncation_lag,
    )


def theta_for_spec(
    spec: DeltaSpec,
    x: Sequence[float],
    i: int,
    samples: int,
    key: RngKey,
    max_lag: int | None = None,
) -> tuple[ThetaEstimate, TruncationGap | None]:
    """Estimate theta_i(x) straight from a coefficient spec.

    When the supplied truncation lag cuts finite coefficients off (always
    the case for infinite-horizon specs), the estimate is repeated at
    twice the lag and the gap between the two is reported so the caller
    can judge the truncation error.
    """
    lag = _resolve_lag(spec, max_lag)
    estimate = estimate_theta(
        build_constraints(spec, x, i, lag), build_w_covariance(spec, i, lag), samples, key
    )
    if lag >= spec.finite_horizon:
        return estimate, None
    doubled = max(2 * lag, 1)
    second = estimate_theta(
        build_constraints(spec, x, i, doubled),
        build_w_covariance(spec, i, doubled),
        samples,
        key,
    )
    gap = TruncationGap(
        lag=lag,
        lag_doubled=doubled,
        value=estimate.value,
        value_doubled=second.value,
        gap=abs(estimate.value - second.value),
    )
    return estimate, gap


def theta_oracle_single(delta: float, shift: float) -> float:
    """Single-constraint coefficient by adaptive quadrature:

        integral_0^inf  e^-a  Phi((b - a/2) / sqrt(delta))  da,
        b = delta + shift,

    evaluated to absolute error below 1e-9.  Requires finite delta > 0.
    """
    _check_oracle_args(delta, shift)
    b = delta + shift
    s = math.sqrt(delta)
    value, err = quad(
        lambda a: math.exp(-a) * float(ndtr((b - 0.5 * a) / s)),
        0.0,
        np.inf,
        epsabs=1e-12,
        epsrel=1e-12,
        limit=200,
    )
    if err > 1e-9:
        raise ArithmeticError("quadrature error estimate %g too large" % err)
    return float(value)


def theta_oracle_single_trapezoid(
    delta: float, shift: float, upper: float = 50.0, step: float = 1e-4
) -> float:
    """Same integral on the fixed grid [0, upper] with the trapezoid rule.

    Independent of the adaptive route; the truncated tail is below
    e^-upper.  The two oracles agreeing to 1e-7 is part of the
    verification contract.
    """
    _check_oracle_args(delta, shift)
    b = delta + shift
    s = math.sqrt(delta)
    a = np.arange(0.0, upper + step, step)
    f = np.exp(-a) * ndtr((b - 0.5 * a) / s)
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    return float(trapezoid(f, dx=step))


def _check_oracle_args(delta: float, shift: float) -> None:
    if not (math.isfinite(delta) and delta > 0.0):
        raise ValueError("need finite delta > 0")
    if not math.isfinite(shift):
        raise ValueError("need finite shift")


def theta_bivariate_closed_form(lam: float, x1: float, x2: float) -> tuple[float, float]:
    """Coefficient pair reproducing the bivariate CDF H_lambda:

        theta_1 = Phi(sqrt(lam) + (x2 - x1) / (2 sqrt(lam))),
        theta_2 = Phi(sqrt(lam) + (x1 - x2) / (2 sqrt(lam))),

    so that exp(-theta_1 e^-x1 - theta_2 e^-x2) = H_lambda(x1, x2).
    The boundary branches return (1, 1) at lambda = infinity and the
    indicator-type pair at lambda = 0.
    """
    if math.isnan(lam) or lam < 0:
        raise ValueError("need lambda in [0, inf]")
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise ValueError("need finite levels")
    if math.isinf(lam):
        return (1.0, 1.0)
    if lam == 0.0:
        if x1 == x2:
            return (0.5, 0.5)
        return (1.0, 0.0) if x1 < x2 else (0.0, 1.0)
    root = math.sqrt(lam)
    half = (x2 - x1) / (2.0 * root)
    return (std_normal_cdf(root + half), std_normal_cdf(root - half))
