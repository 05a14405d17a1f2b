"""Correlation models for Gaussian triangular arrays and their
asymptotic dependence coefficients.

A row of the array holds n stationary d-dimensional Gaussian vectors
whose correlations may change with n.  The dependence that survives in
the extreme-value limit is captured by

    delta_ij(k) = lim_n (1 - rho_ij(k, n)) * log n,

taking values in (0, inf] for lags k >= 1 and [0, inf] for lag 0.
A DeltaSpec records these limits; hr_family turns one back into the
canonical correlation model rho_ij(k, n) = 1 - delta_ij(k) / log n.

The module also evaluates the three summability diagnostics that a model
must satisfy for the limit theorem to apply: a long-range sum built from
Berman's inequality, a short-range sum over small lags, and a simplified
single-line criterion that implies both when it holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .errors import InvalidDeltaSpec

__all__ = [
    "DeltaSpec",
    "CorrelationModel",
    "BlockParameters",
    "DeltaEstimate",
    "hr_family",
    "iid_model",
    "tabulated_model",
    "geometric_model",
    "estimate_delta",
    "berman_term",
    "check_long_range",
    "check_short_range",
    "check_simplified",
]


def _canonical(i: int, j: int, k: int) -> tuple[int, int, int]:
    return (i, j, k) if i <= j else (j, i, k)


def _validate_index(d: int, i: int, j: int, k: int) -> None:
    if not (1 <= i <= d and 1 <= j <= d):
        raise InvalidDeltaSpec("component indices must lie in 1..%d, got (%d, %d)" % (d, i, j))
    if k < 0:
        raise InvalidDeltaSpec("need lag k >= 0, got %d" % k)


def _validate_value(i: int, j: int, k: int, value: float) -> float:
    value = float(value)
    if math.isnan(value):
        raise InvalidDeltaSpec("delta(%d,%d,%d) is NaN" % (i, j, k))
    if value < 0:
        raise InvalidDeltaSpec("delta(%d,%d,%d) = %g is negative" % (i, j, k, value))
    if i == j and k == 0 and value != 0.0:
        raise InvalidDeltaSpec("delta(i,i,0) must be 0, got %g" % value)
    if k >= 1 and value == 0.0:
        raise InvalidDeltaSpec(
            "delta(%d,%d,%d) = 0 at positive lag is rejected: it would assert a"
            " component pair that stays fully dependent across time" % (i, j, k)
        )
    return value


@dataclass(frozen=True)
class DeltaSpec:
    """Limiting dependence coefficients delta_ij(k) of a triangular array.

    delta(i, j, k) is symmetric in (i, j), equals 0 at (i, i, 0), and is
    infinite wherever nothing else is recorded.  finite_horizon is the
    largest lag carrying any finite coefficient; it is what bounds the
    constraint sets used for extremal-coefficient estimation.
    """

    d: int
    entries: Mapping[tuple[int, int, int], float]
    finite_horizon: float = 0
    func: Callable[[int, int, int], float] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.d < 1:
            raise InvalidDeltaSpec("need dimension d >= 1")
        canon = {}
        for (i, j, k), value in self.entries.items():
            _validate_index(self.d, i, j, k)
            key = _canonical(i, j, k)
            value = _validate_value(*key, value)
            if key in canon and canon[key] != value:
                raise InvalidDeltaSpec("conflicting values for delta%s" % (key,))
            canon[key] = value
        object.__setattr__(self, "entries", canon)
        if self.func is None:
            horizon = max((k for (_, _, k), v in canon.items() if math.isfinite(v)), default=0)
            object.__setattr__(self, "finite_horizon", horizon)

    @classmethod
    def from_entries(cls, d: int, entries: Mapping[tuple[int, int, int], float]) -> "DeltaSpec":
        return cls(d=d, entries=dict(entries))

    @classmethod
    def from_function(
        cls, d: int, func: Callable[[int, int, int], float], finite_horizon: float
    ) -> "DeltaSpec":
        """Programmatic spec; finite_horizon may be math.inf, in which case
        extremal-coefficient estimation requires an explicit truncation lag."""
        if finite_horizon < 0:
            raise InvalidDeltaSpec("need finite_horizon >= 0")
        return cls(d=d, entries={}, finite_horizon=finite_horizon, func=func)

    def delta(self, i: int, j: int, k: int) -> float:
        _validate_index(self.d, i, j, k)
        if i == j and k == 0:
            return 0.0
        if self.func is not None:
            a, b, k = _canonical(i, j, k)
            return _validate_value(a, b, k, self.func(a, b, k))
        return self.entries.get(_canonical(i, j, k), math.inf)

    def to_jsonable(self) -> dict:
        items = [
            {"i": i, "j": j, "k": k, "delta": (v if math.isfinite(v) else "inf")}
            for (i, j, k), v in sorted(self.entries.items())
        ]
        return {"d": self.d, "entries": items, "default": "inf"}

    @classmethod
    def from_jsonable(cls, obj: Mapping) -> "DeltaSpec":
        if obj.get("default", "inf") != "inf":
            raise InvalidDeltaSpec("only default 'inf' is supported")
        if "d" not in obj or not isinstance(obj["d"], int):
            raise InvalidDeltaSpec("need an integer field 'd'")
        entries = {}
        for item in obj.get("entries", []):
            try:
                key = (item["i"], item["j"], item["k"])
                raw = item["delta"]
            except (KeyError, TypeError):
                raise InvalidDeltaSpec("each entry needs fields i, j, k, delta")
            value = math.inf if raw == "inf" else float(raw)
            entries[key] = value
        return cls.from_entries(obj["d"], entries)


@dataclass(frozen=True)
class CorrelationModel:
    """Stationary cross-correlation function of one array row.

    rho(i, j, k, n) gives Corr(X_s^(i), X_{s+k}^(j)) in the row of size n;
    it is symmetric in (i, j), equals 1 at (i, i, 0), and vanishes for
    lags beyond max_lag (which may be math.inf for decaying tails).
    """

    d: int
    rho: Callable[[int, int, int, float], float] = field(repr=False)
    max_lag: float
    name: str = "custom"
    delta_spec: DeltaSpec | None = field(default=None, repr=False)


def hr_family(spec: DeltaSpec) -> CorrelationModel:
    """Canonical model with rho_ij(k, n) = 1 - delta_ij(k) / log n.

    Infinite coefficients map to correlation 0.  At sample sizes small
    enough that the formula would fall below -1 the value is clamped to
    -1 + 1e-9; only the n -> infinity behaviour is prescribed, so the
    clamp does not affect any limit.
    """

    def rho(i: int, j: int, k: int, n: float) -> float:
        if n < 2:
            raise ValueError("need sample size n >= 2")
        value = spec.delta(i, j, k)
        if math.isinf(value):
            return 0.0
        r = 1.0 - value / math.log(n)
        return max(r, -1.0 + 1e-9)

    return CorrelationModel(
        d=spec.d, rho=rho, max_lag=spec.finite_horizon, name="hr", delta_spec=spec
    )


def iid_model(d: int) -> CorrelationModel:
    def rho(i: int, j: int, k: int, n: float) -> float:
        return 1.0 if (i == j and k == 0) else 0.0

    return CorrelationModel(d=d, rho=rho, max_lag=0, name="iid")


def tabulated_model(d: int, table: Mapping[tuple[int, int, int], float]) -> CorrelationModel:
    """Correlations given by a finite lookup table, constant in n.

    Missing entries are 0; (i, i, 0) is fixed at 1 and must not be
    overridden with anything else.
    """
    canon = {}
    for (i, j, k), value in table.items():
        _validate_index(d, i, j, k)
        value = float(value)
        if not -1.0 <= value <= 1.0 or math.isnan(value):
            raise ValueError("correlation rho(%d,%d,%d) = %g outside [-1, 1]" % (i, j, k, value))
        if i == j and k == 0 and value != 1.0:
            raise ValueError("rho(i,i,0) is 1 by definition")
        canon[_canonical(i, j, k)] = value
    max_lag = max((k for (_, _, k), v in canon.items() if v != 0.0), default=0)

    def rho(i: int, j: int, k: int, n: float) -> float:
        if i == j and k == 0:
            return 1.0
        return canon.get(_canonical(i, j, k), 0.0)

    return CorrelationModel(d=d, rho=rho, max_lag=max_lag, name="tabulated")


def geometric_model(d: int, rate: float, cross: float = 0.0) -> CorrelationModel:
    """Geometrically decaying correlations rho_ij(k) = c_ij * rate^k with
    c_ii = 1 and c_ij = cross off the diagonal.

    The cross matrix must be positive semidefinite, which for the
    equicorrelated form means cross in (-1/(d-1), 1]; together with
    |rate| < 1 the whole space-time covariance is then PSD (its spectral
    density factorises into the AR(1) spectrum times the cross matrix).
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError("need decay rate in [0, 1)")
    if d > 1 and not (-1.0 / (d - 1) < cross <= 1.0):
        raise ValueError("need cross-correlation in (-1/(d-1), 1]")

    def rho(i: int, j: int, k: int, n: float) -> float:
        base = 1.0 if i == j else cross
        return base * rate**k

    return CorrelationModel(d=d, rho=rho, max_lag=(0 if rate == 0.0 else math.inf), name="geometric")


def constant_model(d: int, rho_value: float) -> CorrelationModel:
    """Equicorrelated model: rho_ij(k) = rho_value everywhere except the
    unit diagonal at lag 0.  PSD for rho_value in [0, 1) since the
    covariance is (1 - rho) I + rho J over all space-time indices.  A
    fixed correlation never satisfies the mixing conditions, which is the
    point: it is the stock counterexample for the condition checkers.
    """
    if not 0.0 <= rho_value < 1.0:
        raise ValueError("need constant correlation in [0, 1)")

    def rho(i: int, j: int, k: int, n: float) -> float:
        return 1.0 if (i == j and k == 0) else rho_value

    return CorrelationModel(d=d, rho=rho, max_lag=math.inf, name="constant")


@dataclass(frozen=True)
class DeltaEstimate:
    value: float
    max_successive_diff: float
    diverged: bool


def estimate_delta(
    model: CorrelationModel,
    i: int,
    j: int,
    k: int,
    n_grid: Iterable[float],
    divergence_threshold: float = 1e6,
) -> DeltaEstimate:
    """Numerical probe of delta_ij(k) = lim (1 - rho_ij(k, n)) log n.

    Evaluates the sequence on the given sample-size grid and returns its
    last value together with the largest successive difference.  The
    estimate is reported as infinity when the sequence ends above the
    divergence threshold while still increasing over its last three grid
    points; that pattern distinguishes genuine divergence from slow
    convergence to a finite value.
    """
    grid = [float(n) for n in n_grid]
    if len(grid) < 3:
        raise ValueError("need at least three grid points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("need a strictly increasing n grid")
    if grid[0] <= 1.0:
        raise ValueError("need sample sizes > 1")
    seq = [(1.0 - model.rho(i, j, k, n)) * math.log(n) for n in grid]
    diffs = [abs(b - a) for a, b in zip(seq, seq[1:])]
    diverged = seq[-1] > divergence_threshold and seq[-3] < seq[-2] < seq[-1]
    return DeltaEstimate(
        value=math.inf if diverged else seq[-1],
        max_successive_diff=max(diffs),
        diverged=diverged,
    )


def berman_term(rho: float, n: float) -> float:
    """One summand of the long-range diagnostic,

        |rho| * exp(-(2 log n - log log n) / (1 + |rho|)).

    Needs |rho| < 1 and n >= 3.
    """
    if math.isnan(rho) or not abs(rho) < 1.0:
        raise ValueError("need |rho| < 1")
    if n < 3:
        raise ValueError("need n >= 3")
    r = abs(rho)
    if r == 0.0:
        return 0.0
    return r * math.exp(-(2.0 * math.log(n) - math.log(math.log(n))) / (1.0 + r))


@dataclass(frozen=True)
class BlockParameters:
    """Block sizes for the long/short-range split: 1 <= l_n < r_n <= n,
    with q_n = floor(n / r_n) blocks."""

    n: int
    l_n: int
    r_n: int
    q_n: int = field(init=False)

    def __post_init__(self):
        if not 1 <= self.l_n < self.r_n <= self.n:
            raise ValueError("need 1 <= l_n < r_n <= n")
        object.__setattr__(self, "q_n", self.n // self.r_n)


def _lag_window(model: CorrelationModel, lo: int, hi: int) -> range:
    if model.max_lag < lo:
        return range(0)
    hi = min(hi, model.max_lag if math.isfinite(model.max_lag) else hi)
    return range(lo, int(hi) + 1)


def check_long_range(model: CorrelationModel, params: BlockParameters) -> float:
    """Long-range dependence sum

        (n^2 / r_n) * sum_{i,j} sum_{s=l_n}^{n} berman_term(rho_ij(s, n), n).

    Lags beyond model.max_lag contribute nothing and are skipped.
    """
    n = params.n
    terms = []
    for i in range(1, model.d + 1):
        for j in range(1, model.d + 1):
            for s in _lag_window(model, params.l_n, n):
                r = model.rho(i, j, s, n)
                if r != 0.0:
                    terms.append(berman_term(r, n))
    return (n * n / params.r_n) * math.fsum(terms)


def check_short_range(model: CorrelationModel, n: int, m: int, r_n: int) -> float:
    """Short-range dependence sum

        sum_{i,j} sum_{s=m}^{r_n} n^{-(1-rho)/(1+rho)}
                                  * (log n)^{-rho/(1+rho)} / sqrt(1-rho^2)

    with rho = rho_ij(s, n).  Infinite left endpoints of the double limit
    are probed by increasing m; each rho = 0 term contributes exactly 1/n,
    and m > r_n gives an empty sum.
    """
    if m < 1 or r_n < 1:
        raise ValueError("need m >= 1 and r_n >= 1")
    if n < 2:
        raise ValueError("need n >= 2")
    log_n = math.log(n)
    terms = []
    for i in range(1, model.d + 1):
        for j in range(1, model.d + 1):
            for s in range(m, r_n + 1):
                r = model.rho(i, j, s, n) if s <= model.max_lag else 0.0
                if not abs(r) < 1.0:
                    raise ValueError("need |rho| < 1 in the short-range sum")
                terms.append(
                    n ** (-(1.0 - r) / (1.0 + r))
                    * log_n ** (-r / (1.0 + r))
                    / math.sqrt(1.0 - r * r)
                )
    return math.fsum(terms)


def check_simplified(model: CorrelationModel, n: int, l_n: int) -> float:
    """Single-line criterion log n * sum_{i,j} max_{l_n <= k <= n} |rho_ij(k, n)|.

    When this tends to 0 along n (for some l_n = o(n)) the long-range
    condition holds automatically and only small lags remain to check.
    """
    if not 1 <= l_n <= n:
        raise ValueError("need 1 <= l_n <= n")
    total = 0.0
    for i in range(1, model.d + 1):
        for j in range(1, model.d + 1):
            peak = 0.0
            for s in _lag_window(model, l_n, n):
                peak = max(peak, abs(model.rho(i, j, s, n)))
            total += peak
    return math.log(n) * total
