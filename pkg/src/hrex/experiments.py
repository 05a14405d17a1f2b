"""Monte Carlo experiments connecting finite-sample maxima to the limit law.

run_maxima_experiment simulates componentwise maxima of array rows and
counts threshold events on a grid; compare_to_limit turns the counts
into deviations from exp(-sum_i theta_i e^-x_i).  A sweep over n gets a
trend verdict: deviations must be weakly decreasing within two combined
standard errors per step.

lemma1_check verifies, by exhaustive enumeration of a finite discrete
matrix distribution, the exact decomposition of the exceedance union

    P(union_i {M_n^(i) > u_i}) =
        sum_k P(X_k^(1) > u_1,  nothing larger after k anywhere)
      + sum_{i>=2} sum_k P(X_k^(i) > u_i,
                           components s < i quiet from k on,
                           components t >= i quiet after k),

which partitions the union by the last exceedance time and the smallest
component index exceeding there.  The identity is distribution-free, so
it exercises exactly the strict/non-strict suffix-maximum conventions an
implementation can get wrong.

block_consistency_check compares P(joint maxima below u_n) computed on
whole rows against the q_n-th power of the probability on one block of
length r_n, the quantity whose asymptotic equality underpins the
block-decoupling step of the limit argument.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .correlation import CorrelationModel
from .jsonio import to_jsonable
from .norming import limit_cdf, norming_constants, threshold
from .rng import RngKey
from .sampler import iter_path_blocks

__all__ = [
    "ExperimentConfig",
    "EmpiricalCdf",
    "ConvergenceEntry",
    "ConvergenceReport",
    "DiscreteMatrixDistribution",
    "Lemma1Report",
    "BlockConsistency",
    "maxima_matrix",
    "empirical_cdf",
    "run_maxima_experiment",
    "compare_to_limit",
    "build_report",
    "weakly_decreasing",
    "lemma1_check",
    "random_matrix_distribution",
    "block_consistency_check",
    "write_convergence_csv",
    "write_convergence_json",
]


@dataclass(frozen=True)
class ExperimentConfig:
    model: CorrelationModel
    n_list: tuple[int, ...]
    replicates: int
    x_grid: tuple[tuple[float, ...], ...]
    seed: int
    sampler: str = "cholesky"

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(
            self, "x_grid", tuple(tuple(float(v) for v in p) for p in self.x_grid)
        )
        if len(self.n_list) == 0 or any(
            b <= a for a, b in zip(self.n_list, self.n_list[1:])
        ):
            raise ValueError("need a strictly increasing, non-empty n list")
        if self.n_list[0] < 2:
            raise ValueError("need sample sizes >= 2")
        if self.replicates < 100:
            raise ValueError("need at least 100 replicates")
        if not self.x_grid or any(len(p) != self.model.d for p in self.x_grid):
            raise ValueError("need a non-empty grid of d-dimensional points")
        if self.sampler not in ("cholesky", "circulant"):
            raise ValueError("sampler must be 'cholesky' or 'circulant'")


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    n: int
    x_grid: tuple[tuple[float, ...], ...]
    counts: np.ndarray
    replicates: int


@dataclass(frozen=True, eq=False)
class ConvergenceEntry:
    n: int
    x_grid: tuple[tuple[float, ...], ...]
    empirical: np.ndarray
    limits: np.ndarray
    deviations: np.ndarray
    std_errors: np.ndarray
    sup_deviation: float


@dataclass(frozen=True)
class ConvergenceReport:
    entries: tuple[ConvergenceEntry, ...]
    verdict: str  # "decreasing" or "not-decreasing"
    step_slacks: tuple[float, ...]


def maxima_matrix(
    model: CorrelationModel,
    n: int,
    key: RngKey,
    replicates: int,
    sampler: str = "cholesky",
    threads: int = 1,
) -> np.ndarray:
    """Componentwise maxima of `replicates` independent rows of size n,
    streamed so that only the (replicates, d) result is ever held.

    Replicate r always draws from substream key.child(r), so the result is
    byte-identical for every thread count; threads only split the replicate
    range into fixed chunks worked in parallel."""
    out = np.empty((replicates, model.d))

    def worker(start: int, count: int) -> None:
        blocks = iter_path_blocks(
            model, n, key, count, method=sampler, start=start
        )
        for first, block in blocks:
            out[first : first + block.shape[0]] = block.max(axis=1)

    if threads <= 1 or replicates < 2:
        worker(0, replicates)
        return out
    chunk = -(-replicates // max(threads, 1))
    starts = list(range(0, replicates, chunk))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(worker, s, min(chunk, replicates - s)) for s in starts
        ]
        for f in futures:
            f.result()
    return out


def empirical_cdf(
    maxima: np.ndarray, x_grid: Sequence[Sequence[float]], n: int
) -> EmpiricalCdf:
    """Counts of replicates with all component maxima below u_n(x_i)."""
    constants = norming_constants(n)
    grid = tuple(tuple(float(v) for v in p) for p in x_grid)
    u = np.array([[threshold(constants, v) for v in p] for p in grid])
    inside = (maxima[None, :, :] <= u[:, None, :]).all(axis=2)
    return EmpiricalCdf(
        n=n, x_grid=grid, counts=inside.sum(axis=1), replicates=maxima.shape[0]
    )


def run_maxima_experiment(cfg: ExperimentConfig, threads: int = 1) -> list[EmpiricalCdf]:
    """One EmpiricalCdf per n.  Replicate r of the run at size n draws from
    substream (seed, n, r), so results do not depend on which other sizes
    are in the sweep, on batching, or on the thread count."""
    root = RngKey(cfg.seed)
    out = []
    for n in cfg.n_list:
        maxima = maxima_matrix(
            cfg.model, n, root.child(n), cfg.replicates, cfg.sampler, threads=threads
        )
        out.append(empirical_cdf(maxima, cfg.x_grid, n))
    return out


def compare_to_limit(
    emp: EmpiricalCdf, thetas_per_point: Sequence[Sequence[float]]
) -> ConvergenceEntry:
    """Deviation of empirical threshold frequencies from the limit CDF
    evaluated with the given extremal coefficients (one theta vector per
    grid point)."""
    if len(thetas_per_point) != len(emp.x_grid):
        raise ValueError("need one theta vector per grid point")
    empirical = emp.counts / emp.replicates
    limits = np.array(
        [limit_cdf(thetas, x) for thetas, x in zip(thetas_per_point, emp.x_grid)]
    )
    deviations = np.abs(empirical - limits)
    std_errors = np.sqrt(empirical * (1.0 - empirical) / emp.replicates)
    return ConvergenceEntry(
        n=emp.n,
        x_grid=emp.x_grid,
        empirical=empirical,
        limits=limits,
        deviations=deviations,
        std_errors=std_errors,
        sup_deviation=float(deviations.max()),
    )


def weakly_decreasing(values: Sequence[float], slacks: Sequence[float] | None = None) -> bool:
    """True when each step satisfies v[i+1] <= v[i] + slack[i] (slack 0 by
    default, i.e. a plain non-increasing check)."""
    if slacks is None:
        slacks = [0.0] * (len(values) - 1)
    if len(slacks) != len(values) - 1:
        raise ValueError("need one slack per step")
    return all(b <= a + s for a, b, s in zip(values, values[1:], slacks))


def build_report(entries: Sequence[ConvergenceEntry]) -> ConvergenceReport:
    """Trend verdict over a sweep: sup deviations must be weakly decreasing
    within 2 * sqrt(se_i^2 + se_{i+1}^2) per step, the standard errors
    taken as each entry's largest grid-point standard error."""
    entries = tuple(sorted(entries, key=lambda e: e.n))
    ses = [float(e.std_errors.max()) if len(e.std_errors) else 0.0 for e in entries]
    slacks = tuple(
        2.0 * math.hypot(ses[i], ses[i + 1]) for i in range(len(entries) - 1)
    )
    sups = [e.sup_deviation for e in entries]
    verdict = "decreasing" if weakly_decreasing(sups, slacks) else "not-decreasing"
    return ConvergenceReport(entries=entries, verdict=verdict, step_slacks=slacks)


# ---------------------------------------------------------------------------
# exact enumeration of the exceedance decomposition


@dataclass(frozen=True)
class DiscreteMatrixDistribution:
    """Product distribution over n x d matrices: every cell (time, component)
    draws independently from its own finite atom list."""

    n: int
    d: int
    values: tuple[tuple[float, ...], ...]  # n*d cells, time-major
    probs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("need n >= 1 and d >= 1")
        if len(self.values) != self.n * self.d or len(self.probs) != self.n * self.d:
            raise ValueError("need one atom list per cell")
        for vals, ps in zip(self.values, self.probs):
            if len(vals) != len(ps) or not vals:
                raise ValueError("cell atoms and probabilities must align")
            if any(p < 0 for p in ps):
                raise ValueError("need non-negative probabilities")
            if abs(math.fsum(ps) - 1.0) > 1e-9:
                raise ValueError("cell probabilities must sum to 1")

    @property
    def support_size(self) -> int:
        size = 1
        for vals in self.values:
            size *= len(vals)
        return size

    @classmethod
    def iid_cells(cls, n: int, d: int, atoms: Sequence[float], probs: Sequence[float] | None = None):
        if probs is None:
            probs = [1.0 / len(atoms)] * len(atoms)
        cell_v = tuple(float(a) for a in atoms)
        cell_p = tuple(float(p) for p in probs)
        return cls(n=n, d=d, values=(cell_v,) * (n * d), probs=(cell_p,) * (n * d))


def random_matrix_distribution(
    gen: np.random.Generator, n: int, d: int, max_atoms: int = 3
) -> DiscreteMatrixDistribution:
    """Random instance with 1..max_atoms distinct atoms per cell and
    random (normalised) weights; used to fuzz the decomposition check."""
    values, probs = [], []
    for _ in range(n * d):
        m = int(gen.integers(1, max_atoms + 1))
        atoms = np.round(gen.uniform(-2.0, 2.0, size=m), 3)
        while len(set(atoms.tolist())) < m:
            atoms = np.round(gen.uniform(-2.0, 2.0, size=m), 3)
        w = gen.uniform(0.1, 1.0, size=m)
        w = w / w.sum()
        values.append(tuple(float(a) for a in atoms))
        probs.append(tuple(float(p) for p in w))
    return DiscreteMatrixDistribution(n=n, d=d, values=tuple(values), probs=tuple(probs))


@dataclass(frozen=True)
class Lemma1Report:
    lhs: float
    rhs: float
    difference: float
    support_size: int


def lemma1_check(
    dist: DiscreteMatrixDistribution, u: Sequence[float], max_support: int = 1_000_000
) -> Lemma1Report:
    """Exhaustively verify the last-exceedance decomposition on `dist`.

    Both sides are accumulated with exactly rounded summation (math.fsum),
    keeping the comparison within a 1e-12 budget even for float atom
    probabilities.
    """
    n, d = dist.n, dist.d
    if len(u) != d:
        raise ValueError("need one threshold per component")
    size = dist.support_size
    if size > max_support:
        raise ValueError("support of %d atoms exceeds the enumeration cap" % size)
    u = np.asarray([float(v) for v in u])

    radices = [len(vals) for vals in dist.values]
    atoms = np.empty((size, n * d))
    prob = np.ones(size)
    index = np.arange(size)
    stride = 1
    for cell in range(n * d - 1, -1, -1):
        digit = (index // stride) % radices[cell]
        atoms[:, cell] = np.asarray(dist.values[cell])[digit]
        prob *= np.asarray(dist.probs[cell])[digit]
        stride *= radices[cell]
    x = atoms.reshape(size, n, d)

    # inclusive suffix maxima over time, then the strict (exclusive) version
    incl = np.maximum.accumulate(x[:, ::-1, :], axis=1)[:, ::-1, :]
    excl = np.full_like(x, -np.inf)
    excl[:, :-1, :] = incl[:, 1:, :]

    union = (x.max(axis=1) > u).any(axis=1)
    counts = np.zeros(size, dtype=np.int64)
    for k in range(n):
        counts += (x[:, k, 0] > u[0]) & (excl[:, k, :] <= u).all(axis=1)
        for i in range(2, d + 1):
            c = i - 1
            quiet_before = (incl[:, k, :c] <= u[:c]).all(axis=1)
            quiet_after = (excl[:, k, c:] <= u[c:]).all(axis=1)
            counts += (x[:, k, c] > u[c]) & quiet_before & quiet_after

    lhs = math.fsum(prob[union].tolist())
    weighted = prob * counts
    rhs = math.fsum(weighted[counts > 0].tolist())
    return Lemma1Report(lhs=lhs, rhs=rhs, difference=abs(lhs - rhs), support_size=size)


@dataclass(frozen=True)
class BlockConsistency:
    n: int
    r_n: int
    q_n: int
    full_prob: float
    block_prob: float
    block_prob_power: float
    gap: float
    se_full: float
    se_power: float  # delta-method error of block_prob ** q_n


def block_consistency_check(
    model: CorrelationModel,
    n: int,
    r_n: int,
    x: Sequence[float],
    replicates: int,
    key: RngKey,
    sampler: str = "cholesky",
) -> BlockConsistency:
    """Estimate P(maxima of a full row stay below u_n(x)) against the
    q_n-th power of the same probability on a single length-r_n block.

    Both runs use the row-n thresholds, the row-n correlation model, and
    the same replicate substreams (common random numbers); only the path
    length differs.  With r_n = n the two computations coincide and the
    gap is exactly zero.
    """
    if not 1 <= r_n <= n:
        raise ValueError("need 1 <= r_n <= n")
    q_n = n // r_n
    constants = norming_constants(n)
    u = np.array([threshold(constants, v) for v in x])

    def below(length: int) -> float:
        hits = 0
        for start, block in iter_path_blocks(
            model, length, key, replicates, method=sampler, n=n
        ):
            hits += int((block.max(axis=1) <= u).all(axis=1).sum())
        return hits / replicates

    p_full = below(n)
    p_block = below(r_n)
    powered = p_block**q_n
    se_full = math.sqrt(p_full * (1.0 - p_full) / replicates)
    se_block = math.sqrt(p_block * (1.0 - p_block) / replicates)
    se_power = q_n * p_block ** max(q_n - 1, 0) * se_block
    return BlockConsistency(
        n=n,
        r_n=r_n,
        q_n=q_n,
        full_prob=p_full,
        block_prob=p_block,
        block_prob_power=powered,
        gap=abs(p_full - powered),
        se_full=se_full,
        se_power=se_power,
    )


# ---------------------------------------------------------------------------
# report files


def write_convergence_csv(report: ConvergenceReport, path) -> None:
    """Rows n, x1..xd, empirical, limit, deviation, std_error."""
    d = len(report.entries[0].x_grid[0]) if report.entries else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["n"] + ["x%d" % (i + 1) for i in range(d)]
            + ["empirical", "limit", "deviation", "std_error"]
        )
        for entry in report.entries:
            for g, point in enumerate(entry.x_grid):
                writer.writerow(
                    [entry.n]
                    + [repr(v) for v in point]
                    + [
                        repr(float(entry.empirical[g])),
                        repr(float(entry.limits[g])),
                        repr(float(entry.deviations[g])),
                        repr(float(entry.std_errors[g])),
                    ]
                )


def report_jsonable(report: ConvergenceReport) -> dict:
    return to_jsonable(
        {
            "verdict": report.verdict,
            "step_slacks": list(report.step_slacks),
            "entries": [
                {
                    "n": e.n,
                    "x_grid": [list(p) for p in e.x_grid],
                    "empirical": e.empirical.tolist(),
                    "limit": e.limits.tolist(),
                    "deviation": e.deviations.tolist(),
                    "std_error": e.std_errors.tolist(),
                    "sup_deviation": e.sup_deviation,
                }
                for e in report.entries
            ],
        }
    )


def write_convergence_json(report: ConvergenceReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
