"""Exact samplers for stationary Gaussian vector paths.

A path of length L from a d-dimensional model with correlations
rho_ij(k, n) has the block-Toeplitz covariance

    Sigma[(t-1)d + i, (s-1)d + j] = rho_ij(|t - s|, n),

indexed time-major.  Three exact routes are provided:

* dense Cholesky of the assembled matrix (desk scale, L*d <= 8192),
* banded Cholesky for models whose correlation vanishes beyond a small
  max_lag (the band has width d*max_lag + d - 1),
* circulant embedding: the covariance sequence is wrapped onto a cycle
  of length M >= 2(L-1), diagonalised by FFT, and sampled in the
  frequency domain.  The embedding is exact whenever the wrapped
  spectral blocks stay positive semidefinite; padding is doubled up to
  three times before falling back to Cholesky.

Models with max_lag = 0 short-circuit to a lag-0 factor multiply, which
is the same distribution at a fraction of the cost.

Every replicate draws from its own substream, so results are
reproducible for a given (seed, model, length, count) no matter how
replicates are batched or parallelised.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import scipy.linalg

from .correlation import CorrelationModel
from .errors import EmbeddingNotPSD, NotPositiveSemidefinite
from .rng import RngKey, standard_normal

__all__ = [
    "BlockCovariance",
    "SamplePath",
    "PsdReport",
    "assemble_covariance",
    "validate_psd",
    "cholesky_sample",
    "circulant_sample",
    "sample_paths",
    "iter_path_blocks",
    "componentwise_maxima",
    "write_path",
    "read_path",
]

log = logging.getLogger(__name__)

DENSE_CAP = 8192
PATH_MAGIC = b"HREXPATH"

_DEFAULT_JITTER = 1e-10
_BLOCK_VALUES = 4_000_000  # target floats per replicate batch


@dataclass(frozen=True, eq=False)
class BlockCovariance:
    length: int
    d: int
    matrix: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class SamplePath:
    values: np.ndarray = field(repr=False)
    n: int
    d: int
    seed_provenance: str


@dataclass(frozen=True, eq=False)
class PsdReport:
    ok: bool  # True when plain Cholesky succeeded, False when jitter was needed
    jitter_used: float
    factor: np.ndarray = field(repr=False)


def assemble_covariance(
    model: CorrelationModel, length: int, n: float | None = None, max_size: int = DENSE_CAP
) -> BlockCovariance:
    """Dense block-Toeplitz covariance of a length-L path.

    n is the array-row size fed to the correlation function; it defaults
    to the path length, which is the triangular-array reading where one
    samples a whole row.  Dense assembly is limited to L*d <= max_size.
    """
    if length < 1:
        raise ValueError("need path length >= 1")
    if n is None:
        n = length
    d = model.d
    size = length * d
    if size > max_size:
        raise ValueError(
            "dense covariance of size %d exceeds the cap %d; use the banded or"
            " circulant sampler" % (size, max_size)
        )
    out = np.zeros((size, size))
    top_lag = min(length - 1, model.max_lag)
    lag = 0
    while lag <= top_lag:
        block = np.empty((d, d))
        for i in range(d):
            for j in range(d):
                block[i, j] = model.rho(i + 1, j + 1, lag, n)
        if not np.allclose(block, block.T, atol=1e-14):
            raise ValueError("correlation model is not symmetric in (i, j)")
        for t in range(length - lag):
            r0, c0 = t * d, (t + lag) * d
            out[r0 : r0 + d, c0 : c0 + d] = block
            if lag:
                out[c0 : c0 + d, r0 : r0 + d] = block
        lag += 1
    return BlockCovariance(length=length, d=d, matrix=out)


def validate_psd(cov: BlockCovariance, jitter: float = _DEFAULT_JITTER) -> PsdReport:
    """Cholesky-test a covariance, retrying once with jitter * I added.

    Raises NotPositiveSemidefinite when both attempts fail; that is an
    invalid correlation model, not a numerical accident.
    """
    try:
        return PsdReport(ok=True, jitter_used=0.0, factor=np.linalg.cholesky(cov.matrix))
    except np.linalg.LinAlgError:
        pass
    try:
        bumped = cov.matrix + jitter * np.eye(cov.matrix.shape[0])
        return PsdReport(ok=True, jitter_used=jitter, factor=np.linalg.cholesky(bumped))
    except np.linalg.LinAlgError:
        raise NotPositiveSemidefinite(
            "covariance (size %d) is not positive semidefinite, even with"
            " jitter %g" % (cov.matrix.shape[0], jitter)
        ) from None


def cholesky_sample(
    cov: BlockCovariance, key: RngKey, count: int, jitter: float = _DEFAULT_JITTER
) -> list[SamplePath]:
    """Exact dense-Cholesky paths; replicate r draws from substream key.child(r)."""
    report = validate_psd(cov, jitter)
    return list(_paths_from_blocks(_cholesky_blocks(cov, report, key, count, 0), key))


def _cholesky_blocks(
    cov: BlockCovariance, report: PsdReport, key: RngKey, count: int, start: int
) -> Iterator[tuple[int, np.ndarray]]:
    size = cov.length * cov.d
    batch = max(1, _BLOCK_VALUES // max(size, 1))
    factor_t = report.factor.T.copy()
    r = start
    while r < start + count:
        b = min(batch, start + count - r)
        z = np.empty((b, size))
        for row in range(b):
            z[row] = standard_normal(key.child(r + row).generator(), size)
        x = z @ factor_t
        yield r, x.reshape(b, cov.length, cov.d)
        r += b


def _lag_blocks(model: CorrelationModel, top_lag: int, n: float) -> np.ndarray:
    out = np.empty((top_lag + 1, model.d, model.d))
    for k in range(top_lag + 1):
        for i in range(model.d):
            for j in range(model.d):
                out[k, i, j] = model.rho(i + 1, j + 1, k, n)
    return out


def _factor_spectrum(lam: np.ndarray, tol: float) -> np.ndarray | None:
    """Factor real-symmetric spectral blocks; None when materially indefinite."""
    lam = 0.5 * (lam + np.swapaxes(lam, -1, -2))
    w, v = np.linalg.eigh(lam)
    if w.min() < -tol:
        return None
    return v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]


def circulant_sample(
    model: CorrelationModel,
    length: int,
    key: RngKey,
    count: int,
    n: float | None = None,
    max_doublings: int = 3,
    fallback: bool = True,
) -> list[SamplePath]:
    """Paths by circulant embedding (exact when the embedding is PSD).

    On a persistently indefinite embedding the sampler either falls back
    to dense Cholesky with a logged warning or raises EmbeddingNotPSD.
    """
    return list(
        _paths_from_blocks(
            _circulant_blocks(model, length, key, count, 0, n, max_doublings, fallback), key
        )
    )


def _circulant_blocks(
    model: CorrelationModel,
    length: int,
    key: RngKey,
    count: int,
    start: int,
    n: float | None,
    max_doublings: int = 3,
    fallback: bool = True,
) -> Iterator[tuple[int, np.ndarray]]:
    if length < 1:
        raise ValueError("need path length >= 1")
    if n is None:
        n = length
    d = model.d
    if model.max_lag == 0 or length == 1:
        yield from _lag0_blocks(model, length, key, count, start, n)
        return

    m = 1 << max(1, int(math.ceil(math.log2(max(2 * (length - 1), 2)))))
    factors = None
    for attempt in range(max_doublings + 1):
        half = m // 2
        top_lag = min(half, model.max_lag)
        blocks = _lag_blocks(model, int(top_lag), n)
        wrapped = np.zeros((m, d, d))
        lags = np.minimum(np.arange(m), m - np.arange(m))
        inside = lags <= top_lag
        wrapped[inside] = blocks[lags[inside]]
        spectrum = np.fft.fft(wrapped, axis=0).real
        tol = 1e-9 * max(1.0, float(np.abs(spectrum).max()))
        factors = _factor_spectrum(spectrum, tol)
        if factors is not None:
            break
        m *= 2
    if factors is None:
        if not fallback:
            raise EmbeddingNotPSD(
                "circulant embedding stayed indefinite after %d doublings" % max_doublings
            )
        log.warning(
            "circulant embedding indefinite after %d doublings; falling back to"
            " dense Cholesky", max_doublings,
        )
        cov = assemble_covariance(model, length, n)
        yield from _cholesky_blocks(cov, validate_psd(cov), key, count, start)
        return

    batch = max(1, _BLOCK_VALUES // (2 * m * d))
    r = start
    while r < start + count:
        b = min(batch, start + count - r)
        eps = np.empty((b, m, d), dtype=complex)
        for row in range(b):
            z = standard_normal(key.child(r + row).generator(), 2 * m * d)
            eps[row] = z[: m * d].reshape(m, d) + 1j * z[m * d :].reshape(m, d)
        spectral = np.einsum("fij,bfj->bfi", factors, eps)
        paths = (math.sqrt(m) * np.fft.ifft(spectral, axis=1)[:, :length, :].real)
        yield r, paths
        r += b


def _lag0_blocks(
    model: CorrelationModel, length: int, key: RngKey, count: int, start: int, n: float
) -> Iterator[tuple[int, np.ndarray]]:
    """Fast path for serially independent models: one d x d factor."""
    d = model.d
    lag0 = _lag_blocks(model, 0, n)[0]
    factor = _factor_spectrum(lag0[None], tol=1e-9 * max(1.0, float(np.abs(lag0).max())))
    if factor is None:
        raise NotPositiveSemidefinite("lag-0 correlation matrix is not PSD")
    factor_t = factor[0].T.copy()
    batch = max(1, _BLOCK_VALUES // (length * d))
    r = start
    while r < start + count:
        b = min(batch, start + count - r)
        z = np.empty((b, length, d))
        for row in range(b):
            z[row] = standard_normal(key.child(r + row).generator(), (length, d))
        yield r, z @ factor_t
        r += b


def _banded_form(model: CorrelationModel, length: int, n: float) -> tuple[np.ndarray, int]:
    """Lower band storage ab[o, a] = Sigma[a + o, a] of the block-Toeplitz
    covariance, for models with finite max_lag."""
    d = model.d
    max_lag = int(model.max_lag)
    bw = max_lag * d + (d - 1)
    size = length * d
    table = np.zeros((d, bw + 1))
    for rcomp in range(d):
        for o in range(bw + 1):
            lag, jcomp = divmod(rcomp + o, d)
            if lag <= max_lag:
                table[rcomp, o] = model.rho(rcomp + 1, jcomp + 1, lag, n)
    ab = np.zeros((bw + 1, size))
    a = np.arange(size)
    for o in range(bw + 1):
        valid = a + o < size
        ab[o, valid] = table[a[valid] % d, o]
    return ab, bw


def _banded_blocks(
    model: CorrelationModel,
    length: int,
    key: RngKey,
    count: int,
    start: int,
    n: float,
    jitter: float = _DEFAULT_JITTER,
) -> Iterator[tuple[int, np.ndarray]]:
    ab, bw = _banded_form(model, length, n)
    try:
        band = scipy.linalg.cholesky_banded(ab, lower=True)
    except np.linalg.LinAlgError:
        try:
            bumped = ab.copy()
            bumped[0] += jitter
            band = scipy.linalg.cholesky_banded(bumped, lower=True)
        except np.linalg.LinAlgError:
            raise NotPositiveSemidefinite(
                "banded covariance (length %d, bandwidth %d) is not positive"
                " semidefinite, even with jitter %g" % (length, bw, jitter)
            ) from None
    size = length * model.d
    batch = max(1, _BLOCK_VALUES // size)
    r = start
    while r < start + count:
        b = min(batch, start + count - r)
        z = np.empty((b, size))
        for row in range(b):
            z[row] = standard_normal(key.child(r + row).generator(), size)
        x = np.zeros_like(z)
        for o in range(bw + 1):
            x[:, o:] += band[o, : size - o] * z[:, : size - o]
        yield r, x.reshape(b, length, model.d)
        r += b


def iter_path_blocks(
    model: CorrelationModel,
    length: int,
    key: RngKey,
    count: int,
    method: str = "cholesky",
    n: float | None = None,
    start: int = 0,
) -> Iterator[tuple[int, np.ndarray]]:
    """Stream replicate blocks (first_index, values[b, length, d]) without
    holding all paths in memory.  Values are independent of the batching."""
    if n is None:
        n = length
    if method == "circulant":
        yield from _circulant_blocks(model, length, key, count, start, n)
    elif method == "cholesky":
        if model.max_lag == 0 or length == 1:
            yield from _lag0_blocks(model, length, key, count, start, n)
        elif length * model.d <= DENSE_CAP:
            cov = assemble_covariance(model, length, n)
            yield from _cholesky_blocks(cov, validate_psd(cov), key, count, start)
        elif math.isfinite(model.max_lag):
            yield from _banded_blocks(model, length, key, count, start, n)
        else:
            raise ValueError(
                "path of size %d exceeds the dense cap and the model has no"
                " finite band; use the circulant sampler" % (length * model.d)
            )
    else:
        raise ValueError("unknown sampling method %r" % (method,))


def sample_paths(
    model: CorrelationModel,
    length: int,
    key: RngKey,
    count: int,
    method: str = "cholesky",
    n: float | None = None,
) -> list[SamplePath]:
    return list(_paths_from_blocks(iter_path_blocks(model, length, key, count, method, n), key))


def _paths_from_blocks(blocks, key: RngKey) -> Iterator[SamplePath]:
    for start, values in blocks:
        for row in range(values.shape[0]):
            v = values[row]
            yield SamplePath(
                values=v,
                n=v.shape[0],
                d=v.shape[1],
                seed_provenance=key.child(start + row).provenance,
            )


def componentwise_maxima(path: SamplePath) -> np.ndarray:
    """Vector of per-component maxima over the path."""
    return path.values.max(axis=0)


def write_path(path: SamplePath, file) -> None:
    """Binary dump: magic 'HREXPATH', little-endian u64 n and d, then
    n*d little-endian f64 in row-major (time-major) order."""
    file.write(PATH_MAGIC)
    file.write(struct.pack("<QQ", path.n, path.d))
    file.write(np.ascontiguousarray(path.values, dtype="<f8").tobytes())


def read_path(file) -> SamplePath:
    magic = file.read(8)
    if magic != PATH_MAGIC:
        raise ValueError("not a path dump: bad magic %r" % (magic,))
    n, d = struct.unpack("<QQ", file.read(16))
    payload = file.read(8 * n * d)
    if len(payload) != 8 * n * d:
        raise ValueError("truncated path dump")
    values = np.frombuffer(payload, dtype="<f8").reshape(n, d).copy()
    return SamplePath(values=values, n=int(n), d=int(d), seed_provenance="file")
