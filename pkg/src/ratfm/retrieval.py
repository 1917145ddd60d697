"""Example retrieval by maximum normalized cross-correlation.

The similarity between two equal-length windows is the maximum over all
lags of their zero-padded (linear) cross-correlation, normalized by the
product of the full-vector Euclidean norms.  The correlation sequence is
computed with FFTs; lag selection runs through the shared kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dataset import Window
from .errors import (
    EmptyPoolError,
    InconsistentWindowLengthError,
    InvalidFractionError,
    LengthMismatchError,
    ZeroNormVectorError,
)


@dataclass(frozen=True)
class SimilarityResult:
    """Similarity score in [-1, 1] with the lag and pool index it came from."""

    score: float
    best_lag: int
    candidate_index: int = -1


@dataclass
class CandidatePool:
    """Immutable set of same-domain candidate windows.

    Entries typically come from the training regions of series other
    than the query's; windows from the query's own series are excluded
    at retrieval time.  ``fraction`` and ``seed`` record how the pool
    was subsampled.
    """

    domain: str
    entries: list[Window]
    fraction: float = 1.0
    seed: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.entries)

    def _stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """(entries matrix, per-entry norms), built once."""
        if "stack" not in self._cache:
            lengths = {len(e.input) for e in self.entries}
            if len(lengths) > 1:
                raise InconsistentWindowLengthError(
                    f"pool windows have mixed lengths {sorted(lengths)}"
                )
            stack = np.ascontiguousarray(
                np.stack([e.input for e in self.entries]), dtype=np.float64
            )
            norms = np.linalg.norm(stack, axis=1)
            self._cache["stack"] = stack
            self._cache["norms"] = norms
        return self._cache["stack"], self._cache["norms"]

    def _spectra(self, nfft: int) -> np.ndarray:
        key = ("rfft", nfft)
        if key not in self._cache:
            stack, _ = self._stacked()
            self._cache[key] = np.fft.rfft(stack, nfft, axis=1)
        return self._cache[key]


def _fft_size(length: int) -> int:
    return 1 << max(2 * length - 1, 1).bit_length()


def _cc_sequence(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Zero-padded cross-correlation, ordered from lag -(L-1) to +(L-1).

    Entry for lag k equals ``sum_t x[t + k] * y[t]`` over the valid
    overlap.
    """
    L = len(x)
    nfft = _fft_size(L)
    fx = np.fft.rfft(x, nfft)
    fy = np.fft.rfft(y, nfft)
    circ = np.fft.irfft(fx * np.conj(fy), nfft)
    return np.concatenate((circ[nfft - L + 1 :], circ[:L]))


def ncc_max(
    x: np.ndarray, y: np.ndarray, *, lag_zero_only: bool = False
) -> SimilarityResult:
    """Maximum normalized cross-correlation between two vectors.

    Ties between lags are broken toward the smaller ``|lag|``, then the
    negative lag, so results are deterministic.  With ``lag_zero_only``
    the search is skipped and only the aligned correlation is returned.
    The score is clipped to [-1, 1] to absorb FFT round-off.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise LengthMismatchError(
            f"need equal-length 1-d vectors of length >= 2, got {x.shape} / {y.shape}"
        )
    denom = float(np.linalg.norm(x)) * float(np.linalg.norm(y))
    if denom == 0.0:
        raise ZeroNormVectorError("similarity undefined for an all-zero vector")
    if lag_zero_only:
        score = float(np.dot(x, y)) / denom
        return SimilarityResult(score=float(np.clip(score, -1.0, 1.0)), best_lag=0)
    cc = _cc_sequence(x, y)
    j = _kernels.best_lag(cc)
    score = cc[j] / denom
    return SimilarityResult(
        score=float(np.clip(score, -1.0, 1.0)), best_lag=j - (len(x) - 1)
    )


def retrieve_best(
    query: Window, pool: CandidatePool
) -> tuple[Window, SimilarityResult]:
    """Pool entry maximizing :func:`ncc_max` against the query input.

    Entries from the query's own series are skipped.  Ties between
    candidates are broken toward the lowest pool index.
    """
    if not pool.entries:
        raise EmptyPoolError(f"pool for domain {pool.domain!r} is empty")
    q = np.asarray(query.input, dtype=np.float64)
    L = len(q)
    stack, norms = pool._stacked()
    if stack.shape[1] != L:
        raise InconsistentWindowLengthError(
            f"pool windows have length {stack.shape[1]}, query has {L}"
        )
    if L < 2:
        raise LengthMismatchError("query input must have length >= 2")
    qnorm = float(np.linalg.norm(q))
    if qnorm == 0.0:
        raise ZeroNormVectorError("query window is all-zero")

    nfft = _fft_size(L)
    fq = np.fft.rfft(q, nfft)
    circ = np.fft.irfft(fq[None, :] * np.conj(pool._spectra(nfft)), nfft, axis=1)
    cc = np.concatenate((circ[:, nfft - L + 1 :], circ[:, :L]), axis=1)

    best_j = _kernels.best_lag_batch(cc)
    scores = cc[np.arange(len(pool.entries)), best_j] / (qnorm * norms)
    # exclude the query's own series and zero-norm candidates
    usable = (norms > 0.0) & np.array(
        [e.series_id != query.series_id for e in pool.entries]
    )
    if not usable.any():
        raise EmptyPoolError(
            f"pool for domain {pool.domain!r} has no candidate outside "
            f"series {query.series_id!r}"
        )
    scores = np.where(usable, scores, -np.inf)
    idx = int(np.argmax(scores))
    result = SimilarityResult(
        score=float(np.clip(scores[idx], -1.0, 1.0)),
        best_lag=int(best_j[idx]) - (L - 1),
        candidate_index=idx,
    )
    return pool.entries[idx], result


def subsample_pool(pool: CandidatePool, fraction: float, seed: int) -> CandidatePool:
    """Uniform sample without replacement of ``ceil(fraction * N)`` entries.

    Selection is reproducible for a fixed seed and preserves the original
    entry order; ``fraction=1.0`` returns an identical pool.
    """
    if not 0.0 < fraction <= 1.0:
        raise InvalidFractionError(f"fraction must be in (0, 1], got {fraction}")
    n = len(pool.entries)
    if fraction == 1.0 or n == 0:
        entries = list(pool.entries)
    else:
        k = max(1, math.ceil(fraction * n))
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(n, size=k, replace=False))
        entries = [pool.entries[i] for i in idx]
    return CandidatePool(
        domain=pool.domain, entries=entries, fraction=fraction, seed=seed
    )


def build_pool(
    domain: str,
    windows: list[Window],
    fraction: float = 1.0,
    seed: int = 0,
) -> CandidatePool:
    """Assemble a pool from pre-cut windows, optionally subsampled."""
    pool = CandidatePool(domain=domain, entries=list(windows))
    if fraction != 1.0:
        pool = subsample_pool(pool, fraction, seed)
    return pool
