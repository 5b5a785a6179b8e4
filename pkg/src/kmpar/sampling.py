"""Seeded counter-based randomness and the per-point oversampling round.

Every draw is a pure function of (master seed, derivation path), so results
do not depend on sharding, thread count, or iteration order. That turns the
distributed-vs-sequential equivalence into an exact, bitwise test instead of
a distribution-level one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CostCache, Dataset

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 2.0 ** -53

# Purpose tags keep unrelated draw families on disjoint stream paths.
TAG_UNIFORM = 0x55
TAG_D2 = 0xD2
TAG_BERNOULLI = 0xB0
TAG_KMPP = 0xA1
TAG_INIT = 0x1C
TAG_REDUCE = 0xE0
TAG_GEN = 0x6E
TAG_TRIAL = 0x7A


class DegenerateDistribution(ValueError):
    """Every point already has zero cost; there is nothing left to sample."""


def _mix(h: int) -> int:
    # splitmix64 finalizer
    h &= _M64
    h = ((h ^ (h >> 30)) * _MIX1) & _M64
    h = ((h ^ (h >> 27)) * _MIX2) & _M64
    return h ^ (h >> 31)


def _fold(h: int, word: int) -> int:
    return _mix(((h ^ _mix(word & _M64)) + _GOLDEN) & _M64)


def _mix_np(arr: np.ndarray) -> np.ndarray:
    arr = arr.astype(np.uint64, copy=True)
    arr ^= arr >> np.uint64(30)
    arr *= np.uint64(_MIX1)
    arr ^= arr >> np.uint64(27)
    arr *= np.uint64(_MIX2)
    arr ^= arr >> np.uint64(31)
    return arr


def _fold_np(h: int, words: np.ndarray) -> np.ndarray:
    # elementwise version of _fold, identical bit for bit
    w = _mix_np(np.asarray(words).astype(np.uint64))
    w ^= np.uint64(h)
    w += np.uint64(_GOLDEN)
    return _mix_np(w)


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream addressed by (seed, derivation path).

    `child` extends the path; `uniform`/`uniform_array` fold trailing words
    (round index, point index, draw counter) into the state on the fly.
    """

    seed: int
    path: tuple[int, ...] = ()

    def _state(self) -> int:
        h = _mix(self.seed & _M64)
        for w in self.path:
            h = _fold(h, w)
        return h

    def child(self, *words: int) -> "RngStream":
        return RngStream(self.seed, self.path + tuple(int(w) for w in words))

    def uniform(self, *words: int) -> float:
        h = self._state()
        for w in words:
            h = _fold(h, int(w))
        return (h >> 11) * _INV53

    def uniform_array(self, words: tuple, indices) -> np.ndarray:
        """Vectorized uniforms: entry i is exactly uniform(*words, indices[i])."""
        h = self._state()
        for w in words:
            h = _fold(h, int(w))
        folded = _fold_np(h, indices)
        return (folded >> np.uint64(11)).astype(np.float64) * _INV53

    def integer(self, n: int, *words: int) -> int:
        """Uniform index in 0..n-1 (negligible floor bias for n << 2^53)."""
        idx = int(self.uniform(*words) * n)
        return min(idx, n - 1)

    def generator(self, *words: int) -> np.random.Generator:
        """Derived numpy generator for bulk, non-protocol randomness."""
        h = self._state()
        for w in words:
            h = _fold(h, int(w))
        return np.random.default_rng(h)


def derive_seed(seed: int, *words: int) -> int:
    """Stable 64-bit sub-seed for replicate/worker stream separation."""
    h = _mix(seed & _M64)
    for w in words:
        h = _fold(h, int(w))
    return h


def uniform_index(n: int, rng: RngStream) -> int:
    if n < 1:
        raise ValueError("cannot sample from an empty index range")
    return rng.integer(n, TAG_UNIFORM)


def sample_uniform(X: Dataset, rng: RngStream) -> int:
    """Uniformly sampled point index; repeatable for a fixed stream path."""
    return uniform_index(len(X), rng)


@dataclass
class D2Distribution:
    """Per-point sampling probabilities proportional to current cost."""

    probs: np.ndarray


def d2_distribution(X: Dataset, cache: CostCache) -> D2Distribution:
    if len(X) != len(cache.nearest_sq_dist):
        raise ValueError("cache does not match the dataset")
    if not cache.total_cost > 0.0:
        raise DegenerateDistribution("total cost is zero: distribution undefined")
    return D2Distribution(cache.nearest_sq_dist / cache.total_cost)


def sample_from_weights(weights: np.ndarray, u: float) -> int:
    """Inverse-CDF draw over the index order; zero-weight entries can never
    be returned because their CDF step is exactly flat."""
    cdf = np.cumsum(weights)
    total = cdf[-1]
    if not total > 0.0:
        raise DegenerateDistribution("all weights are zero")
    idx = int(np.searchsorted(cdf, u * total, side="right"))
    if idx >= len(weights):
        idx = int(np.flatnonzero(weights > 0)[-1])
    return idx


def sample_d2(dist: D2Distribution, rng: RngStream) -> int:
    return sample_from_weights(dist.probs, rng.uniform(TAG_D2))


def oversample_mask(costs: np.ndarray, total: float, ell: float,
                    round_index: int, rng: RngStream, indices) -> np.ndarray:
    """Independent Bernoulli per point with p = min(1, ell*cost/total).

    The draw for point i depends only on (seed, round, i), so evaluating this
    over any subset of indices selects exactly the same points as a full pass.
    """
    if ell < 0:
        raise ValueError("sampling factor must be nonnegative")
    if not total > 0.0:
        raise DegenerateDistribution("total cost is zero: nothing to oversample")
    p = np.minimum(1.0, (ell * costs) / total)
    u = rng.uniform_array((TAG_BERNOULLI, round_index), indices)
    return u < p


def bernoulli_round(X: Dataset, cache: CostCache, ell: float,
                    round_index: int, rng: RngStream) -> np.ndarray:
    """One oversampling round over the whole dataset; returns sorted indices."""
    n = len(X)
    mask = oversample_mask(cache.nearest_sq_dist, cache.total_cost, ell,
                           round_index, rng, np.arange(n))
    return np.flatnonzero(mask)
