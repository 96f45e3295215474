"""Synthetic ground-truth corpora and brute-force oracles.

Everything here exists to check the clustering pipeline against quantities
computed by construction or by exhaustive search, with no shared code path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .affinity import AffinityMatrix, EmbeddingSequence

__all__ = [
    "SynthSpec",
    "InfeasibleSpecError",
    "LengthMismatchError",
    "generate",
    "best_map_accuracy",
    "connected_components",
]

_MIN_CENTROID_ANGLE_COS = 0.5  # pairwise centroid angle >= 60 degrees


class InfeasibleSpecError(ValueError):
    """Cannot place that many centroids at the required separation in this dimension."""


class LengthMismatchError(ValueError):
    """Label sequences differ in length."""


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic speaker-embedding corpus with known labels.

    segments_per_cluster is either a fixed count or an inclusive (lo, hi)
    range sampled per cluster. noise is the pre-normalization gaussian
    amplitude; within_concentration scales the centroid before noise is
    added, so larger values give tighter clusters.
    """

    n_clusters: int
    segments_per_cluster: int | tuple[int, int]
    dim: int
    within_concentration: float = 1.0
    noise: float = 0.0
    seed: int = 42

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if not self.within_concentration > 0:
            raise ValueError("within_concentration must be positive")
        if isinstance(self.segments_per_cluster, tuple):
            lo, hi = self.segments_per_cluster
            if not 1 <= lo <= hi:
                raise ValueError("segments_per_cluster range must satisfy 1 <= lo <= hi")
        elif self.segments_per_cluster < 1:
            raise ValueError("segments_per_cluster must be >= 1")


def _draw_centroids(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    centroids: list[np.ndarray] = []
    attempts = 0
    budget = 200 * spec.n_clusters
    while len(centroids) < spec.n_clusters:
        if attempts >= budget:
            raise InfeasibleSpecError(
                f"could not place {spec.n_clusters} centroids at >= 60 degrees pairwise "
                f"in dimension {spec.dim} after {budget} draws"
            )
        attempts += 1
        cand = rng.standard_normal(spec.dim)
        cand /= np.linalg.norm(cand)
        if all(float(cand @ c) <= _MIN_CENTROID_ANGLE_COS for c in centroids):
            centroids.append(cand)
    return np.array(centroids)


def generate(spec: SynthSpec) -> tuple[EmbeddingSequence, np.ndarray]:
    """Build a labeled embedding sequence on the unit sphere.

    Cluster centroids are rejection-sampled to pairwise angles of at least
    60 degrees; members are normalize(concentration * centroid + noise * g)
    with g standard gaussian. Segment order is shuffled and timestamps are
    contiguous with millisecond-exact durations. Deterministic per seed.

    Returns:
        (embedding sequence, ground-truth label per segment)

    Raises:
        InfeasibleSpecError: the centroid separation cannot be met.
    """
    rng = np.random.default_rng(spec.seed)
    centroids = _draw_centroids(spec, rng)
    if isinstance(spec.segments_per_cluster, tuple):
        lo, hi = spec.segments_per_cluster
        counts = rng.integers(lo, hi + 1, size=spec.n_clusters)
    else:
        counts = np.full(spec.n_clusters, spec.segments_per_cluster, dtype=int)

    vectors = []
    labels = []
    for ci in range(spec.n_clusters):
        for _ in range(int(counts[ci])):
            v = spec.within_concentration * centroids[ci]
            if spec.noise > 0:
                v = v + spec.noise * rng.standard_normal(spec.dim)
            norm = np.linalg.norm(v)
            while norm <= 1e-12:  # pragma: no cover - measure-zero under gaussian noise
                v = spec.within_concentration * centroids[ci] + spec.noise * rng.standard_normal(spec.dim)
                norm = np.linalg.norm(v)
            vectors.append(v / norm)
            labels.append(ci)
    vectors = np.array(vectors)
    labels = np.array(labels, dtype=int)

    perm = rng.permutation(labels.shape[0])
    vectors, labels = vectors[perm], labels[perm]

    # Millisecond-exact contiguous timestamps keep RTTM round trips lossless.
    dur_ms = rng.integers(500, 2500, size=labels.shape[0])
    edges_ms = np.concatenate(([0], np.cumsum(dur_ms)))
    starts = edges_ms[:-1] / 1000.0
    ends = edges_ms[1:] / 1000.0
    emb = EmbeddingSequence(starts=starts, ends=ends, vectors=vectors)
    return emb, labels


_PERM_CACHE: dict[int, np.ndarray] = {}


def _permutations(m: int) -> np.ndarray:
    if m not in _PERM_CACHE:
        _PERM_CACHE[m] = np.array(list(itertools.permutations(range(m))), dtype=int)
    return _PERM_CACHE[m]


def best_map_accuracy(pred, truth) -> float:
    """Highest matching fraction over all label bijections (exhaustive, <= 8 labels).

    Raises:
        LengthMismatchError: sequences differ in length.
        ValueError: more than 8 distinct labels on either side.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise LengthMismatchError(f"label shapes differ: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise LengthMismatchError("empty label sequences")
    _, pred_ids = np.unique(pred, return_inverse=True)
    _, truth_ids = np.unique(truth, return_inverse=True)
    m = max(pred_ids.max(), truth_ids.max()) + 1
    if m > 8:
        raise ValueError(f"exhaustive mapping supports at most 8 labels, got {m}")
    contingency = np.zeros((m, m), dtype=np.int64)
    np.add.at(contingency, (truth_ids, pred_ids), 1)
    perms = _permutations(m)
    matches = contingency[perms, np.arange(m)].sum(axis=1)
    return float(matches.max()) / pred.size


def connected_components(a: AffinityMatrix | np.ndarray) -> int:
    """Number of connected components, treating any entry > 0 as an edge."""
    data = a.data if isinstance(a, AffinityMatrix) else np.asarray(a)
    n = data.shape[0]
    adjacency = data > 0
    seen = np.zeros(n, dtype=bool)
    components = 0
    for seed in range(n):
        if seen[seed]:
            continue
        components += 1
        frontier = np.zeros(n, dtype=bool)
        frontier[seed] = True
        while frontier.any():
            seen |= frontier
            reached = adjacency[frontier].any(axis=0)
            frontier = reached & ~seen
    return components
