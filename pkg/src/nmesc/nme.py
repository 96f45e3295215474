"""Eigengap auto-tuning spectral clustering, plus the classic NJW baseline.

The auto-tuner scans the binarization threshold p, measures the normalized
maximum eigengap g_p of each pruned graph's unnormalized Laplacian, and
picks p-hat = argmin p/g_p. The largest eigengap at p-hat then fixes the
cluster count, and k-means on the low-eigenvalue spectral embedding yields
the final labels. No development-set tuning is involved anywhere.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .affinity import (
    AffinityKind,
    AffinityMatrix,
    EmbeddingSequence,
    WrongStateError,
    binarize,
    cosine_affinity,
    descending_order,
    kernel_affinity,
    symmetrize,
    _binarize_from_order,
)
from .diarization import DiarizationResult
from .numerics import EigenSystem, InvalidKError, KMeansConfig, eigh, eigvalsh, kmeans

__all__ = [
    "NmeConfig",
    "NjwConfig",
    "NmeProbe",
    "NmeScanEntry",
    "NmeScan",
    "IsolatedNodeError",
    "TooFewEigenvaluesError",
    "InputTooSmallError",
    "unnormalized_laplacian",
    "normalized_laplacian",
    "eigengap_vector",
    "nme_at",
    "nme_scan",
    "spectral_embedding",
    "nme_sc",
    "njw_sc",
]


class IsolatedNodeError(ValueError):
    """A graph vertex carries no affinity mass (zero row sum)."""


class TooFewEigenvaluesError(ValueError):
    """Eigengap analysis needs at least two eigenvalues."""


class InputTooSmallError(ValueError):
    """The scan needs at least 4 segments to be meaningful."""


@dataclass(frozen=True)
class NmeConfig:
    """Auto-tuner settings; the defaults require no tuning on any dataset.

    epsilon guards divisions (both in g_p's denominator and the ratio);
    p_max defaults to floor(N/4); max_speakers caps the eigengap search
    window; fixed_k overrides the estimated cluster count for the
    known-speaker-count protocol while p-hat is still auto-selected.
    """

    epsilon: float = 1e-10
    p_max: int | None = None
    max_speakers: int = 8
    fixed_k: int | None = None
    seed: int = 42

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_speakers < 1:
            raise ValueError("max_speakers must be >= 1")
        if self.p_max is not None and self.p_max < 1:
            raise ValueError("p_max must be >= 1 when set")
        if self.fixed_k is not None and not 1 <= self.fixed_k <= self.max_speakers:
            raise ValueError(f"fixed_k must be in [1, {self.max_speakers}]")


@dataclass(frozen=True)
class NjwConfig:
    """Settings for the kernel-based NJW baseline; sigma has no default."""

    sigma: float
    k: int | None = None
    max_speakers: int = 8
    seed: int = 42

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError("sigma must be a positive finite number")
        if self.k is not None and self.k < 1:
            raise ValueError("k override must be >= 1")
        if self.max_speakers < 1:
            raise ValueError("max_speakers must be >= 1")


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class NmeScanEntry:
    """Scan record for one p: eigengap vector and the derived g_p, r_p, k."""

    p: int
    gp: float
    rp: float
    k_at_p: int
    eigengap: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigengap", _readonly(self.eigengap))


@dataclass(frozen=True)
class NmeScan:
    """Full scan over p in [1, p_max] with the selected p_hat and k_hat."""

    entries: tuple[NmeScanEntry, ...]
    p_hat: int
    k_hat: int
    p_max: int

    def __post_init__(self):
        if [e.p for e in self.entries] != list(range(1, self.p_max + 1)):
            raise ValueError("entries must cover every p in [1, p_max] exactly once, ascending")
        if not 1 <= self.p_hat <= self.p_max:
            raise ValueError(f"p_hat={self.p_hat} outside [1, {self.p_max}]")
        if self.k_hat < 1:
            raise ValueError("k_hat must be >= 1")

    def entry_at(self, p: int) -> NmeScanEntry:
        return self.entries[p - 1]


@dataclass(frozen=True)
class NmeProbe:
    """One-p evaluation carrying the full eigensystem of the pruned Laplacian."""

    p: int
    gp: float
    rp: float
    k_at_p: int
    eigengap: np.ndarray
    eigensystem: EigenSystem

    def __post_init__(self):
        object.__setattr__(self, "eigengap", _readonly(self.eigengap))


def unnormalized_laplacian(a: AffinityMatrix) -> np.ndarray:
    """L = D - A with D the diagonal of row sums; rows of L sum to zero.

    Self-loops cancel: the diagonal of A contributes identically to D and A.

    Raises:
        WrongStateError: input is not a symmetrized matrix.
    """
    if a.kind is not AffinityKind.SYMMETRIZED:
        raise WrongStateError(f"laplacian expects a symmetrized matrix, got {a.kind.value}")
    return np.diag(a.data.sum(axis=1)) - a.data


def normalized_laplacian(a: AffinityMatrix) -> np.ndarray:
    """Symmetrically normalized adjacency D^-1/2 A D^-1/2 (eigenvalues in [-1, 1]).

    Raises:
        WrongStateError: input is not a kernelized matrix.
        IsolatedNodeError: some row sums to zero (vertex with no affinity mass).
    """
    if a.kind is not AffinityKind.KERNELIZED:
        raise WrongStateError(f"normalized laplacian expects a kernelized matrix, got {a.kind.value}")
    d = a.data.sum(axis=1)
    if np.any(d <= 0):
        bad = int(np.argmax(d <= 0))
        raise IsolatedNodeError(f"vertex {bad} has zero affinity mass")
    s = 1.0 / np.sqrt(d)
    return a.data * np.outer(s, s)


def eigengap_vector(values: np.ndarray, limit: int) -> np.ndarray:
    """Consecutive differences of ascending eigenvalues, truncated to `limit` gaps.

    Index i holds values[i+1] - values[i]; negative rounding noise is
    clamped to zero. The truncation implements the speaker-count cap at
    estimation time.

    Raises:
        TooFewEigenvaluesError: fewer than two eigenvalues.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.shape[0] < 2:
        raise TooFewEigenvaluesError("need at least 2 eigenvalues to form gaps")
    if limit < 1:
        raise ValueError("limit must be >= 1")
    gaps = np.diff(values)[: min(int(limit), values.shape[0] - 1)]
    return np.maximum(gaps, 0.0)


def _nme_metrics(values: np.ndarray, p: int, cfg: NmeConfig):
    """g_p, r_p, k and the gap vector from one Laplacian spectrum."""
    gaps = eigengap_vector(values, cfg.max_speakers)
    gp = float(gaps.max()) / (float(values[-1]) + cfg.epsilon)
    rp = p / max(gp, cfg.epsilon)
    k = 1 + int(np.argmax(gaps))  # ties: lowest gap index, i.e. fewest clusters
    return gp, rp, k, gaps


def nme_at(a: AffinityMatrix, p: int, cfg: NmeConfig = NmeConfig()) -> NmeProbe:
    """Evaluate one binarization threshold p on a raw-cosine affinity matrix.

    Runs binarize -> symmetrize -> unnormalized Laplacian -> eigendecomposition
    and derives g_p = max(gap)/(lambda_max + eps), r_p = p/max(g_p, eps) and
    the gap-argmax cluster count.
    """
    sym = symmetrize(binarize(a, p))
    es = eigh(unnormalized_laplacian(sym))
    gp, rp, k, gaps = _nme_metrics(es.values, int(p), cfg)
    return NmeProbe(p=int(p), gp=gp, rp=rp, k_at_p=k, eigengap=gaps, eigensystem=es)


def _scan_entry(order: np.ndarray, p: int, cfg: NmeConfig) -> NmeScanEntry:
    # Values-only fast path: the scan never needs eigenvectors except at
    # p-hat, which nme_sc re-probes with the full decomposition.
    b = _binarize_from_order(order, p)
    sym = (b + b.T) / 2.0
    lap = np.diag(sym.sum(axis=1)) - sym
    values = eigvalsh(lap)
    gp, rp, k, gaps = _nme_metrics(values, p, cfg)
    return NmeScanEntry(p=p, gp=gp, rp=rp, k_at_p=k, eigengap=gaps)


def nme_scan(a: AffinityMatrix, cfg: NmeConfig = NmeConfig(), *, workers: int = 1) -> NmeScan:
    """Scan every integer p in [1, min(p_max, N)] and select p_hat, k_hat.

    p_hat is the argmin of r_p (lowest p on ties); k_hat is the gap-argmax
    at p_hat capped by max_speakers, or cfg.fixed_k when set. With
    workers > 1 the per-p evaluations fan out across a thread pool; the
    result is identical for any worker count.

    Raises:
        InputTooSmallError: fewer than 4 segments.
        WrongStateError: input is not a raw-cosine matrix.
    """
    if a.kind is not AffinityKind.RAW_COSINE:
        raise WrongStateError(f"scan expects a raw-cosine matrix, got {a.kind.value}")
    n = a.n
    if n < 4:
        raise InputTooSmallError(f"need at least 4 segments, got {n}")
    p_max = cfg.p_max if cfg.p_max is not None else max(1, n // 4)
    p_max = min(int(p_max), n)
    order = descending_order(a.data)

    ps = range(1, p_max + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = tuple(pool.map(lambda p: _scan_entry(order, p, cfg), ps))
    else:
        entries = tuple(_scan_entry(order, p, cfg) for p in ps)

    best = min(entries, key=lambda e: (e.rp, e.p))
    k_hat = cfg.fixed_k if cfg.fixed_k is not None else min(best.k_at_p, cfg.max_speakers)
    return NmeScan(entries=entries, p_hat=best.p, k_hat=k_hat, p_max=p_max)


def spectral_embedding(es: EigenSystem, k: int) -> np.ndarray:
    """Rows of the k eigenvectors with the smallest eigenvalues (not renormalized).

    Raises:
        InvalidKError: k outside [1, n].
    """
    if not 1 <= k <= es.n:
        raise InvalidKError(f"k={k} outside [1, {es.n}]")
    return es.vectors[:, :k].copy()


def nme_sc(
    emb: EmbeddingSequence, cfg: NmeConfig = NmeConfig(), *, workers: int = 1
) -> tuple[DiarizationResult, NmeScan]:
    """End-to-end auto-tuned spectral clustering of an embedding sequence.

    Returns the per-segment labels as a DiarizationResult plus the full
    scan for diagnostics. Deterministic for a fixed cfg.seed.
    """
    if emb.n < 4:
        raise InputTooSmallError(f"need at least 4 segments, got {emb.n}")
    a = cosine_affinity(emb)
    scan = nme_scan(a, cfg, workers=workers)
    probe = nme_at(a, scan.p_hat, cfg)
    points = spectral_embedding(probe.eigensystem, scan.k_hat)
    km = kmeans(points, scan.k_hat, KMeansConfig(seed=cfg.seed))
    result = DiarizationResult(
        recording_id=emb.recording_id, starts=emb.starts, ends=emb.ends, labels=km.labels
    )
    return result, scan


def _njw_embedding(es: EigenSystem, k: int) -> np.ndarray:
    """Top-k eigenvector rows of the normalized adjacency, row-normalized."""
    top = es.vectors[:, ::-1][:, :k]
    norms = np.linalg.norm(top, axis=1, keepdims=True)
    return top / np.where(norms > 1e-12, norms, 1.0)


def njw_sc(emb: EmbeddingSequence, cfg: NjwConfig) -> DiarizationResult:
    """Kernel-affinity NJW spectral clustering baseline.

    Estimates k from the largest gap of the normalized adjacency's
    descending spectrum (window capped at max_speakers) unless cfg.k is
    set, then clusters the row-normalized top-k eigenvector matrix.
    """
    if emb.n < 4:
        raise InputTooSmallError(f"need at least 4 segments, got {emb.n}")
    es = eigh(normalized_laplacian(kernel_affinity(emb, cfg.sigma)))
    if cfg.k is not None:
        if not 1 <= cfg.k <= emb.n:
            raise InvalidKError(f"k={cfg.k} outside [1, {emb.n}]")
        k = cfg.k
    else:
        desc = es.values[::-1]
        window = min(cfg.max_speakers, emb.n - 1)
        gaps = desc[:window] - desc[1 : window + 1]
        k = 1 + int(np.argmax(gaps))
    points = _njw_embedding(es, k)
    km = kmeans(points, k, KMeansConfig(seed=cfg.seed))
    return DiarizationResult(
        recording_id=emb.recording_id, starts=emb.starts, ends=emb.ends, labels=km.labels
    )
