"""Affinity matrices over speaker-embedding sequences.

Builds the raw-cosine and Gaussian-kernel similarity matrices, and applies
the row-wise top-p binarization plus symmetrization that turn a noisy
similarity matrix into an undirected graph adjacency.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AffinityKind",
    "AffinityMatrix",
    "EmbeddingSequence",
    "ZeroNormError",
    "InvalidSigmaError",
    "InvalidPError",
    "WrongStateError",
    "cosine_similarity",
    "cosine_affinity",
    "kernel_affinity",
    "binarize",
    "symmetrize",
]


class ZeroNormError(ValueError):
    """An embedding vector has (numerically) zero norm."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class InvalidSigmaError(ValueError):
    """Kernel scale must be a positive finite number."""


class InvalidPError(ValueError):
    """Binarization threshold p outside [1, n]."""


class WrongStateError(ValueError):
    """Operation applied to an affinity matrix in the wrong state."""


@dataclass(frozen=True)
class EmbeddingSequence:
    """N time-ordered speech segments with one embedding vector each.

    Invariants enforced on construction: N >= 2, one common dimension D >= 1,
    end > start per segment, segments sorted by start, no zero-norm vector.
    """

    starts: np.ndarray
    ends: np.ndarray
    vectors: np.ndarray
    recording_id: str = "rec"

    def __post_init__(self):
        starts = np.array(self.starts, dtype=float, copy=True)
        ends = np.array(self.ends, dtype=float, copy=True)
        vectors = np.atleast_2d(np.array(self.vectors, dtype=float, copy=True))
        n = starts.shape[0]
        if n < 2:
            raise ValueError(f"need at least 2 segments, got {n}")
        if ends.shape != (n,) or vectors.shape[0] != n:
            raise ValueError("starts, ends and vectors must agree in length")
        if vectors.shape[1] < 1:
            raise ValueError("embedding dimension must be >= 1")
        if not (np.all(np.isfinite(starts)) and np.all(np.isfinite(ends)) and np.all(np.isfinite(vectors))):
            raise ValueError("segments contain non-finite values")
        if np.any(ends <= starts):
            bad = int(np.argmax(ends <= starts))
            raise ValueError(f"segment {bad}: end ({ends[bad]}) must exceed start ({starts[bad]})")
        if np.any(np.diff(starts) < 0):
            raise ValueError("segments must be sorted by start time")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(norms <= 1e-12):
            bad = int(np.argmax(norms <= 1e-12))
            raise ZeroNormError(f"segment {bad} has a zero-norm embedding", index=bad)
        for name, arr in (("starts", starts), ("ends", ends), ("vectors", vectors)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.starts.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


class AffinityKind(enum.Enum):
    RAW_COSINE = "raw-cosine"
    KERNELIZED = "kernelized"
    BINARIZED = "binarized"
    SYMMETRIZED = "symmetrized"


@dataclass(frozen=True)
class AffinityMatrix:
    """n x n similarity matrix tagged with its processing state.

    p is set for BINARIZED/SYMMETRIZED matrices, sigma for KERNELIZED ones.
    """

    data: np.ndarray
    kind: AffinityKind
    p: int | None = None
    sigma: float | None = None

    def __post_init__(self):
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"affinity matrix must be square, got shape {data.shape}")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1].

    Raises:
        ZeroNormError: either vector has norm <= 1e-12.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na <= 1e-12 or nb <= 1e-12:
        raise ZeroNormError("cosine similarity undefined for zero-norm vectors")
    return float(np.clip(float(a @ b) / (na * nb), -1.0, 1.0))


def cosine_affinity(emb: EmbeddingSequence) -> AffinityMatrix:
    """Pairwise raw cosine similarities; diagonal pinned to exactly 1."""
    unit = emb.vectors / np.linalg.norm(emb.vectors, axis=1, keepdims=True)
    data = np.clip(unit @ unit.T, -1.0, 1.0)
    np.fill_diagonal(data, 1.0)
    return AffinityMatrix(data=data, kind=AffinityKind.RAW_COSINE)


def kernel_affinity(emb: EmbeddingSequence, sigma: float) -> AffinityMatrix:
    """Gaussian-kernel affinity with a zero diagonal.

    The distance fed to the kernel is the chordal distance between
    direction-normalized embeddings, d^2 = 2 * (1 - cos), so identical
    directions get weight 1 and the weight decays with angle.

    Raises:
        InvalidSigmaError: sigma is not a positive finite number.
    """
    if not np.isfinite(sigma) or sigma <= 0:
        raise InvalidSigmaError(f"sigma must be positive, got {sigma}")
    cos = cosine_affinity(emb).data
    d2 = np.clip(2.0 * (1.0 - cos), 0.0, None)
    data = np.exp(-d2 / (sigma * sigma))
    np.fill_diagonal(data, 0.0)
    return AffinityMatrix(data=data, kind=AffinityKind.KERNELIZED, sigma=float(sigma))


def descending_order(data: np.ndarray) -> np.ndarray:
    """Per-row column indices sorted by descending value, ties by ascending column."""
    return np.argsort(-data, axis=1, kind="stable")


def _binarize_from_order(order: np.ndarray, p: int) -> np.ndarray:
    n = order.shape[0]
    data = np.zeros((n, n))
    np.put_along_axis(data, order[:, :p], 1.0, axis=1)
    return data


def binarize(a: AffinityMatrix, p: int) -> AffinityMatrix:
    """Keep the p largest entries of each row as 1, zero the rest.

    The diagonal competes like any other entry; ties among equal values go
    to the lowest column index. Every output row sums to exactly p.

    Raises:
        WrongStateError: input is not a raw-cosine matrix.
        InvalidPError: p outside [1, n].
    """
    if a.kind is not AffinityKind.RAW_COSINE:
        raise WrongStateError(f"binarize expects a raw-cosine matrix, got {a.kind.value}")
    p = int(p)
    if not 1 <= p <= a.n:
        raise InvalidPError(f"p={p} outside [1, {a.n}]")
    data = _binarize_from_order(descending_order(a.data), p)
    return AffinityMatrix(data=data, kind=AffinityKind.BINARIZED, p=p)


def symmetrize(a: AffinityMatrix) -> AffinityMatrix:
    """Average a binarized matrix with its transpose; entries land in {0, 0.5, 1}.

    Raises:
        WrongStateError: input is not a binarized matrix.
    """
    if a.kind is not AffinityKind.BINARIZED:
        raise WrongStateError(f"symmetrize expects a binarized matrix, got {a.kind.value}")
    data = (a.data + a.data.T) / 2.0
    return AffinityMatrix(data=data, kind=AffinityKind.SYMMETRIZED, p=a.p)
