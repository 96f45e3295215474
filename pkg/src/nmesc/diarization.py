"""Diarization timelines: embedding ingestion, RTTM I/O and DER scoring.

Scoring runs on exact rationals (seconds held as `Fraction`s parsed from
their decimal rendering) so interval arithmetic never drifts, with the
speaker mapping chosen by an exact-cost Hungarian assignment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .affinity import EmbeddingSequence

__all__ = [
    "DiarizationResult",
    "RttmRecord",
    "DerReport",
    "ParseError",
    "DimensionMismatchError",
    "EmptyInputError",
    "EmptyReferenceError",
    "load_embeddings",
    "write_embeddings",
    "records_from_result",
    "write_rttm",
    "load_rttm",
    "score_der",
    "score_recordings",
    "evaluate_corpus",
]


class ParseError(ValueError):
    """Malformed input line; the message names the line number."""


class DimensionMismatchError(ValueError):
    """Embedding vectors disagree on dimension."""


class EmptyInputError(ValueError):
    """No usable segments in the input."""


class EmptyReferenceError(ValueError):
    """Scoring requires a non-empty reference."""


@dataclass(frozen=True)
class DiarizationResult:
    """Per-segment cluster labels joined with the segment timeline."""

    recording_id: str
    starts: np.ndarray
    ends: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        starts = np.array(self.starts, dtype=float, copy=True)
        ends = np.array(self.ends, dtype=float, copy=True)
        labels = np.array(self.labels, dtype=int, copy=True)
        if not (starts.shape == ends.shape == labels.shape) or starts.ndim != 1:
            raise ValueError("starts, ends and labels must be 1-d arrays of equal length")
        if np.any(ends <= starts):
            raise ValueError("every segment must have end > start")
        distinct = np.unique(labels)
        if distinct.size and not np.array_equal(distinct, np.arange(distinct.size)):
            raise ValueError("labels must form a contiguous range [0, k)")
        for name, arr in (("starts", starts), ("ends", ends), ("labels", labels)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.starts.shape[0]

    @property
    def num_speakers(self) -> int:
        return int(self.labels.max()) + 1 if self.n else 0


@dataclass(frozen=True)
class RttmRecord:
    """One speaker turn: onset and duration in seconds."""

    recording_id: str
    onset: float
    duration: float
    speaker: str

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.onset < 0:
            raise ValueError(f"onset must be non-negative, got {self.onset}")


@dataclass(frozen=True)
class DerReport:
    """DER and its components, each as a fraction of scored reference time."""

    der: float
    speaker_error: float
    missed: float
    false_alarm: float
    scored_time: float
    collar: float
    mapping: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Embedding ingestion (JSON Lines)
# ---------------------------------------------------------------------------


def load_embeddings(path: str | Path) -> EmbeddingSequence:
    """Read an embedding sequence from a JSON-Lines file.

    Each line holds {"start": s, "end": s, "embedding": [...]}; an optional
    first line {"recording_id": ..., "dim": ...} names the recording and
    pins the dimension. Segments are re-sorted by start time.

    Raises:
        ParseError: malformed line (message names the line number).
        DimensionMismatchError: inconsistent embedding dimensions.
        EmptyInputError: fewer than 2 segments.
    """
    path = Path(path)
    recording_id = "rec"
    dim: int | None = None
    first_content = True
    rows: list[tuple[float, float, list[float]]] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(f"line {lineno}: expected a JSON object")
            if "embedding" not in obj:
                if first_content and ("recording_id" in obj or "dim" in obj):
                    recording_id = str(obj.get("recording_id", recording_id))
                    if "dim" in obj:
                        dim = int(obj["dim"])
                    first_content = False
                    continue
                raise ParseError(f"line {lineno}: missing 'embedding' field")
            first_content = False
            try:
                start = float(obj["start"])
                end = float(obj["end"])
                vec = [float(x) for x in obj["embedding"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"line {lineno}: {exc}") from exc
            if not (math.isfinite(start) and math.isfinite(end)) or any(
                not math.isfinite(x) for x in vec
            ):
                raise ParseError(f"line {lineno}: non-finite value")
            if end <= start:
                raise ParseError(f"line {lineno}: end ({end}) must exceed start ({start})")
            if not vec:
                raise ParseError(f"line {lineno}: empty embedding")
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise DimensionMismatchError(
                    f"line {lineno}: embedding has dimension {len(vec)}, expected {dim}"
                )
            if math.sqrt(sum(x * x for x in vec)) <= 1e-12:
                raise ParseError(f"line {lineno}: zero-norm embedding")
            rows.append((start, end, vec))
    if len(rows) < 2:
        raise EmptyInputError(f"{path}: need at least 2 segments, found {len(rows)}")
    rows.sort(key=lambda r: r[0])
    starts = np.array([r[0] for r in rows])
    ends = np.array([r[1] for r in rows])
    vectors = np.array([r[2] for r in rows])
    return EmbeddingSequence(starts=starts, ends=ends, vectors=vectors, recording_id=recording_id)


def write_embeddings(emb: EmbeddingSequence, path: str | Path, header: bool = True) -> None:
    """Write an embedding sequence in the JSON-Lines schema read by load_embeddings.

    With header=False the optional first line is omitted; the loader then
    falls back to the default recording id.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if header:
            fh.write(json.dumps({"recording_id": emb.recording_id, "dim": emb.dim}) + "\n")
        for i in range(emb.n):
            row = {
                "start": float(emb.starts[i]),
                "end": float(emb.ends[i]),
                "embedding": [float(x) for x in emb.vectors[i]],
            }
            fh.write(json.dumps(row) + "\n")


# ---------------------------------------------------------------------------
# RTTM I/O
# ---------------------------------------------------------------------------

_MERGE_GAP = 1e-6  # seconds; adjacent same-speaker segments closer than this merge


def records_from_result(result: DiarizationResult) -> list[RttmRecord]:
    """Render a labeled timeline as RTTM records, merging touching same-label runs."""
    records: list[RttmRecord] = []
    open_start: float | None = None
    open_end = 0.0
    open_label = -1
    for i in range(result.n):
        s, e, lab = float(result.starts[i]), float(result.ends[i]), int(result.labels[i])
        if open_start is not None and lab == open_label and s - open_end < _MERGE_GAP:
            open_end = max(open_end, e)
            continue
        if open_start is not None:
            records.append(
                RttmRecord(result.recording_id, open_start, open_end - open_start, f"spk{open_label}")
            )
        open_start, open_end, open_label = s, e, lab
    if open_start is not None:
        records.append(
            RttmRecord(result.recording_id, open_start, open_end - open_start, f"spk{open_label}")
        )
    return records


def _rttm_line(rec: RttmRecord) -> str:
    return (
        f"SPEAKER {rec.recording_id} 1 {rec.onset:.3f} {rec.duration:.3f} "
        f"<NA> <NA> {rec.speaker} <NA> <NA>"
    )


def write_rttm(result: DiarizationResult | Iterable[RttmRecord], sink: str | Path | IO[str]) -> None:
    """Write RTTM lines for a DiarizationResult or an iterable of records."""
    records = records_from_result(result) if isinstance(result, DiarizationResult) else list(result)
    text = "".join(_rttm_line(r) + "\n" for r in records)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        Path(sink).write_text(text, encoding="utf-8")


def load_rttm(path: str | Path) -> list[RttmRecord]:
    """Parse an RTTM file into records.

    Raises:
        ParseError: malformed line (wrong field count, type, or values).
    """
    path = Path(path)
    records: list[RttmRecord] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(";;"):
                continue
            fields = line.split()
            if len(fields) != 10:
                raise ParseError(f"line {lineno}: expected 10 fields, got {len(fields)}")
            if fields[0] != "SPEAKER":
                raise ParseError(f"line {lineno}: expected type SPEAKER, got {fields[0]!r}")
            try:
                onset = float(fields[3])
                duration = float(fields[4])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: bad onset/duration") from exc
            try:
                records.append(
                    RttmRecord(recording_id=fields[1], onset=onset, duration=duration, speaker=fields[7])
                )
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# DER scoring
# ---------------------------------------------------------------------------


def _frac(x: float | str | Fraction) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(str(x))


def _intervals(records: Sequence[RttmRecord]) -> list[tuple[str, Fraction, Fraction]]:
    out = []
    for r in records:
        onset = _frac(r.onset)
        out.append((r.speaker, onset, onset + _frac(r.duration)))
    return out


def _score_times(
    ref: Sequence[RttmRecord],
    hyp: Sequence[RttmRecord],
    collar: Fraction,
    score_overlap: bool,
):
    """Exact component times for one recording.

    Returns (scored_ref_time, missed, false_alarm, speaker_error, mapping),
    all times as Fractions of seconds. A collar of width `collar` centered
    on every reference boundary is excluded; without score_overlap, slices
    where the reference has 2+ active speakers are excluded too.
    """
    ref_iv = _intervals(ref)
    hyp_iv = _intervals(hyp)
    half = collar / 2

    zones = []
    for _, s, e in ref_iv:
        if half > 0:
            zones.append((s - half, s + half))
            zones.append((e - half, e + half))
    points = set()
    for _, s, e in ref_iv + hyp_iv:
        points.update((s, e))
    for z0, z1 in zones:
        points.update((z0, z1))
    cuts = sorted(points)

    overlap: dict[tuple[str, str], Fraction] = {}
    scored = Fraction(0)
    missed = Fraction(0)
    fa = Fraction(0)
    min_active = Fraction(0)
    for t0, t1 in zip(cuts, cuts[1:]):
        dur = t1 - t0
        if dur <= 0:
            continue
        if any(z0 <= t0 < z1 for z0, z1 in zones):
            continue
        ref_active = sorted({spk for spk, s, e in ref_iv if s <= t0 < e})
        hyp_active = sorted({spk for spk, s, e in hyp_iv if s <= t0 < e})
        if not ref_active and not hyp_active:
            continue
        if not score_overlap and len(ref_active) > 1:
            continue
        nr, nh = len(ref_active), len(hyp_active)
        scored += dur * nr
        missed += dur * max(0, nr - nh)
        fa += dur * max(0, nh - nr)
        min_active += dur * min(nr, nh)
        for r_spk in ref_active:
            for h_spk in hyp_active:
                key = (r_spk, h_spk)
                overlap[key] = overlap.get(key, Fraction(0)) + dur

    mapping = _optimal_mapping(overlap)
    matched = sum((overlap[(r, h)] for h, r in mapping.items()), Fraction(0))
    speaker_error = min_active - matched
    return scored, missed, fa, speaker_error, mapping


def _optimal_mapping(overlap: dict[tuple[str, str], Fraction]) -> dict[str, str]:
    """One-to-one hyp->ref map maximizing total matched time (exact integer costs)."""
    if not overlap:
        return {}
    refs = sorted({r for r, _ in overlap})
    hyps = sorted({h for _, h in overlap})
    ref_idx = {r: i for i, r in enumerate(refs)}
    hyp_idx = {h: i for i, h in enumerate(hyps)}
    denom = math.lcm(*[v.denominator for v in overlap.values()])
    scaled = {key: v * denom for key, v in overlap.items()}
    if max(scaled.values()) < 2**62:
        cost = np.zeros((len(refs), len(hyps)), dtype=np.int64)
        for (r, h), v in scaled.items():
            cost[ref_idx[r], hyp_idx[h]] = int(v)
    else:  # pragma: no cover - pathological denominators only
        cost = np.zeros((len(refs), len(hyps)))
        for (r, h), v in overlap.items():
            cost[ref_idx[r], hyp_idx[h]] = float(v)
    rows, cols = linear_sum_assignment(-cost)
    return {hyps[c]: refs[r] for r, c in zip(rows, cols) if cost[r, c] > 0}


def score_der(
    ref: Sequence[RttmRecord],
    hyp: Sequence[RttmRecord],
    collar: float = 0.25,
    score_overlap: bool = False,
) -> DerReport:
    """Diarization error rate of one recording's hypothesis against its reference.

    The optimal one-to-one speaker mapping (maximal matched time) absorbs
    label names; `collar` is the total no-score width centered on each
    reference boundary. An empty hypothesis scores as all-miss.

    Raises:
        EmptyReferenceError: ref is empty.
        ValueError: collar is negative.
    """
    if not ref:
        raise EmptyReferenceError("reference contains no records")
    if collar < 0:
        raise ValueError("collar must be >= 0")
    scored, missed, fa, se, mapping = _score_times(ref, hyp, _frac(collar), score_overlap)
    return _report(scored, missed, fa, se, mapping, collar)


def _report(scored, missed, fa, se, mapping, collar) -> DerReport:
    if scored == 0:
        return DerReport(0.0, 0.0, 0.0, 0.0, 0.0, float(collar), mapping)
    return DerReport(
        der=float((missed + fa + se) / scored),
        speaker_error=float(se / scored),
        missed=float(missed / scored),
        false_alarm=float(fa / scored),
        scored_time=float(scored),
        collar=float(collar),
        mapping=mapping,
    )


def _group_by_recording(records: Sequence[RttmRecord]) -> dict[str, list[RttmRecord]]:
    groups: dict[str, list[RttmRecord]] = {}
    for r in records:
        groups.setdefault(r.recording_id, []).append(r)
    return groups


def _grouped_times(
    ref: Sequence[RttmRecord],
    hyp: Sequence[RttmRecord],
    collar: float,
    score_overlap: bool,
):
    """Per-recording component times, keyed and iterated in recording-id order."""
    if not ref:
        raise EmptyReferenceError("reference contains no records")
    if collar < 0:
        raise ValueError("collar must be >= 0")
    ref_groups = _group_by_recording(ref)
    hyp_groups = _group_by_recording(hyp)
    orphans = sorted(set(hyp_groups) - set(ref_groups))
    if orphans:
        raise EmptyReferenceError(f"recording {orphans[0]}: no reference records")
    for rec_id in sorted(ref_groups):
        yield rec_id, _score_times(
            ref_groups[rec_id], hyp_groups.get(rec_id, []), _frac(collar), score_overlap
        )


def score_recordings(
    ref: Sequence[RttmRecord],
    hyp: Sequence[RttmRecord],
    collar: float = 0.25,
    score_overlap: bool = False,
) -> tuple[DerReport, dict[str, DerReport]]:
    """Score per recording id and aggregate by summed component times.

    Raises:
        EmptyReferenceError: ref empty, or a hypothesis recording id has no
            reference counterpart.
    """
    totals = [Fraction(0)] * 4
    per_recording: dict[str, DerReport] = {}
    for rec_id, (scored, missed, fa, se, mapping) in _grouped_times(ref, hyp, collar, score_overlap):
        per_recording[rec_id] = _report(scored, missed, fa, se, mapping, collar)
        for i, v in enumerate((scored, missed, fa, se)):
            totals[i] += v
    aggregate = _report(totals[0], totals[1], totals[2], totals[3], {}, collar)
    return aggregate, per_recording


def evaluate_corpus(
    pairs: Sequence[tuple[str | Path, str | Path]],
    collar: float = 0.25,
    score_overlap: bool = False,
) -> DerReport:
    """Corpus-level DER: component times summed over recordings, then divided.

    Each pair is (reference RTTM path, hypothesis RTTM path); recordings are
    matched by recording id within each pair. Errors are re-raised naming
    the offending pair.
    """
    totals = [Fraction(0)] * 4
    for ref_path, hyp_path in pairs:
        try:
            ref = load_rttm(ref_path)
            hyp = load_rttm(hyp_path)
            for _, (scored, missed, fa, se, _mapping) in _grouped_times(ref, hyp, collar, score_overlap):
                for i, v in enumerate((scored, missed, fa, se)):
                    totals[i] += v
        except (OSError, ValueError) as exc:
            raise type(exc)(f"{ref_path} vs {hyp_path}: {exc}") from exc
    return _report(totals[0], totals[1], totals[2], totals[3], {}, collar)
