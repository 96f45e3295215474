from __future__ import annotations

import numpy as np
import pytest

from nmesc import (
    DiarizationResult,
    DimensionMismatchError,
    EmptyInputError,
    EmptyReferenceError,
    ParseError,
    RttmRecord,
    evaluate_corpus,
    load_embeddings,
    load_rttm,
    records_from_result,
    score_der,
    score_recordings,
    write_embeddings,
    write_rttm,
)
from nmesc import EmbeddingSequence
from oracles import oracle_der_components


def _rec(spk: str, onset: float, dur: float, rec_id: str = "rec") -> RttmRecord:
    return RttmRecord(recording_id=rec_id, onset=onset, duration=dur, speaker=spk)


# ---------------------------------------------------------------------------
# Embedding ingestion
# ---------------------------------------------------------------------------


def test_load_embeddings_basic(tmp_path) -> None:
    path = tmp_path / "emb.jsonl"
    path.write_text(
        '{"start": 0.0, "end": 1.0, "embedding": [1.0, 0.0, 0.0]}\n'
        '{"start": 1.0, "end": 2.5, "embedding": [0.0, 1.0, 0.0]}\n'
    )
    emb = load_embeddings(path)
    assert emb.n == 2 and emb.dim == 3
    assert emb.recording_id == "rec"


def test_load_embeddings_header_and_sorting(tmp_path) -> None:
    path = tmp_path / "emb.jsonl"
    path.write_text(
        '{"recording_id": "callA", "dim": 2}\n'
        '{"start": 5.0, "end": 6.0, "embedding": [0.0, 1.0]}\n'
        '{"start": 0.0, "end": 1.0, "embedding": [1.0, 0.0]}\n'
    )
    emb = load_embeddings(path)
    assert emb.recording_id == "callA"
    assert emb.starts.tolist() == [0.0, 5.0]


def test_load_embeddings_end_before_start_names_line(tmp_path) -> None:
    path = tmp_path / "emb.jsonl"
    path.write_text(
        '{"start": 0.0, "end": 1.0, "embedding": [1.0]}\n'
        '{"start": 2.0, "end": 1.5, "embedding": [1.0]}\n'
    )
    with pytest.raises(ParseError, match="line 2"):
        load_embeddings(path)


def test_load_embeddings_dimension_mismatch(tmp_path) -> None:
    path = tmp_path / "emb.jsonl"
    path.write_text(
        '{"start": 0.0, "end": 1.0, "embedding": [1.0, 0.0]}\n'
        '{"start": 1.0, "end": 2.0, "embedding": [1.0]}\n'
    )
    with pytest.raises(DimensionMismatchError, match="line 2"):
        load_embeddings(path)


def test_load_embeddings_rejects_garbage(tmp_path) -> None:
    path = tmp_path / "emb.jsonl"
    path.write_text("not json\n")
    with pytest.raises(ParseError, match="line 1"):
        load_embeddings(path)
    path.write_text('{"start": 0.0, "end": 1.0}\n')
    with pytest.raises(ParseError, match="embedding"):
        load_embeddings(path)
    path.write_text('{"start": 0.0, "end": 1.0, "embedding": [0.0, 0.0]}\n')
    with pytest.raises(ParseError, match="zero-norm"):
        load_embeddings(path)


def test_load_embeddings_empty_inputs(tmp_path) -> None:
    path = tmp_path / "emb.jsonl"
    path.write_text("\n")
    with pytest.raises(EmptyInputError):
        load_embeddings(path)
    path.write_text('{"start": 0.0, "end": 1.0, "embedding": [1.0]}\n')
    with pytest.raises(EmptyInputError):
        load_embeddings(path)


def test_embeddings_round_trip(tmp_path) -> None:
    rng = np.random.default_rng(0)
    emb = EmbeddingSequence(
        starts=np.array([0.0, 1.25]),
        ends=np.array([1.0, 2.75]),
        vectors=rng.standard_normal((2, 5)),
        recording_id="roundtrip",
    )
    path = tmp_path / "emb.jsonl"
    write_embeddings(emb, path)
    back = load_embeddings(path)
    assert back.recording_id == emb.recording_id
    assert np.array_equal(back.starts, emb.starts)
    assert np.array_equal(back.ends, emb.ends)
    assert np.array_equal(back.vectors, emb.vectors)


# ---------------------------------------------------------------------------
# RTTM I/O
# ---------------------------------------------------------------------------


def test_write_rttm_exact_line(tmp_path) -> None:
    result = DiarizationResult(
        recording_id="rec", starts=np.array([0.0, 2.0]), ends=np.array([1.5, 3.0]), labels=np.array([0, 1])
    )
    path = tmp_path / "out.rttm"
    write_rttm(result, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "SPEAKER rec 1 0.000 1.500 <NA> <NA> spk0 <NA> <NA>"
    assert lines[1] == "SPEAKER rec 1 2.000 1.000 <NA> <NA> spk1 <NA> <NA>"


def test_rttm_merges_touching_same_label_segments() -> None:
    result = DiarizationResult(
        recording_id="rec",
        starts=np.array([0.0, 1.0, 2.0]),
        ends=np.array([1.0, 2.0, 3.0]),
        labels=np.array([0, 0, 1]),
    )
    records = records_from_result(result)
    assert len(records) == 2
    assert records[0].onset == 0.0 and records[0].duration == 2.0
    assert records[0].speaker == "spk0" and records[1].speaker == "spk1"


def test_rttm_round_trip(tmp_path) -> None:
    result = DiarizationResult(
        recording_id="callB",
        starts=np.array([0.0, 5.0, 9.5]),
        ends=np.array([1.5, 6.25, 10.0]),
        labels=np.array([0, 1, 0]),
    )
    path = tmp_path / "x.rttm"
    write_rttm(result, path)
    back = load_rttm(path)
    assert back == records_from_result(result)


def test_load_rttm_rejects_malformed(tmp_path) -> None:
    path = tmp_path / "bad.rttm"
    path.write_text("LEXEME rec 1 0.000 1.000 <NA> <NA> spk0 <NA> <NA>\n")
    with pytest.raises(ParseError, match="SPEAKER"):
        load_rttm(path)
    path.write_text("SPEAKER rec 1 0.000 1.000 spk0\n")
    with pytest.raises(ParseError, match="10 fields"):
        load_rttm(path)
    path.write_text("SPEAKER rec 1 0.000 -1.000 <NA> <NA> spk0 <NA> <NA>\n")
    with pytest.raises(ParseError, match="line 1"):
        load_rttm(path)
    path.write_text("SPEAKER rec 1 zero 1.000 <NA> <NA> spk0 <NA> <NA>\n")
    with pytest.raises(ParseError, match="onset"):
        load_rttm(path)


def test_load_rttm_skips_comments_and_blanks(tmp_path) -> None:
    path = tmp_path / "c.rttm"
    path.write_text(";; comment\n\nSPEAKER rec 1 0.000 1.000 <NA> <NA> a <NA> <NA>\n")
    assert len(load_rttm(path)) == 1


# ---------------------------------------------------------------------------
# DER scoring
# ---------------------------------------------------------------------------


def test_score_der_identity_is_zero() -> None:
    ref = [_rec("A", 0.0, 10.0), _rec("B", 12.0, 5.0)]
    rep = score_der(ref, ref, collar=0.0)
    assert rep.der == 0.0
    assert rep.missed == rep.false_alarm == rep.speaker_error == 0.0
    assert rep.scored_time == 15.0


def test_score_der_half_mismatch() -> None:
    ref = [_rec("A", 0.0, 10.0)]
    hyp = [_rec("spk0", 0.0, 5.0), _rec("spk1", 5.0, 5.0)]
    rep = score_der(ref, hyp, collar=0.0)
    assert rep.der == pytest.approx(0.5, abs=1e-9)
    assert rep.speaker_error == pytest.approx(0.5, abs=1e-9)
    assert rep.missed == 0.0 and rep.false_alarm == 0.0


def test_score_der_label_names_are_absorbed() -> None:
    ref = [_rec("A", 0.0, 10.0)]
    for name in ("A", "zz", "7"):
        rep = score_der(ref, [_rec(name, 0.0, 10.0)], collar=0.0)
        assert rep.der == 0.0
        assert rep.mapping == {name: "A"}


def test_score_der_collar_forgives_boundary_jitter() -> None:
    ref = [_rec("A", 0.0, 10.0)]
    hyp = [_rec("X", 0.05, 9.95)]
    assert score_der(ref, hyp, collar=0.0).der > 0.0
    rep = score_der(ref, hyp, collar=0.25)
    assert rep.der == 0.0
    assert rep.scored_time == pytest.approx(9.75)


def test_score_der_collar_monotone_scored_time() -> None:
    ref = [_rec("A", 0.0, 4.0), _rec("B", 6.0, 4.0)]
    hyp = [_rec("X", 0.0, 4.0), _rec("Y", 6.0, 4.0)]
    scored = [score_der(ref, hyp, collar=c).scored_time for c in (0.0, 0.1, 0.25, 0.5, 1.0)]
    assert all(a >= b for a, b in zip(scored, scored[1:]))


def test_score_der_missed_and_false_alarm() -> None:
    ref = [_rec("A", 0.0, 10.0)]
    rep = score_der(ref, [], collar=0.0)
    assert rep.der == 1.0 and rep.missed == 1.0
    rep = score_der(ref, [_rec("X", 0.0, 10.0), _rec("Y", 20.0, 10.0)], collar=0.0)
    assert rep.false_alarm == pytest.approx(1.0)
    assert rep.missed == 0.0 and rep.speaker_error == 0.0
    assert rep.der == pytest.approx(1.0)


def test_score_der_overlap_modes() -> None:
    ref = [_rec("A", 0.0, 10.0), _rec("B", 5.0, 10.0)]
    hyp = [_rec("X", 0.0, 10.0), _rec("Y", 5.0, 10.0)]
    skip = score_der(ref, hyp, collar=0.0, score_overlap=False)
    assert skip.scored_time == 10.0  # the doubly-active [5,10) region is excluded
    full = score_der(ref, hyp, collar=0.0, score_overlap=True)
    assert full.scored_time == 20.0
    assert full.der == 0.0


def test_score_der_empty_reference() -> None:
    with pytest.raises(EmptyReferenceError):
        score_der([], [_rec("X", 0.0, 1.0)])
    with pytest.raises(ValueError):
        score_der([_rec("A", 0.0, 1.0)], [], collar=-0.1)


def test_score_der_component_identity_random() -> None:
    rng = np.random.default_rng(1)
    for _ in range(25):
        ref = _random_records(rng, n_spk=3, n_seg=8)
        hyp = _random_records(rng, n_spk=3, n_seg=8)
        rep = score_der(ref, hyp, collar=0.25, score_overlap=bool(rng.integers(2)))
        assert rep.der == pytest.approx(rep.missed + rep.false_alarm + rep.speaker_error, abs=1e-9)
        assert min(rep.der, rep.missed, rep.false_alarm, rep.speaker_error) >= 0.0


def _random_records(rng: np.random.Generator, n_spk: int, n_seg: int, rec_id: str = "rec"):
    records = []
    for _ in range(n_seg):
        onset = int(rng.integers(0, 20000)) / 1000.0
        dur = int(rng.integers(200, 5000)) / 1000.0
        records.append(_rec(f"s{int(rng.integers(n_spk))}", onset, dur, rec_id))
    return records


def test_score_der_mapping_matches_exhaustive_oracle() -> None:
    rng = np.random.default_rng(2)
    for trial in range(40):
        ref = _random_records(rng, n_spk=int(rng.integers(1, 5)), n_seg=int(rng.integers(1, 10)))
        hyp = _random_records(rng, n_spk=int(rng.integers(1, 5)), n_seg=int(rng.integers(0, 10)))
        collar = float(rng.choice([0.0, 0.25]))
        overlap = bool(rng.integers(2))
        rep = score_der(ref, hyp, collar=collar, score_overlap=overlap)
        scored, missed, fa, se = oracle_der_components(ref, hyp, collar, overlap)
        if scored == 0:
            assert rep.scored_time == 0.0
            continue
        assert rep.scored_time == float(scored)
        assert rep.missed == float(missed / scored)
        assert rep.false_alarm == float(fa / scored)
        assert rep.speaker_error == float(se / scored)


def test_score_der_label_bijection_invariance() -> None:
    rng = np.random.default_rng(3)
    ref = _random_records(rng, n_spk=3, n_seg=10)
    hyp = _random_records(rng, n_spk=4, n_seg=10)
    base = score_der(ref, hyp, collar=0.25)
    names = sorted({r.speaker for r in hyp})
    for seed in range(10):
        perm = np.random.default_rng(seed).permutation(len(names))
        rename = {names[i]: f"q{perm[i]}" for i in range(len(names))}
        renamed = [_rec(rename[r.speaker], r.onset, r.duration) for r in hyp]
        rep = score_der(ref, renamed, collar=0.25)
        assert (rep.der, rep.missed, rep.false_alarm, rep.speaker_error) == (
            base.der,
            base.missed,
            base.false_alarm,
            base.speaker_error,
        )


# ---------------------------------------------------------------------------
# Corpus evaluation
# ---------------------------------------------------------------------------


def _write(path, records) -> None:
    with open(path, "w") as fh:
        write_rttm(records, fh)


def test_evaluate_corpus_single_recording_equals_score_der(tmp_path) -> None:
    ref = [_rec("A", 0.0, 10.0)]
    hyp = [_rec("X", 0.0, 5.0), _rec("Y", 5.0, 5.0)]
    _write(tmp_path / "ref.rttm", ref)
    _write(tmp_path / "hyp.rttm", hyp)
    corpus = evaluate_corpus([(tmp_path / "ref.rttm", tmp_path / "hyp.rttm")], collar=0.0)
    single = score_der(ref, hyp, collar=0.0)
    assert corpus.der == single.der
    assert corpus.scored_time == single.scored_time


def test_evaluate_corpus_two_identical_recordings_same_rates(tmp_path) -> None:
    ref = [_rec("A", 0.0, 10.0, "r1"), _rec("A", 0.0, 10.0, "r2")]
    hyp = [_rec("X", 0.0, 5.0, "r1"), _rec("X", 0.0, 5.0, "r2")]
    _write(tmp_path / "ref.rttm", ref)
    _write(tmp_path / "hyp.rttm", hyp)
    corpus = evaluate_corpus([(tmp_path / "ref.rttm", tmp_path / "hyp.rttm")], collar=0.0)
    single = score_der(ref[:1], hyp[:1], collar=0.0)
    assert corpus.der == single.der
    assert corpus.scored_time == 2 * single.scored_time


def test_evaluate_corpus_time_weighted_average(tmp_path) -> None:
    # Recording r1 scores DER 0, r2 scores 0.2, equal scored time -> 0.1.
    _write(tmp_path / "ref1.rttm", [_rec("A", 0.0, 10.0, "r1")])
    _write(tmp_path / "hyp1.rttm", [_rec("X", 0.0, 10.0, "r1")])
    _write(tmp_path / "ref2.rttm", [_rec("A", 0.0, 10.0, "r2")])
    _write(
        tmp_path / "hyp2.rttm",
        [_rec("X", 0.0, 8.0, "r2"), _rec("Y", 8.0, 2.0, "r2")],
    )
    corpus = evaluate_corpus(
        [
            (tmp_path / "ref1.rttm", tmp_path / "hyp1.rttm"),
            (tmp_path / "ref2.rttm", tmp_path / "hyp2.rttm"),
        ],
        collar=0.0,
    )
    assert corpus.der == pytest.approx(0.1, abs=1e-12)


def test_evaluate_corpus_propagates_with_context(tmp_path) -> None:
    _write(tmp_path / "ref.rttm", [_rec("A", 0.0, 10.0, "r1")])
    _write(tmp_path / "hyp.rttm", [_rec("X", 0.0, 10.0, "other")])
    with pytest.raises(EmptyReferenceError, match="other"):
        evaluate_corpus([(tmp_path / "ref.rttm", tmp_path / "hyp.rttm")])
    with pytest.raises(OSError, match="missing.rttm"):
        evaluate_corpus([(tmp_path / "missing.rttm", tmp_path / "hyp.rttm")])


def test_score_recordings_reports_per_recording(tmp_path) -> None:
    ref = [_rec("A", 0.0, 10.0, "r1"), _rec("A", 0.0, 10.0, "r2")]
    hyp = [_rec("X", 0.0, 10.0, "r1"), _rec("X", 0.0, 5.0, "r2"), _rec("Y", 5.0, 5.0, "r2")]
    aggregate, per_rec = score_recordings(ref, hyp, collar=0.0)
    assert per_rec["r1"].der == 0.0
    assert per_rec["r2"].der == pytest.approx(0.5)
    assert aggregate.der == pytest.approx(0.25)


# ---------------------------------------------------------------------------
# DiarizationResult invariants
# ---------------------------------------------------------------------------


def test_diarization_result_rejects_label_gaps() -> None:
    with pytest.raises(ValueError):
        DiarizationResult(
            recording_id="rec",
            starts=np.array([0.0, 1.0]),
            ends=np.array([1.0, 2.0]),
            labels=np.array([0, 2]),
        )
    with pytest.raises(ValueError):
        DiarizationResult(
            recording_id="rec",
            starts=np.array([0.0]),
            ends=np.array([0.0]),
            labels=np.array([0]),
        )
