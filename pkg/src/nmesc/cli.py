"""Command-line interface: cluster, score and synth subcommands.

Every file-producing run drops a JSON manifest next to its primary output
recording the resolved configuration and input digests, so identical
manifests imply bit-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .diarization import (
    DiarizationResult,
    load_embeddings,
    load_rttm,
    score_recordings,
    write_embeddings,
    write_rttm,
)
from .nme import NjwConfig, NmeConfig, NmeScan, nme_sc, njw_sc
from .testbench import SynthSpec, generate

__all__ = ["RunManifest", "scan_to_csv", "main", "entrypoint"]


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record serialized alongside every output file."""

    command: str
    config: dict
    inputs: dict = field(default_factory=dict)
    tool: str = "nmesc"
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return f"sha256:{digest}"


def _write_manifest(primary_out: str | Path, manifest: RunManifest) -> Path:
    path = Path(str(primary_out) + ".manifest.json")
    path.write_text(manifest.to_json(), encoding="utf-8")
    return path


def scan_to_csv(scan: NmeScan) -> str:
    """Render a scan as CSV with p_hat/k_hat footer comments."""
    lines = ["p,g_p,r_p,k_at_p"]
    for e in scan.entries:
        lines.append(f"{e.p},{e.gp!r},{e.rp!r},{e.k_at_p}")
    lines.append(f"# p_hat={scan.p_hat}")
    lines.append(f"# k_hat={scan.k_hat}")
    return "\n".join(lines) + "\n"


def _workers_from_env() -> int:
    raw = os.environ.get("NME_SC_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:  # 0 (or unset) = auto
        n = os.cpu_count() or 1
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmesc",
        description="Auto-tuning spectral clustering for speaker diarization.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    cluster = sub.add_parser("cluster", help="cluster an embedding file into an RTTM")
    cluster.add_argument("--embeddings", required=True, help="input JSON-Lines embedding file")
    cluster.add_argument("--out", required=True, help="output RTTM path")
    cluster.add_argument("--method", choices=["nme-sc", "njw-sc"], default="nme-sc")
    cluster.add_argument("--fixed-k", type=int, default=None, help="known speaker count override")
    cluster.add_argument("--max-speakers", type=int, default=8)
    cluster.add_argument("--p-max", type=int, default=None, help="scan upper bound (default N//4)")
    cluster.add_argument("--sigma", type=float, default=None, help="kernel scale (njw-sc only)")
    cluster.add_argument("--seed", type=int, default=42)
    cluster.add_argument("--scan-out", default=None, help="write the p-scan as CSV (nme-sc only)")

    score = sub.add_parser("score", help="score a hypothesis RTTM against a reference")
    score.add_argument("--ref", required=True, help="reference RTTM path")
    score.add_argument("--hyp", required=True, help="hypothesis RTTM path")
    score.add_argument("--collar", type=float, default=0.25, help="total no-score width (s)")
    score.add_argument("--overlap", action="store_true", help="score overlapped speech")

    synth = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    synth.add_argument("--clusters", type=int, required=True)
    synth.add_argument("--per-cluster", type=int, required=True)
    synth.add_argument("--dim", type=int, required=True)
    synth.add_argument("--noise", type=float, default=0.1)
    synth.add_argument("--seed", type=int, default=42)
    synth.add_argument("--out", required=True, help="output embedding JSONL path")
    synth.add_argument("--truth-out", required=True, help="ground-truth RTTM path")
    return parser


def _cmd_cluster(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.method == "njw-sc" and args.sigma is None:
        parser.error("--method njw-sc requires --sigma")
    if args.method == "njw-sc" and args.scan_out is not None:
        parser.error("--scan-out is only produced by --method nme-sc")
    if args.fixed_k is not None and not 1 <= args.fixed_k <= args.max_speakers:
        parser.error(f"--fixed-k must be in [1, {args.max_speakers}]")

    emb = load_embeddings(args.embeddings)
    scan = None
    if args.method == "nme-sc":
        cfg = NmeConfig(
            p_max=args.p_max,
            max_speakers=args.max_speakers,
            fixed_k=args.fixed_k,
            seed=args.seed,
        )
        result, scan = nme_sc(emb, cfg, workers=_workers_from_env())
        config = {
            "method": "nme-sc",
            "epsilon": cfg.epsilon,
            "p_max": scan.p_max,
            "max_speakers": cfg.max_speakers,
            "fixed_k": cfg.fixed_k,
            "seed": cfg.seed,
            "sigma": None,
        }
    else:
        cfg = NjwConfig(
            sigma=args.sigma, k=args.fixed_k, max_speakers=args.max_speakers, seed=args.seed
        )
        result = njw_sc(emb, cfg)
        config = {
            "method": "njw-sc",
            "epsilon": None,
            "p_max": None,
            "max_speakers": cfg.max_speakers,
            "fixed_k": cfg.k,
            "seed": cfg.seed,
            "sigma": cfg.sigma,
        }

    write_rttm(result, args.out)
    if args.scan_out is not None:
        Path(args.scan_out).write_text(scan_to_csv(scan), encoding="utf-8")
    manifest = RunManifest(
        command="cluster", config=config, inputs={args.embeddings: _sha256(args.embeddings)}
    )
    _write_manifest(args.out, manifest)
    print(f"wrote {args.out} ({result.num_speakers} speakers, {result.n} segments)")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    ref = load_rttm(args.ref)
    hyp = load_rttm(args.hyp)
    aggregate, per_recording = score_recordings(ref, hyp, collar=args.collar, score_overlap=args.overlap)
    header = f"{'recording':<16}{'DER':>8}{'MS':>8}{'FA':>8}{'SE':>8}{'scored(s)':>12}"
    print(header)
    for rec_id, rep in per_recording.items():
        print(
            f"{rec_id:<16}{rep.der:>8.4f}{rep.missed:>8.4f}{rep.false_alarm:>8.4f}"
            f"{rep.speaker_error:>8.4f}{rep.scored_time:>12.3f}"
        )
    if len(per_recording) > 1:
        print(
            f"{'OVERALL':<16}{aggregate.der:>8.4f}{aggregate.missed:>8.4f}"
            f"{aggregate.false_alarm:>8.4f}{aggregate.speaker_error:>8.4f}"
            f"{aggregate.scored_time:>12.3f}"
        )
    print(
        f"DER={aggregate.der:.4f} MS={aggregate.missed:.4f} "
        f"FA={aggregate.false_alarm:.4f} SE={aggregate.speaker_error:.4f}"
    )
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(
        n_clusters=args.clusters,
        segments_per_cluster=args.per_cluster,
        dim=args.dim,
        noise=args.noise,
        seed=args.seed,
    )
    emb, truth = generate(spec)
    write_embeddings(emb, args.out, header=False)
    truth_result = DiarizationResult(
        recording_id=emb.recording_id, starts=emb.starts, ends=emb.ends, labels=truth
    )
    write_rttm(truth_result, args.truth_out)
    manifest = RunManifest(
        command="synth",
        config={
            "clusters": spec.n_clusters,
            "per_cluster": spec.segments_per_cluster,
            "dim": spec.dim,
            "noise": spec.noise,
            "within_concentration": spec.within_concentration,
            "seed": spec.seed,
        },
    )
    _write_manifest(args.out, manifest)
    print(f"wrote {args.out} ({emb.n} segments) and {args.truth_out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "cluster":
            return _cmd_cluster(args, parser)
        if args.subcommand == "score":
            return _cmd_score(args)
        return _cmd_synth(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
