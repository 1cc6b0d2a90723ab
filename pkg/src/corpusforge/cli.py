"""Command-line surface for the corpus toolkit.

Subcommands cover each pipeline stage plus an end-to-end "pipeline" run in
the canonical order. Machine-readable reports go to files; logs go to
stderr and never interleave with them. Report commands also render a PNG
figure next to the delimited output unless --no-figures is given.

Exit codes: 0 success, 1 validation failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import cer_engine as cermod

from . import __version__
from . import audio as adsp
from . import cleaning
from . import evaluation
from . import manifest as mf
from . import pipeline as pl
from . import plots
from . import prompts
from . import sampler
from . import tokenizer
from .errors import (
    ConfigInvalidError,
    CorpusforgeError,
    EmptyAudioError,
    IoFailureError,
    UnknownLanguageError,
    UnknownSubcommandError,
)

log = logging.getLogger("corpusforge")

LOG_ENV_VAR = "CORPUSFORGE_LOG"
_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
           "info": logging.INFO, "debug": logging.DEBUG}

SUBCOMMANDS = ("scan", "clean", "trim", "normalize", "cer", "select", "tokenize",
               "filter", "prompt", "split", "stats", "eval", "sample", "pipeline")


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of calling sys.exit, so usage problems
    map to exit code 1 like every other validation failure."""

    def error(self, message):
        if "invalid choice" in message and "command" in message:
            raise UnknownSubcommandError(message)
        raise ConfigInvalidError("args", message)


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corpusforge",
                     description="Corpus preparation, filtering, and evaluation "
                                 "toolkit for multilingual TTS datasets.")
    parser.add_argument("--version", action="version", version=f"corpusforge {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="JSON config file; flags override its values")
    common.add_argument("--log-level", choices=list(_LEVELS), default=None,
                        help=f"log verbosity (env {LOG_ENV_VAR} overrides)")
    common.add_argument("--workers", type=_positive_int, default=None,
                        help="thread pool size; never affects output bytes")
    common.add_argument("--seed", type=int, default=None, help="global seed")
    common.add_argument("--dry-run", action="store_true",
                        help="compute and print reports, write nothing")
    common.add_argument("--no-figures", action="store_true",
                        help="skip PNG figure rendering")

    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("scan", parents=[common],
                       help="build a manifest from <lang>/<speaker>/<id>.wav + .txt")
    p.add_argument("--corpus-root", type=Path, default=None)
    p.add_argument("--out", type=Path, required=True, help="output manifest path")

    p = sub.add_parser("clean", parents=[common],
                       help="newlines, separators, duplicates, empty audio")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--out", type=Path, required=True, help="output manifest path")
    p.add_argument("--report", type=Path, default=None,
                   help="report prefix (writes .json, .txt, .png)")
    p.add_argument("--probe", choices=("duration", "decode", "none"), default="duration",
                   help="how to detect empty audio (default: duration field)")
    p.add_argument("--audio-root", type=Path, default=Path("."),
                   help="base for audio_path when probe=decode")

    p = sub.add_parser("trim", parents=[common], help="trim silence and pad ends")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--audio-root", type=Path, default=Path("."))
    p.add_argument("--out", type=Path, required=True,
                   help="output dir (audio/trim/, trim.jsonl, reports/)")
    p.add_argument("--threshold-db", type=float, default=None)
    p.add_argument("--pad-s", type=float, default=None)
    p.add_argument("--frame-len", type=_positive_int, default=None)
    p.add_argument("--hop-len", type=_positive_int, default=None)

    p = sub.add_parser("normalize", parents=[common], help="peak volume normalization")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--audio-root", type=Path, default=Path("."))
    p.add_argument("--out", type=Path, required=True,
                   help="output dir (audio/normalize/, normalize.jsonl, reports/)")
    p.add_argument("--target-peak", type=float, default=None)

    p = sub.add_parser("cer", parents=[common],
                       help="CER records from hypotheses (file or ASR service)")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--hypotheses", type=Path, default=None,
                   help="sidecar .tsv or .jsonl hypotheses")
    p.add_argument("--endpoint", default=None, help="ASR service URL")
    p.add_argument("--audio-root", type=Path, default=Path("."),
                   help="base for audio_path when using --endpoint")
    p.add_argument("--norm", choices=list(cermod.NORM_MODES), default=None)
    p.add_argument("--out", type=Path, default=Path("cer"),
                   help="output prefix (writes .jsonl, .png)")

    p = sub.add_parser("select", parents=[common],
                       help="keep the top-N lowest-CER utterances per speaker")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--cer", type=Path, required=True, help="CER records .jsonl")
    p.add_argument("--top-n", type=_positive_int, default=None)
    p.add_argument("--out", type=Path, required=True, help="output manifest path")

    p = sub.add_parser("tokenize", parents=[common],
                       help="shared-alphabet tokenization of transcripts")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--tables", type=Path, required=True,
                   help="directory of phoneme table .tsv files")
    p.add_argument("--policy", choices=list(tokenizer.UNKNOWN_POLICIES), default="error")
    p.add_argument("--format", choices=("jsonl", "text"), default="jsonl")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("filter", parents=[common], help="drop clips shorter than a minimum")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--min-duration", type=float, default=None)
    p.add_argument("--out", type=Path, required=True, help="output manifest path")

    p = sub.add_parser("prompt", parents=[common],
                       help="emit 3 s zero-shot speech prompts per speaker")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--audio-root", type=Path, default=Path("."))
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--speakers", nargs="*", default=None,
                   help="speaker ids (default: every speaker in the manifest)")

    p = sub.add_parser("split", parents=[common], help="deterministic train/val split")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--val-fraction", type=float, default=None)
    p.add_argument("--out-train", type=Path, required=True)
    p.add_argument("--out-val", type=Path, required=True)

    p = sub.add_parser("stats", parents=[common], help="per-speaker file counts and hours")
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None,
                   help="output prefix (writes .txt, .jsonl, .png); default prints")

    p = sub.add_parser("eval", parents=[common],
                       help="CER aggregation and speaker-embedding cosine similarity")
    p.add_argument("--manifest", type=Path, default=None,
                   help="manifest providing the id -> speaker mapping")
    p.add_argument("--cer", type=Path, default=None, help="CER records .jsonl")
    p.add_argument("--synth-embeddings", type=Path, default=None)
    p.add_argument("--truth-embeddings", type=Path, default=None)
    p.add_argument("--aggregate", choices=list(evaluation.AGGREGATES), default="mean")
    p.add_argument("--provenance", default="",
                   help="note about how embeddings were produced")
    p.add_argument("--out", type=Path, default=Path("eval"),
                   help="output prefix (writes .json, .txt, .png)")

    p = sub.add_parser("sample", parents=[common],
                       help="Euler flow sampling on an analytic demo field")
    p.add_argument("--field", choices=sorted(sampler.DEMO_FIELDS), default="decay")
    p.add_argument("--x0", type=float, nargs="+", default=[1.0])
    p.add_argument("--steps", type=_positive_int, default=None)
    p.add_argument("--guidance-scale", type=float, default=None)
    p.add_argument("--t-start", type=float, default=0.0)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--out", type=Path, default=Path("trajectory"),
                   help="output prefix (writes .jsonl, .png)")

    p = sub.add_parser("pipeline", parents=[common],
                       help="run the full canonical pipeline")
    p.add_argument("--corpus-root", type=Path, default=None)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--hypotheses", type=Path, default=None,
                   help="enables the cer/select stage")

    return parser


def _configure_logging(cfg_level: str, flag_level: str | None) -> None:
    level_name = os.environ.get(LOG_ENV_VAR) or flag_level or cfg_level
    level = _LEVELS.get(level_name.lower())
    if level is None:
        raise ConfigInvalidError("log_level", f"must be one of {tuple(_LEVELS)}")
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def _load_config(args) -> pl.PipelineConfig:
    overrides = {
        "workers": getattr(args, "workers", None),
        "seed": getattr(args, "seed", None),
        "log_level": getattr(args, "log_level", None),
        "corpus_root": getattr(args, "corpus_root", None),
        "manifest": getattr(args, "manifest", None),
        "cer_top_n": getattr(args, "top_n", None),
        "min_duration_s": getattr(args, "min_duration", None),
        "asr_endpoint": getattr(args, "endpoint", None),
        "cer_norm": getattr(args, "norm", None),
        "target_peak": getattr(args, "target_peak", None),
        "trim": {
            "threshold_db": getattr(args, "threshold_db", None),
            "pad_s": getattr(args, "pad_s", None),
            "frame_len": getattr(args, "frame_len", None),
            "hop_len": getattr(args, "hop_len", None),
        },
        "split": {
            "val_fraction": getattr(args, "val_fraction", None),
            "seed": getattr(args, "seed", None),
        },
        "prompt": {
            "seed": getattr(args, "seed", None),
        },
    }
    overrides["corpus_root"] = (
        str(overrides["corpus_root"]) if overrides["corpus_root"] is not None else None)
    overrides["manifest"] = (
        str(overrides["manifest"]) if overrides["manifest"] is not None else None)
    return pl.load_config(getattr(args, "config", None), overrides)


def _manifest_path(args, cfg: pl.PipelineConfig) -> Path:
    """Flag wins; otherwise the config file's manifest (already resolved
    against corpus_root by load_config)."""
    if getattr(args, "manifest", None) is not None:
        return args.manifest
    if cfg.manifest is not None:
        return cfg.manifest
    raise ConfigInvalidError("manifest", "set --manifest or the config manifest field")


def _write_text(path: Path, text: str, dry_run: bool) -> None:
    if dry_run:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot write {path}: {exc}") from exc


# --- subcommand implementations ---

def cmd_scan(args, cfg: pl.PipelineConfig) -> int:
    m, report = pl.scan_corpus(cfg.corpus_root)
    print(report.to_json(), end="")
    if not args.dry_run:
        mf.save_manifest(m, args.out)
        log.info("scan: wrote %d utterances to %s", len(m), args.out)
    return 0


def _empty_probe(kind: str, audio_root: Path):
    if kind == "duration":
        return lambda u: u.duration_s <= 0.0
    if kind == "decode":
        def probe(u):
            try:
                adsp.decode_wav(audio_root / u.audio_path)
            except EmptyAudioError:
                return True
            return False
        return probe
    return None


def cmd_clean(args, cfg: pl.PipelineConfig) -> int:
    m = mf.load_manifest(_manifest_path(args, cfg))
    probe = _empty_probe(args.probe, args.audio_root)
    cleaned, report = cleaning.clean_all(m, cfg.separator, probe)
    print(report.render_table(), end="")
    if not args.dry_run:
        mf.save_manifest(cleaned, args.out)
        if args.report is not None:
            _write_text(args.report.with_suffix(".json"), report.to_json(), False)
            _write_text(args.report.with_suffix(".txt"), report.render_table(), False)
            if not args.no_figures:
                plots.cleaning_report_figure(report, args.report.with_suffix(".png"))
    return 0


def cmd_trim(args, cfg: pl.PipelineConfig) -> int:
    m = mf.load_manifest(_manifest_path(args, cfg))
    trimmed, report = pl.trim_stage(m, cfg.trim, args.audio_root, args.out,
                                    cfg.workers, dry_run=args.dry_run)
    print(report.to_json(), end="")
    if not args.dry_run:
        mf.save_manifest(trimmed, args.out / "trim.jsonl")
        _write_text(args.out / "reports" / "trim.json", report.to_json(), False)
    return 0


def cmd_normalize(args, cfg: pl.PipelineConfig) -> int:
    m = mf.load_manifest(_manifest_path(args, cfg))
    normalized, report = pl.normalize_stage(m, cfg.target_peak, args.audio_root,
                                            args.out, cfg.workers, dry_run=args.dry_run)
    print(report.to_json(), end="")
    if not args.dry_run:
        mf.save_manifest(normalized, args.out / "normalize.jsonl")
        _write_text(args.out / "reports" / "normalize.json", report.to_json(), False)
    return 0


def _compute_cer_records(m: mf.Manifest, hyp_records, norm: str) -> list[cermod.CerRecord]:
    by_id = {u.id: u for u in m.utterances}
    records = []
    for hyp in hyp_records:
        u = by_id.get(hyp.id)
        if u is None:
            log.warning("hypothesis id %r not in manifest, ignored", hyp.id)
            continue
        records.append(cermod.cer(u.transcript, hyp.hypothesis, norm, utt_id=u.id))
    records.sort(key=lambda r: r.id)
    return records


def cmd_cer(args, cfg: pl.PipelineConfig) -> int:
    if (args.hypotheses is None) == (cfg.asr_endpoint is None):
        raise ConfigInvalidError("hypotheses", "need exactly one of --hypotheses / --endpoint")
    m = mf.load_manifest(_manifest_path(args, cfg))
    if args.hypotheses is not None:
        hyp_records = cermod.ingest_hypotheses(args.hypotheses)
        failures = ()
    else:
        fetched = cermod.fetch_hypotheses(cfg.asr_endpoint, m, args.audio_root,
                                          concurrency=cfg.workers)
        hyp_records = fetched.records
        failures = fetched.failures
    records = _compute_cer_records(m, hyp_records, cfg.cer_norm)
    print(f"computed CER for {len(records)} utterances "
          f"({len(failures)} fetch failures)")
    if not args.dry_run:
        _write_text(args.out.with_suffix(".jsonl"),
                    cermod.cer_records_to_jsonl(records), False)
        if failures:
            _write_text(args.out.with_suffix(".failures.json"),
                        json.dumps([list(f) for f in failures], indent=2) + "\n", False)
        if not args.no_figures:
            plots.cer_histogram_figure(records, args.out.with_suffix(".png"))
    return 0


def cmd_select(args, cfg: pl.PipelineConfig) -> int:
    m = mf.load_manifest(_manifest_path(args, cfg))
    records = cermod.load_cer_jsonl(args.cer)
    selected = cermod.select_top_n(m, records, cfg.cer_top_n)
    print(f"kept {len(selected)} of {len(m)} utterances (top {cfg.cer_top_n} per speaker)")
    if not args.dry_run:
        mf.save_manifest(selected, args.out)
    return 0


def cmd_tokenize(args, cfg: pl.PipelineConfig) -> int:
    m = mf.load_manifest(_manifest_path(args, cfg))
    table_paths = sorted(args.tables.glob("*.tsv"))
    if not table_paths:
        raise ConfigInvalidError("tables", f"no .tsv tables found in {args.tables}")
    tables = tokenizer.load_tables(table_paths)
    pairs = []
    for u in m:
        if u.language not in tables:
            raise UnknownLanguageError(
                f"utterance {u.id!r}: no table for language {u.language!r}")
        seq = tokenizer.tokenize_code_switched(u.transcript, tables, u.language,
                                               args.policy)
        pairs.append((u.id, seq))
    out_text = (tokenizer.sequences_to_jsonl(pairs) if args.format == "jsonl"
                else tokenizer.sequences_to_text(pairs))
    print(f"tokenized {len(pairs)} transcripts with {len(tables)} tables")
    _write_text(args.out, out_text, args.dry_run)
    return 0


def cmd_filter(args, cfg: pl.PipelineConfig) -> int:
    m = mf.load_manifest(_manifest_path(args, cfg))
    kept = prompts.filter_min_duration(m, cfg.min_duration_s)
    if len(kept) == 0:
        log.warning("duration filter at %.3f s removed every utterance", cfg.min_duration_s)
    print(f"kept {len(kept)} of {len(m)} utterances at >= {cfg.min_duration_s} s")
    if not args.dry_run:
        mf.save_manifest(kept, args.out)
    return 0


def cmd_prompt(args, cfg: pl.PipelineConfig) -> int:
    m = mf.load_manifest(_manifest_path(args, cfg))
    speakers = args.speakers or sorted(m.by_speaker())
    emitted = 0
    for speaker_id in speakers:
        source = prompts.select_prompt_source(m, speaker_id, cfg.prompt)
        buf = adsp.decode_wav(args.audio_root / source.audio_path)
        cropped = prompts.crop_prompt(buf, cfg.prompt)
        safe = speaker_id.replace("/", "_")
        print(f"{speaker_id}: source {source.id} ({source.duration_s:.2f} s) "
              f"-> {len(cropped)} samples")
        if not args.dry_run:
            adsp.encode_wav(cropped, args.out / f"{safe}.wav")
            _write_text(args.out / f"{safe}.json",
                        prompts.prompt_sidecar(speaker_id, source.id, cfg.prompt), False)
        emitted += 1
    log.info("prompt: emitted %d prompts", emitted)
    return 0


def cmd_split(args, cfg: pl.PipelineConfig) -> int:
    m = mf.load_manifest(_manifest_path(args, cfg))
    train, val = mf.split_train_val(m, cfg.split)
    print(f"train {len(train)} / val {len(val)} "
          f"(val_fraction={cfg.split.val_fraction}, seed={cfg.split.seed})")
    if not args.dry_run:
        mf.save_manifest(train, args.out_train)
        mf.save_manifest(val, args.out_val)
    return 0


def cmd_stats(args, cfg: pl.PipelineConfig) -> int:
    m = mf.load_manifest(_manifest_path(args, cfg))
    stats = mf.compute_stats(m)
    table = mf.render_stats_table(stats)
    print(table, end="")
    if args.out is not None and not args.dry_run:
        _write_text(args.out.with_suffix(".txt"), table, False)
        _write_text(args.out.with_suffix(".jsonl"), mf.stats_to_jsonl(stats), False)
        if not args.no_figures:
            plots.speaker_stats_figure(stats, args.out.with_suffix(".png"))
    return 0


def cmd_eval(args, cfg: pl.PipelineConfig) -> int:
    if args.cer is None and args.synth_embeddings is None:
        raise ConfigInvalidError("eval", "need --cer and/or --synth-embeddings")
    if (args.synth_embeddings is None) != (args.truth_embeddings is None):
        raise ConfigInvalidError(
            "eval", "--synth-embeddings and --truth-embeddings go together")
    m = mf.load_manifest(_manifest_path(args, cfg))
    speaker_of = m.speaker_of()

    cer_part = evaluation.EvalReport()
    if args.cer is not None:
        cer_part = evaluation.cer_report(cermod.load_cer_jsonl(args.cer), speaker_of)
    cos_part = evaluation.EvalReport()
    if args.synth_embeddings is not None:
        synth = evaluation.load_embeddings_jsonl(args.synth_embeddings)
        truth = evaluation.load_embeddings_jsonl(args.truth_embeddings)
        cos_part = evaluation.speaker_similarity_report(
            synth, truth, speaker_of, aggregate=args.aggregate)
    report = evaluation.merge_reports(cer_part, cos_part, provenance=args.provenance)
    print(report.render_table(), end="")
    if not args.dry_run:
        _write_text(args.out.with_suffix(".json"), report.to_json(), False)
        _write_text(args.out.with_suffix(".txt"), report.render_table(), False)
        if not args.no_figures:
            plots.eval_report_figure(report, args.out.with_suffix(".png"))
    return 0


def cmd_sample(args, cfg: pl.PipelineConfig) -> int:
    scfg = sampler.SamplerConfig(
        steps=args.steps if args.steps is not None else 10,
        guidance_scale=args.guidance_scale if args.guidance_scale is not None else 1.0,
        t_start=args.t_start, t_end=args.t_end)
    field = sampler.DEMO_FIELDS[args.field]
    points = sampler.euler_trajectory(field, args.x0, scfg)
    final = points[-1].state
    print(f"field={args.field} steps={scfg.steps} guidance={scfg.guidance_scale} "
          f"final_state={final.tolist()}")
    if not args.dry_run:
        _write_text(args.out.with_suffix(".jsonl"),
                    sampler.trajectory_to_jsonl(points), False)
        if not args.no_figures:
            plots.trajectory_figure(points, args.out.with_suffix(".png"))
    return 0


def _combined_stats_rows(final, train, val) -> list[dict]:
    """VANI-style rows: per speaker, (files, hours) for corpus, train, val."""
    def index(stats):
        return {s.speaker_id: s for s in stats}

    fin, tr, va = index(final), index(train), index(val)
    rows = []
    for speaker_id in [s.speaker_id for s in final]:
        f = fin[speaker_id]
        t = tr.get(speaker_id)
        v = va.get(speaker_id)
        rows.append({
            "speaker_id": speaker_id,
            "files": f.file_count, "hours": round(f.hours, 2),
            "train_files": t.file_count if t else 0,
            "train_hours": round(t.hours, 2) if t else 0.0,
            "val_files": v.file_count if v else 0,
            "val_hours": round(v.hours, 2) if v else 0.0,
        })
    return rows


def _render_combined_stats(rows: list[dict]) -> str:
    header = ("speaker", "files", "hours", "train_files", "train_hours",
              "val_files", "val_hours")
    keys = ("speaker_id", "files", "hours", "train_files", "train_hours",
            "val_files", "val_hours")
    table = [header] + [tuple(str(r[k]) for k in keys) for r in rows]
    widths = [max(len(row[c]) for row in table) for c in range(len(header))]
    lines = ["  ".join(
        f"{row[0]:<{widths[0]}}" if c == 0 else f"{row[c]:>{widths[c]}}"
        for c in range(len(header))) for row in table]
    return "\n".join(lines) + "\n"


def cmd_pipeline(args, cfg: pl.PipelineConfig) -> int:
    out = args.out
    dry = args.dry_run
    manifests_dir = out / "manifests"
    reports_dir = out / "reports"

    m, scan_report = pl.scan_corpus(cfg.corpus_root)
    log.info("pipeline: scanned %d utterances", len(m))
    if not dry:
        mf.save_manifest(m, manifests_dir / "00_scan.jsonl")
        _write_text(reports_dir / "scan.json", scan_report.to_json(), False)

    m, clean_report = cleaning.clean_all(
        m, cfg.separator, probe=lambda u: u.duration_s <= 0.0)
    log.info("pipeline: clean kept %d utterances", len(m))
    print(clean_report.render_table(), end="")
    if not dry:
        mf.save_manifest(m, manifests_dir / "01_clean.jsonl")
        _write_text(reports_dir / "clean.json", clean_report.to_json(), False)
        _write_text(reports_dir / "clean.txt", clean_report.render_table(), False)
        if not args.no_figures:
            plots.cleaning_report_figure(clean_report, reports_dir / "clean.png")

    trimmed_buffers: dict | None = {} if dry else None
    m, trim_report = pl.trim_stage(m, cfg.trim, cfg.corpus_root, out, cfg.workers,
                                   dry, capture=trimmed_buffers)
    log.info("pipeline: trim kept %d utterances", len(m))
    if not dry:
        mf.save_manifest(m, manifests_dir / "02_trim.jsonl")
        _write_text(reports_dir / "trim.json", trim_report.to_json(), False)

    m, norm_report = pl.normalize_stage(m, cfg.target_peak, out, out, cfg.workers,
                                        dry, sources=trimmed_buffers)
    log.info("pipeline: normalize kept %d utterances", len(m))
    if not dry:
        mf.save_manifest(m, manifests_dir / "03_normalize.jsonl")
        _write_text(reports_dir / "normalize.json", norm_report.to_json(), False)

    if args.hypotheses is not None:
        hyp_records = cermod.ingest_hypotheses(args.hypotheses)
        records = _compute_cer_records(m, hyp_records, cfg.cer_norm)
        m = cermod.select_top_n(m, records, cfg.cer_top_n)
        log.info("pipeline: CER select kept %d utterances", len(m))
        if not dry:
            _write_text(reports_dir / "cer.jsonl",
                        cermod.cer_records_to_jsonl(records), False)
            if not args.no_figures:
                plots.cer_histogram_figure(records, reports_dir / "cer.png")
            mf.save_manifest(m, manifests_dir / "04_select.jsonl")

    m = prompts.filter_min_duration(m, cfg.min_duration_s)
    log.info("pipeline: duration filter kept %d utterances", len(m))
    if len(m) == 0:
        log.warning("pipeline: nothing left after the duration filter")
    if not dry:
        mf.save_manifest(m, manifests_dir / "05_filter.jsonl")

    train, val = mf.split_train_val(m, cfg.split)
    log.info("pipeline: split %d train / %d val", len(train), len(val))
    if not dry:
        mf.save_manifest(train, manifests_dir / "06_train.jsonl")
        mf.save_manifest(val, manifests_dir / "06_val.jsonl")

    stats = mf.compute_stats(m)
    rows = _combined_stats_rows(stats, mf.compute_stats(train), mf.compute_stats(val))
    combined = _render_combined_stats(rows)
    print(combined, end="")
    if not dry:
        _write_text(reports_dir / "stats.txt", combined, False)
        _write_text(reports_dir / "stats.jsonl",
                    "\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n",
                    False)
        if not args.no_figures:
            plots.speaker_stats_figure(stats, reports_dir / "stats.png")
    return 0


_COMMANDS = {
    "scan": cmd_scan,
    "clean": cmd_clean,
    "trim": cmd_trim,
    "normalize": cmd_normalize,
    "cer": cmd_cer,
    "select": cmd_select,
    "tokenize": cmd_tokenize,
    "filter": cmd_filter,
    "prompt": cmd_prompt,
    "split": cmd_split,
    "stats": cmd_stats,
    "eval": cmd_eval,
    "sample": cmd_sample,
    "pipeline": cmd_pipeline,
}


def run_subcommand(name: str, args, cfg: pl.PipelineConfig) -> int:
    handler = _COMMANDS.get(name)
    if handler is None:
        raise UnknownSubcommandError(f"unknown subcommand {name!r}")
    return handler(args, cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        cfg = _load_config(args)
        _configure_logging(cfg.log_level, args.log_level)
        return run_subcommand(args.command, args, cfg)
    except IoFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CorpusforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
