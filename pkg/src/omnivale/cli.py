"""Command-line entry point wiring all stages behind one config file.

Progress and tables go to stderr; data goes to files. Exit code 1 means a
validation problem (bad config, bad arguments, bad input files), 2 means a
runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from . import pipeline
from .config import ConfigError, PipelineConfig, load_config
from .manifest import (
    DatasetManifest,
    InvariantError,
    ManifestFormatError,
    TimeInterval,
    VideoRecord,
    assign_splits,
    dataset_stats,
    read_manifest_file,
    write_manifest_file,
)
from .mediaio import MediaLoadError, scan_corpus

logger = logging.getLogger("omnivale")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class CliValidationError(ValueError):
    pass


def _load_manifest(path: str) -> DatasetManifest:
    try:
        return read_manifest_file(path)
    except FileNotFoundError as exc:
        raise CliValidationError(f"manifest not found: {path}") from exc
    except (ManifestFormatError, InvariantError) as exc:
        raise CliValidationError(f"invalid manifest {path}: {exc}") from exc


def _write_manifest(manifest: DatasetManifest, path: str, cfg: PipelineConfig) -> None:
    write_manifest_file(manifest, path, run_info=cfg.run_info())


def _bootstrap_records(corpus_root: str, cfg: PipelineConfig) -> DatasetManifest:
    records = []
    for video_id in scan_corpus(corpus_root):
        meta = pipeline.assets_for(video_id, corpus_root, cfg).meta()
        records.append(
            VideoRecord(
                video_id=video_id,
                duration_s=meta.duration_s,
                fps=cfg.analysis_fps,
                resolution=(meta.width, meta.height),
            )
        )
    return DatasetManifest(records=tuple(records))


def cmd_filter(args, cfg: PipelineConfig) -> int:
    manifest = _load_manifest(args.input) if args.input else _bootstrap_records(args.corpus, cfg)
    clients = pipeline.make_clients(cfg)
    result = pipeline.map_records(
        manifest,
        lambda rec: pipeline.filter_record(rec, args.corpus, cfg, clients),
        parallelism=cfg.parallelism,
        retained_only=False,
    )
    _write_manifest(result, args.output, cfg)
    reasons = Counter(
        rec.rejection_reason for rec in result.records if rec.filter_status == "rejected"
    )
    retained = sum(1 for rec in result.records if rec.filter_status == "retained")
    print(f"retained {retained}/{len(result.records)} videos", file=sys.stderr)
    for reason, count in sorted(reasons.items()):
        print(f"  rejected[{reason}]: {count}", file=sys.stderr)
    return EXIT_OK


def cmd_segment_visual(args, cfg: PipelineConfig) -> int:
    manifest = _load_manifest(args.input)
    clients = pipeline.make_clients(cfg)
    result = pipeline.map_records(
        manifest,
        lambda rec: pipeline.segment_visual_record(rec, args.corpus, cfg, clients),
        parallelism=cfg.parallelism,
    )
    _write_manifest(result, args.output, cfg)
    n = sum(len(r.visual_events) for r in result.retained)
    print(f"visual events: {n} across {len(result.retained)} videos", file=sys.stderr)
    return EXIT_OK


def cmd_segment_audio(args, cfg: PipelineConfig) -> int:
    manifest = _load_manifest(args.input)
    clients = pipeline.make_clients(cfg)
    score_rows: list[dict] = []

    def sink(video_id, series):
        if args.dump_scores:
            for i, value in enumerate(series.scores):
                score_rows.append(
                    {"video_id": video_id, "t_s": i * series.window_s, "score": float(value)}
                )

    result = pipeline.map_records(
        manifest,
        lambda rec: pipeline.segment_audio_record(rec, args.corpus, cfg, clients, score_sink=sink),
        parallelism=cfg.parallelism,
    )
    _write_manifest(result, args.output, cfg)
    if args.dump_scores:
        with open(args.dump_scores, "w", encoding="utf-8") as fh:
            for row in score_rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    n = sum(len(r.audio_events) for r in result.retained)
    print(f"audio events: {n} across {len(result.retained)} videos", file=sys.stderr)
    return EXIT_OK


def cmd_fuse(args, cfg: PipelineConfig) -> int:
    manifest = _load_manifest(args.input)
    result = pipeline.map_records(manifest, pipeline.fuse_record, parallelism=cfg.parallelism)
    _write_manifest(result, args.output, cfg)
    n = sum(len(r.omni_events) for r in result.retained)
    print(f"omni events: {n} across {len(result.retained)} videos", file=sys.stderr)
    return EXIT_OK


def cmd_caption(args, cfg: PipelineConfig) -> int:
    manifest = _load_manifest(args.input)
    if args.clients:
        from dataclasses import replace

        cfg = replace(cfg, clients=replace(cfg.clients, mode=args.clients))
    clients = pipeline.make_clients(cfg)
    result = pipeline.map_records(
        manifest,
        lambda rec: pipeline.caption_record(rec, args.corpus, cfg, clients),
        parallelism=cfg.parallelism,
    )
    if args.split:
        result = assign_splits(result, cfg.test_fraction, cfg.seed)
    _write_manifest(result, args.output, cfg)
    n = sum(1 for r in result.retained for ev in r.omni_events if ev.omni_caption)
    print(f"captioned omni events: {n}", file=sys.stderr)
    return EXIT_OK


def cmd_gen_dialogues(args, cfg: PipelineConfig) -> int:
    from . import dialoggen

    manifest = _load_manifest(args.input)
    if args.instructions:
        clients = pipeline.make_clients(cfg)
        dialogues = dialoggen.gen_instruction_dialogues(manifest, clients.integrator_llm)
    else:
        dialogues = dialoggen.gen_boundary_dialogues(manifest, cfg.seed, cfg.dialogue)
    with open(args.output, "w", encoding="utf-8") as fh:
        header = {"kind": "omnivale.dialogues", "run": cfg.run_info()}
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        dialoggen.write_dialogues(dialogues, fh)
    print(f"wrote {len(dialogues)} dialogues", file=sys.stderr)
    return EXIT_OK


def cmd_stats(args, cfg: PipelineConfig) -> int:
    manifest = _load_manifest(args.input)
    report = dataset_stats(manifest)
    print(report.format_table(), file=sys.stderr)
    if args.output:
        payload = {"kind": "omnivale.stats", "run": cfg.run_info(), "stats": report.to_dict()}
        Path(args.output).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_mrsd(args, cfg: PipelineConfig) -> int:
    from .metrics.coherence import format_mrsd_table, mrsd_report

    manifest = _load_manifest(args.input)
    clients = pipeline.make_clients(cfg)
    stages = [
        pipeline.stage_boundaries_for(rec, args.corpus, cfg, clients) for rec in manifest.retained
    ]
    rows = mrsd_report(stages, pipeline.per_second_embedder(args.corpus, cfg, clients))
    print(format_mrsd_table(rows), file=sys.stderr)
    if args.output:
        payload = {
            "kind": "omnivale.mrsd",
            "run": cfg.run_info(),
            "rows": [
                {
                    "stage": r.stage,
                    "mean_mrsd_visual": r.mean_mrsd_visual,
                    "mean_mrsd_audio": r.mean_mrsd_audio,
                    "mean_length_s": r.mean_length_s,
                    "n_events": r.n_events,
                }
                for r in rows
            ],
        }
        Path(args.output).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def _read_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CliValidationError(f"{path} line {lineno}: {exc.msg}") from exc
    return rows


def cmd_eval(args, cfg: PipelineConfig) -> int:
    from .metrics import dvc, grounding, parsing, qa, text

    preds = _read_jsonl(args.pred)
    refs = _read_jsonl(args.ref)
    excluded = 0

    if args.task == "tvg":
        ref_map = {r["id"]: TimeInterval(r["start_s"], r["end_s"]) for r in refs}
        pred_map = {}
        for p in preds:
            parsed = parsing.parse_predictions(p["output"], "tvg")
            if parsed.first_interval is None:
                excluded += 1
                ref_map.pop(p["id"], None)
                continue
            pred_map[p["id"]] = parsed.first_interval
        if not ref_map:
            raise CliValidationError("no evaluable items after exclusions")
        report = grounding.eval_tvg(pred_map, ref_map).to_dict()
    elif args.task == "dvc":
        ref_events = {
            r["video_id"]: [
                dvc.CaptionedEvent(TimeInterval(e["start_s"], e["end_s"]), e["caption"])
                for e in r["events"]
            ]
            for r in refs
        }
        pred_events = {}
        for p in preds:
            parsed = parsing.parse_predictions(p["output"], "dvc")
            excluded += len(parsed.exclusions)
            pred_events[p["video_id"]] = [
                dvc.CaptionedEvent(item.interval, item.caption or "")
                for item in parsed.items
                if item.interval is not None
            ]
        report = dvc.eval_dvc(pred_events, ref_events).to_dict()
    elif args.task == "sc":
        items = []
        for p in preds:
            parsed = parsing.parse_predictions(p["output"], "sc")
            ref_row = next((r for r in refs if r["id"] == p["id"]), None)
            if ref_row is None:
                raise CliValidationError(f"prediction {p['id']} has no reference")
            if not parsed.items:
                excluded += 1
                continue
            items.append((parsed.items[0].caption or "", ref_row["references"]))
        if not items:
            raise CliValidationError("no evaluable items after exclusions")
        means, _ = text.score_caption_corpus(items)
        report = means.to_dict()
    elif args.task == "qa":
        clients = pipeline.make_clients(cfg)
        pred_map = {p["id"]: p["answer"] for p in preds}
        ref_map = {r["id"]: (r["question"], r["answer"]) for r in refs}
        report = qa.eval_qa_accuracy(pred_map, ref_map, clients.judge_llm).to_dict()
    else:
        raise CliValidationError(f"unknown task {args.task!r}")

    report["excluded"] = excluded
    for key, value in report.items():
        print(f"{key:>12}: {value}", file=sys.stderr)
    if args.output:
        payload = {"kind": "omnivale.eval", "task": args.task, "run": cfg.run_info(), "metrics": report}
        Path(args.output).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_serve(args, cfg: PipelineConfig) -> int:
    import uvicorn

    from .reviewd import create_app

    manifest = _load_manifest(args.manifest)
    app = create_app(
        manifest,
        audit_log_path=args.audit_log,
        ui_origin=args.ui_origin,
        snapshot_path=args.snapshot,
        snapshot_every=args.snapshot_every,
        media_root=args.media_root,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omnivale",
        description="Omni-modal event annotation pipeline and evaluation harness",
    )
    parser.add_argument("--config", help="pipeline config JSON (or $OMNIVALE_CONFIG)")
    parser.add_argument("--seed", type=int, help="override config seed")
    parser.add_argument("--parallelism", type=int, help="override worker count")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="apply the four retention gates")
    p.add_argument("--corpus", required=True)
    p.add_argument("--input", help="existing manifest (default: bootstrap from corpus)")
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_filter)

    p = sub.add_parser("segment-visual", help="detect visual event boundaries")
    p.add_argument("--corpus", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_segment_visual)

    p = sub.add_parser("segment-audio", help="detect audio event boundaries")
    p.add_argument("--corpus", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--dump-scores", help="write the transition score series as JSONL")
    p.set_defaults(fn=cmd_segment_audio)

    p = sub.add_parser("fuse", help="fuse modal events into omni events")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_fuse)

    p = sub.add_parser("caption", help="caption events through the model clients")
    p.add_argument("--corpus", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--clients", choices=["stub", "live"], help="override clients.mode")
    p.add_argument("--split", action="store_true", help="also assign train/test splits")
    p.set_defaults(fn=cmd_caption)

    p = sub.add_parser("gen-dialogues", help="generate training dialogues")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--instructions", action="store_true", help="LLM instruction data instead of templates")
    p.set_defaults(fn=cmd_gen_dialogues)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("mrsd", help="boundary coherence report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_mrsd)

    p = sub.add_parser("eval", help="evaluate predictions for one task")
    p.add_argument("--task", required=True, choices=["tvg", "dvc", "sc", "qa"])
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--audit-log", default="review-audit.jsonl")
    p.add_argument("--ui-origin", default="*")
    p.add_argument("--snapshot", help="write a manifest snapshot here periodically")
    p.add_argument("--snapshot-every", type=int, default=50, help="mutations between snapshots")
    p.add_argument("--media-root", help="corpus directory to serve clips from under /media")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = _override(cfg, seed=args.seed)
        if args.parallelism is not None:
            cfg = _override(cfg, parallelism=args.parallelism)
    except (ConfigError, InvariantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        return args.fn(args, cfg)
    except (CliValidationError, ConfigError, InvariantError, ManifestFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (MediaLoadError, OSError, RuntimeError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _override(cfg: PipelineConfig, **kwargs) -> PipelineConfig:
    from dataclasses import replace

    return replace(cfg, **kwargs)


if __name__ == "__main__":
    sys.exit(main())
