"""Command line entry point.

Subcommands: eval, segment, review, report, serve. Exit codes: 0 success,
1 partial failure (some rows errored), 2 invalid invocation.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import harness
from .errors import SubqaError
from .metrics import ReadabilityLimits
from .reviewer import MockProvider, ReviewMode, review_file
from .segmenter import SegmenterConfig, segment
from .srt import emit_srt, parse_srt
from .transcript import parse_transcript, transcript_words


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subqa")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a corpus manifest")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--metrics", default=None,
                   help="comma-separated subset of: " + ",".join(harness.ALL_METRICS))
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("segment", help="build a compliant SRT from a transcript")
    p.add_argument("--transcript", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)

    p = sub.add_parser("review", help="LLM post-editing of an SRT file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--mode", required=True, choices=[m.value for m in ReviewMode])
    p.add_argument("--provider", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="merge run outputs into report + plot data")
    p.add_argument("--runs", required=True)
    p.add_argument("--format", default="csv", choices=["csv"])
    p.add_argument("--plots", default=None)

    p = sub.add_parser("serve", help="run the job service")
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    return parser


def _load_segmenter_config(path: str | None) -> SegmenterConfig:
    if path is None:
        return SegmenterConfig()
    doc = json.loads(Path(path).read_text("utf-8"))
    limits = ReadabilityLimits(**doc.get("limits", {}))
    kwargs = {k: doc[k] for k in ("max_line_chars", "hard_silence_split_ms")
              if k in doc}
    return SegmenterConfig(limits=limits, **kwargs)


def cmd_eval(args) -> int:
    toggles = tuple(args.metrics.split(",")) if args.metrics else None
    spec = harness.load_run_spec(args.spec, metric_toggles=toggles)
    report = harness.run_corpus(spec, jobs=args.jobs)
    harness.emit_report(report, args.out, plots_dir=Path(args.out) / "plots")
    for err in report.errors:
        print(f"error: {err.episode_id}/{err.model_id}: {err.message}",
              file=sys.stderr)
    return 1 if report.errors else 0


def cmd_segment(args) -> int:
    transcript = parse_transcript(Path(args.transcript).read_bytes())
    words = transcript_words(transcript)
    cfg = _load_segmenter_config(args.config)
    Path(args.out).write_bytes(emit_srt(segment(words, cfg)))
    return 0


def _provider(name: str):
    if name == "mock":
        return MockProvider()
    from .reviewer import HttpProvider

    return HttpProvider(model=name)


def cmd_review(args) -> int:
    file = parse_srt(Path(args.infile).read_bytes())
    application = review_file(_provider(args.provider), file, ReviewMode(args.mode))
    Path(args.out).write_bytes(emit_srt(application.file))
    for idx in application.flagged_cues:
        print(f"flagged for human review: cue {idx}", file=sys.stderr)
    return 0


def _read_rows(path: Path) -> list[harness.ReportRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            kwargs = {}
            for col in harness.CSV_COLUMNS:
                value = rec.get(col, "")
                if col in ("episode_id", "typology", "model_id"):
                    kwargs[col] = value
                else:
                    kwargs[col] = float(value) if value else None
            rows.append(harness.ReportRow(**kwargs))
    return rows


def cmd_report(args) -> int:
    runs = Path(args.runs)
    rows: list[harness.ReportRow] = []
    for path in sorted(runs.rglob("metrics.csv")):
        rows.extend(_read_rows(path))
    if not rows:
        print(f"no metrics.csv found under {runs}", file=sys.stderr)
        return 2
    rows.sort(key=lambda r: (r.episode_id, r.model_id))
    report = harness.MetricsReport(rows=tuple(rows))

    # review-gain series: EER delta between "<model>" and "<model>-reviewed"
    # rows of the same episode (negative delta means improvement)
    by_key = {(r.episode_id, r.model_id): r for r in rows}
    deltas = []
    for (episode, model), row in sorted(by_key.items()):
        base = by_key.get((episode, model.removesuffix("-reviewed")))
        if model.endswith("-reviewed") and base is not None \
                and row.eer is not None and base.eer is not None:
            deltas.append(row.eer - base.eer)
    harness.emit_report(report, runs / "combined", plots_dir=args.plots,
                        review_deltas=deltas if deltas else None)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.store, args.port, workers=args.workers)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    handler = {"eval": cmd_eval, "segment": cmd_segment, "review": cmd_review,
               "report": cmd_report, "serve": cmd_serve}[args.command]
    try:
        return handler(args)
    except SubqaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
