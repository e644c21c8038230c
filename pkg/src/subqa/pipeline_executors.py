"""Executors wiring job kinds to the pipeline modules.

Each executor takes the job's input map and a per-job artifact directory and
returns a map of artifact names to written paths. Executors are idempotent:
re-running one after a crash overwrites the same artifacts.
"""
from __future__ import annotations

from pathlib import Path

from . import harness
from .reviewer import MockProvider, ReviewMode, review_file
from .segmenter import SegmenterConfig, segment
from .srt import emit_srt, parse_srt
from .transcript import parse_transcript, transcript_words


def _provider(name: str):
    if name == "mock":
        return MockProvider()
    from .reviewer import HttpProvider

    return HttpProvider(model=name)


def run_segment(inputs: dict, job_dir: Path) -> dict:
    transcript = parse_transcript(Path(inputs["transcript"]).read_bytes())
    words = transcript_words(transcript)
    srt_file = segment(words, SegmenterConfig())
    out = job_dir / "segmented.srt"
    out.write_bytes(emit_srt(srt_file))
    return {"srt": out}


def run_evaluate(inputs: dict, job_dir: Path) -> dict:
    spec = harness.load_run_spec(inputs["manifest"])
    report = harness.run_corpus(spec, jobs=int(inputs.get("jobs", 1)))
    written = harness.emit_report(report, job_dir, plots_dir=job_dir / "plots")
    return {p.name: p for p in written}


def run_review(inputs: dict, job_dir: Path) -> dict:
    file = parse_srt(Path(inputs["srt"]).read_bytes())
    mode = ReviewMode(inputs.get("mode", "entities"))
    provider = _provider(inputs.get("provider", "mock"))
    application = review_file(provider, file, mode)
    out = job_dir / "reviewed.srt"
    out.write_bytes(emit_srt(application.file))
    return {"srt": out}


def run_full_pipeline(inputs: dict, job_dir: Path) -> dict:
    """Segment a transcript, review it, and evaluate against the reference."""
    artifacts = run_segment(inputs, job_dir)
    reviewed = run_review({**inputs, "srt": str(artifacts["srt"])}, job_dir)
    artifacts["reviewed_srt"] = reviewed["srt"]
    if "manifest" in inputs:
        artifacts.update(run_evaluate(inputs, job_dir))
    return artifacts
