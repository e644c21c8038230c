"""Unified ASR transcript interchange codec and reference word timing.

Interchange format (JSON, decimal seconds at millisecond precision):

    {"model_id": ..., "audio_id": ..., "audio_duration_s": ...,
     "segments": [{"text": ..., "start_s": ..., "end_s": ...,
                   "words": [{"text": ..., "start_s": ..., "end_s": ...,
                              "confidence": ...?}]}]}

Segments without a "words" list parse to empty word tuples; the transcript's
`has_word_timing` flag records whether any word-level timing survived.
"""
from __future__ import annotations

import json

from .errors import SchemaViolation, TimingViolation
from .model import SubtitleFile, TimeCode, TimedWord, Transcript, TranscriptSegment


def _require(obj: dict, key: str, types, path: str):
    if key not in obj:
        raise SchemaViolation(f"{path}.{key}", "missing")
    value = obj[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise SchemaViolation(f"{path}.{key}", f"expected {types}, got {type(value).__name__}")
    return value


def _seconds(obj: dict, key: str, path: str) -> TimeCode:
    value = _require(obj, key, (int, float), path)
    if value < 0:
        raise SchemaViolation(f"{path}.{key}", "negative time")
    return TimeCode.from_seconds(value)


def parse_transcript(raw: bytes) -> Transcript:
    """Parse interchange JSON bytes into a Transcript.

    Raises SchemaViolation (missing field / wrong type, naming the field) or
    TimingViolation (ordering or containment breaches).
    """
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaViolation("$", f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "top level must be an object")

    model_id = _require(doc, "model_id", str, "$")
    audio_id = _require(doc, "audio_id", str, "$")
    audio_duration = _seconds(doc, "audio_duration_s", "$")
    raw_segments = _require(doc, "segments", list, "$")

    segments = []
    for si, seg in enumerate(raw_segments):
        path = f"$.segments[{si}]"
        if not isinstance(seg, dict):
            raise SchemaViolation(path, "segment must be an object")
        text = _require(seg, "text", str, path)
        start = _seconds(seg, "start_s", path)
        end = _seconds(seg, "end_s", path)
        words = []
        for wi, word in enumerate(seg.get("words") or []):
            wpath = f"{path}.words[{wi}]"
            if not isinstance(word, dict):
                raise SchemaViolation(wpath, "word must be an object")
            wtext = _require(word, "text", str, wpath)
            wstart = _seconds(word, "start_s", wpath)
            wend = _seconds(word, "end_s", wpath)
            confidence = word.get("confidence")
            if confidence is not None and (
                    isinstance(confidence, bool) or not isinstance(confidence, (int, float))
                    or not 0.0 <= confidence <= 1.0):
                raise SchemaViolation(f"{wpath}.confidence", "must be in [0,1]")
            try:
                words.append(TimedWord(text=wtext, start=wstart, end=wend,
                                       confidence=confidence))
            except ValueError as exc:
                raise TimingViolation(f"{wpath}: {exc}") from None
        try:
            segments.append(TranscriptSegment(text=text, start=start, end=end,
                                              words=tuple(words)))
        except ValueError as exc:
            raise TimingViolation(f"{path}: {exc}") from None

    try:
        return Transcript(model_id=model_id, audio_id=audio_id,
                          audio_duration=audio_duration, segments=tuple(segments))
    except ValueError as exc:
        raise TimingViolation(str(exc)) from None


def emit_transcript(transcript: Transcript) -> bytes:
    """Serialize a Transcript back to interchange JSON (stable key order)."""
    doc = {
        "model_id": transcript.model_id,
        "audio_id": transcript.audio_id,
        "audio_duration_s": round(transcript.audio_duration.seconds, 3),
        "segments": [
            {
                "text": seg.text,
                "start_s": round(seg.start.seconds, 3),
                "end_s": round(seg.end.seconds, 3),
                "words": [
                    {"text": w.text,
                     "start_s": round(w.start.seconds, 3),
                     "end_s": round(w.end.seconds, 3),
                     **({"confidence": w.confidence} if w.confidence is not None else {})}
                    for w in seg.words
                ],
            }
            for seg in transcript.segments
        ],
    }
    return json.dumps(doc, ensure_ascii=False, indent=2).encode("utf-8")


def _interpolate_words(text: str, start: TimeCode, end: TimeCode) -> list[TimedWord]:
    """Assign word times by linear interpolation of character offsets.

    Weights include inter-word spaces, so a word covering characters [a, b)
    of an N-character text spans [start + a/N * dur, start + b/N * dur].
    """
    tokens = text.split()
    if not tokens:
        return []
    total = len(" ".join(tokens))
    duration = end.millis - start.millis
    words = []
    offset = 0
    for token in tokens:
        a, b = offset, offset + len(token)
        ws = start.millis + round(a / total * duration)
        we = start.millis + round(b / total * duration)
        words.append(TimedWord(text=token, start=TimeCode(ws), end=TimeCode(we)))
        offset = b + 1
    return words


def reference_words(file: SubtitleFile) -> list[TimedWord]:
    """Tokenize cue text on whitespace with interpolated per-word times.

    Needed because reference SRT files carry only cue-level timing while
    windowed WER needs word times; every emitted word lies inside its cue.
    """
    words: list[TimedWord] = []
    for cue in file.cues:
        words.extend(_interpolate_words(cue.text, cue.start, cue.end))
    return words


def transcript_words(transcript: Transcript) -> list[TimedWord]:
    """All words of a transcript in order.

    Segments without word timing fall back to interpolation over the segment
    interval, mirroring reference_words.
    """
    words: list[TimedWord] = []
    for seg in transcript.segments:
        if seg.words:
            words.extend(seg.words)
        else:
            words.extend(_interpolate_words(seg.text, seg.start, seg.end))
    return words
