"""Subtitle and transcript data model.

All types are immutable values after construction and safe to share across
threads. Times are integer milliseconds internally; the interchange boundary
uses decimal seconds (see transcript.py).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

MAX_HOURS = 100  # SRT renders HH with two digits

# Tolerance for word timings sticking out of their parent segment; absorbs
# rounding in ASR word-level output.
WORD_CONTAINMENT_TOLERANCE_MS = 50


@dataclass(frozen=True, order=True)
class TimeCode:
    """A point on the media timeline, in milliseconds since start."""

    millis: int

    def __post_init__(self):
        if self.millis < 0:
            raise ValueError(f"negative timecode: {self.millis}")
        if self.millis >= MAX_HOURS * 3_600_000:
            raise ValueError(f"timecode beyond {MAX_HOURS} hours: {self.millis}")

    @classmethod
    def from_seconds(cls, seconds: float) -> "TimeCode":
        return cls(round(seconds * 1000))

    @property
    def seconds(self) -> float:
        return self.millis / 1000.0

    def render(self) -> str:
        """Format as SRT `HH:MM:SS,mmm`."""
        ms = self.millis
        h, ms = divmod(ms, 3_600_000)
        m, ms = divmod(ms, 60_000)
        s, ms = divmod(ms, 1000)
        return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"

    def __add__(self, other_ms: int) -> "TimeCode":
        return TimeCode(self.millis + other_ms)


@dataclass(frozen=True)
class Cue:
    """One subtitle block: index, display interval, 1..n text lines."""

    index: int
    start: TimeCode
    end: TimeCode
    lines: tuple[str, ...]

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"cue index must be positive, got {self.index}")
        if not self.start < self.end:
            raise ValueError(f"cue {self.index}: start {self.start.millis} >= end {self.end.millis}")
        if isinstance(self.lines, list):
            object.__setattr__(self, "lines", tuple(self.lines))
        if len(self.lines) < 1:
            raise ValueError(f"cue {self.index}: no text lines")
        for line in self.lines:
            if "\n" in line or "\r" in line:
                raise ValueError(f"cue {self.index}: line contains a newline")
            if not line.strip():
                raise ValueError(f"cue {self.index}: empty line")

    @property
    def text(self) -> str:
        """Cue text flattened to a single line (line breaks become spaces)."""
        return " ".join(self.lines)

    @property
    def duration_ms(self) -> int:
        return self.end.millis - self.start.millis


@dataclass(frozen=True)
class SubtitleFile:
    """An ordered sequence of cues, e.g. one SRT file."""

    cues: tuple[Cue, ...]
    source_label: str = ""

    def __post_init__(self):
        if isinstance(self.cues, list):
            object.__setattr__(self, "cues", tuple(self.cues))
        prev = None
        for cue in self.cues:
            if prev is not None:
                if cue.index <= prev.index:
                    raise ValueError(
                        f"cue indices not strictly increasing: {prev.index} then {cue.index}")
                if cue.start < prev.start:
                    raise ValueError(
                        f"cue starts not non-decreasing at cue {cue.index}")
                if cue.start < prev.end:
                    # Real broadcast files contain overlapping cues; accept.
                    logger.warning("cue %d overlaps cue %d", cue.index, prev.index)
            prev = cue

    def __len__(self) -> int:
        return len(self.cues)


@dataclass(frozen=True)
class TimedWord:
    """A token with word-level timing."""

    text: str
    start: TimeCode
    end: TimeCode
    confidence: float | None = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("empty word text")
        if self.end < self.start:
            raise ValueError(f"word {self.text!r}: end before start")
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"word {self.text!r}: confidence outside [0,1]")

    @property
    def midpoint_ms(self) -> int:
        return (self.start.millis + self.end.millis) // 2


@dataclass(frozen=True)
class TranscriptSegment:
    """A sentence- or phrase-level unit of ASR output with optional word timing."""

    text: str
    start: TimeCode
    end: TimeCode
    words: tuple[TimedWord, ...] = ()

    def __post_init__(self):
        if isinstance(self.words, list):
            object.__setattr__(self, "words", tuple(self.words))
        if not self.start < self.end:
            raise ValueError(f"segment at {self.start.millis} ms: start >= end")
        prev_start = None
        lo = self.start.millis - WORD_CONTAINMENT_TOLERANCE_MS
        hi = self.end.millis + WORD_CONTAINMENT_TOLERANCE_MS
        for word in self.words:
            if word.start.millis < lo or word.end.millis > hi:
                raise ValueError(
                    f"word {word.text!r} outside segment "
                    f"[{self.start.millis},{self.end.millis}] ms beyond tolerance")
            if prev_start is not None and word.start.millis < prev_start:
                raise ValueError(f"word starts not non-decreasing at {word.text!r}")
            prev_start = word.start.millis


@dataclass(frozen=True)
class Transcript:
    """Unified ASR output for one audio file, one per ASR system."""

    model_id: str
    audio_id: str
    audio_duration: TimeCode
    segments: tuple[TranscriptSegment, ...] = ()

    def __post_init__(self):
        if isinstance(self.segments, list):
            object.__setattr__(self, "segments", tuple(self.segments))
        prev = None
        for seg in self.segments:
            if prev is not None and seg.start < prev.start:
                raise ValueError("segment starts not non-decreasing")
            prev = seg
        if self.segments:
            last_end = self.segments[-1].end.millis
            if last_end > self.audio_duration.millis + 1000:
                raise ValueError(
                    f"last segment ends {last_end} ms, beyond audio duration "
                    f"{self.audio_duration.millis} ms + 1 s")

    @property
    def has_word_timing(self) -> bool:
        return any(seg.words for seg in self.segments)
