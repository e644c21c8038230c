"""Bit-exact SRT codec.

Parsing normalizes line endings to LF and strips an optional UTF-8 BOM;
emission always uses LF with blocks separated by exactly one blank line, so
emit(parse(x)) is the canonical form of x and round-trips byte-identically.
"""
from __future__ import annotations

import re

from .errors import EmptyCueText, MalformedTimecode, NonMonotonicIndex, SrtParseError
from .model import Cue, SubtitleFile, TimeCode

_TIMECODE_RE = re.compile(r"^(\d{2,}):([0-5]\d):([0-5]\d),(\d{3})$")
_TIMING_LINE_RE = re.compile(r"^(\S+)\s+-->\s+(\S+)$")


def parse_timecode(text: str, block: int) -> TimeCode:
    m = _TIMECODE_RE.match(text)
    if not m:
        raise MalformedTimecode(f"bad timecode {text!r}", block)
    h, mi, s, ms = (int(g) for g in m.groups())
    if h >= 100:
        raise MalformedTimecode(f"hours >= 100 in {text!r}", block)
    return TimeCode(((h * 60 + mi) * 60 + s) * 1000 + ms)


def parse_srt(raw: bytes, source_label: str = "") -> SubtitleFile:
    """Parse SRT bytes into a SubtitleFile.

    Raises MalformedTimecode / NonMonotonicIndex / EmptyCueText with the
    1-based block number, or SrtParseError for other structural problems.
    """
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise SrtParseError(f"not UTF-8: {exc}", 1) from None
    text = text.replace("\r\n", "\n").replace("\r", "\n")

    cues: list[Cue] = []
    prev_index = 0
    block_no = 0
    for chunk in re.split(r"\n\s*\n", text):
        lines = [ln for ln in chunk.split("\n")]
        # strip leading/trailing blank lines inside the chunk
        while lines and not lines[0].strip():
            lines.pop(0)
        while lines and not lines[-1].strip():
            lines.pop()
        if not lines:
            continue
        block_no += 1
        if len(lines) < 2:
            raise SrtParseError("block too short (need index and timing lines)", block_no)
        index_line = lines[0].strip()
        if not index_line.isdigit():
            raise SrtParseError(f"bad cue index {index_line!r}", block_no)
        index = int(index_line)
        if index <= prev_index:
            raise NonMonotonicIndex(
                f"cue index {index} not greater than previous {prev_index}", block_no)
        timing = _TIMING_LINE_RE.match(lines[1].strip())
        if not timing:
            raise MalformedTimecode(f"bad timing line {lines[1]!r}", block_no)
        start = parse_timecode(timing.group(1), block_no)
        end = parse_timecode(timing.group(2), block_no)
        text_lines = [ln for ln in lines[2:]]
        if not text_lines or all(not ln.strip() for ln in text_lines):
            raise EmptyCueText("cue has no text", block_no)
        try:
            cues.append(Cue(index=index, start=start, end=end, lines=tuple(text_lines)))
        except ValueError as exc:
            raise SrtParseError(str(exc), block_no) from None
        prev_index = index

    try:
        return SubtitleFile(cues=tuple(cues), source_label=source_label)
    except ValueError as exc:
        raise SrtParseError(str(exc), block_no) from None


def emit_srt(file: SubtitleFile) -> bytes:
    """Serialize to canonical SRT bytes (LF endings, one blank line between blocks)."""
    if not file.cues:
        return b""
    blocks = []
    for cue in file.cues:
        header = f"{cue.index}\n{cue.start.render()} --> {cue.end.render()}"
        blocks.append(header + "\n" + "\n".join(cue.lines))
    return ("\n\n".join(blocks) + "\n").encode("utf-8")
