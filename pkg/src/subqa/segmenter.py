"""Readability-compliant subtitle segmentation.

Rebuilds a subtitle file from word-timestamped ASR output. A dynamic program
over inter-word break points minimizes a penalty that prefers breaking at
punctuation (sentence-final > clause > conjunction > anywhere) while keeping
the hard readability constraints (NCS <= 74, MSD <= 6 s, CPS <= 15)
inviolable. Soft minimums (NCS >= 30, MSD >= 1 s, CPS >= 9) are penalties
only: short standalone utterances are legitimate subtitles. Silences of
1.5 s or longer force a cue boundary.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import InfeasibleSegment, Unsplittable
from .metrics import ReadabilityLimits, cue_ncs
from .model import Cue, SubtitleFile, TimedWord

SENTENCE_FINAL_CHARS = ".?!…"
CLAUSE_CHARS = ",;:"
CLOSING_CHARS = "\"'»”’)]"

# Common Italian coordinating/subordinating conjunctions; breaking right
# after one of these reads better than an arbitrary mid-phrase break.
CONJUNCTIONS = frozenset({
    "e", "ed", "o", "od", "ma", "però", "quindi", "perché", "mentre",
    "oppure", "anche", "cioè", "infatti", "dunque", "poi", "se", "che",
})


class BreakStrength(enum.IntEnum):
    SENTENCE_FINAL = 4
    CLAUSE = 3
    CONJUNCTION = 2
    ANY = 1


@dataclass(frozen=True)
class BreakPoint:
    position: int  # gap index: break between words[position-1] and words[position]
    strength: BreakStrength
    silence_ms: int


def classify_gap(preceding: TimedWord, following: TimedWord, position: int) -> BreakPoint:
    """Strength comes from the preceding token's trailing punctuation or
    lexical class."""
    text = preceding.text.rstrip(CLOSING_CHARS)
    if text and text[-1] in SENTENCE_FINAL_CHARS:
        strength = BreakStrength.SENTENCE_FINAL
    elif text and text[-1] in CLAUSE_CHARS:
        strength = BreakStrength.CLAUSE
    elif text.casefold() in CONJUNCTIONS:
        strength = BreakStrength.CONJUNCTION
    else:
        strength = BreakStrength.ANY
    silence = max(0, following.start.millis - preceding.end.millis)
    return BreakPoint(position=position, strength=strength, silence_ms=silence)


@dataclass(frozen=True)
class SegmenterConfig:
    limits: ReadabilityLimits = field(default_factory=ReadabilityLimits)
    max_line_chars: int = 37  # floor(NCS max / 2)
    hard_silence_split_ms: int = 1500
    # cost of ending a cue at a break of the given strength
    break_penalties: dict = field(default_factory=lambda: {
        BreakStrength.SENTENCE_FINAL: 0.0,
        BreakStrength.CLAUSE: 1.0,
        BreakStrength.CONJUNCTION: 2.0,
        BreakStrength.ANY: 3.0,
    })
    ncs_low_penalty: float = 1.0
    msd_low_penalty: float = 1.0
    cps_low_penalty: float = 1.0

    def __post_init__(self):
        if self.max_line_chars > self.limits.ncs_max:
            raise ValueError("max_line_chars exceeds ncs_max")


def split_lines(text: str, max_line_chars: int) -> tuple[str, ...]:
    """Split cue text into one or two lines of at most max_line_chars.

    Prefers the whitespace break with the strongest punctuation, then the one
    nearest the text midpoint; never splits inside a word.
    """
    if len(text) <= max_line_chars:
        return (text,)
    tokens = text.split()
    candidates = []  # (neg strength, distance to midpoint, split char offset)
    offset = 0
    for k, token in enumerate(tokens[:-1]):
        offset += len(token)
        left_len = offset
        right_len = len(text) - offset - 1
        if left_len <= max_line_chars and right_len <= max_line_chars:
            stripped = token.rstrip(CLOSING_CHARS)
            if stripped and stripped[-1] in SENTENCE_FINAL_CHARS:
                strength = BreakStrength.SENTENCE_FINAL
            elif stripped and stripped[-1] in CLAUSE_CHARS:
                strength = BreakStrength.CLAUSE
            else:
                strength = BreakStrength.ANY
            candidates.append((-int(strength), abs(left_len - len(text) / 2), offset))
        offset += 1  # the space
    if not candidates:
        raise Unsplittable(
            f"cannot split {text!r} into two lines of <= {max_line_chars} chars")
    _, _, split_at = min(candidates)
    return (text[:split_at], text[split_at + 1:])


def _cue_layout(text: str, cfg: SegmenterConfig) -> tuple[str, ...] | None:
    try:
        return split_lines(text, cfg.max_line_chars)
    except Unsplittable:
        return None


def segment(words: list[TimedWord], cfg: SegmenterConfig = SegmenterConfig()) -> SubtitleFile:
    """Segment a time-sorted word stream into a compliant SubtitleFile.

    Raises InfeasibleSegment when a single word on its own violates a hard
    constraint; nothing is ever silently truncated.
    """
    if not words:
        raise ValueError("empty word stream")
    n = len(words)
    limits = cfg.limits

    breaks = [classify_gap(words[i - 1], words[i], i) for i in range(1, n)]
    forced = {bp.position for bp in breaks if bp.silence_ms >= cfg.hard_silence_split_ms}

    texts = [w.text for w in words]
    # prefix_chars[i] = chars of " ".join(texts[:i])
    prefix_chars = [0] * (n + 1)
    for i in range(1, n + 1):
        prefix_chars[i] = prefix_chars[i - 1] + len(texts[i - 1]) + (1 if i > 1 else 0)

    def cue_text_len(j: int, i: int) -> int:
        # length of " ".join(texts[j:i])
        length = prefix_chars[i] - prefix_chars[j]
        if j > 0:
            length -= 1  # drop the joining space before word j
        return length

    def cue_penalty(j: int, i: int) -> float | None:
        """Penalty of a cue over words[j:i], or None if infeasible."""
        ncs = cue_text_len(j, i)
        if ncs > limits.ncs_max:
            return None
        duration_ms = words[i - 1].end.millis - words[j].start.millis
        if duration_ms <= 0:
            return None
        msd = duration_ms / 1000.0
        if msd > limits.msd_max:
            return None
        cps = ncs / msd
        if cps > limits.cps_max:
            return None
        if _cue_layout(" ".join(texts[j:i]), cfg) is None:
            return None
        if i < n:
            penalty = cfg.break_penalties[breaks[i - 1].strength]
        else:
            penalty = 0.0  # the end of speech is a natural boundary
        if ncs < limits.ncs_min:
            penalty += cfg.ncs_low_penalty
        if msd < limits.msd_min:
            penalty += cfg.msd_low_penalty
        if cps < limits.cps_min:
            penalty += cfg.cps_low_penalty
        return penalty

    INF = float("inf")
    dp = [INF] * (n + 1)
    back = [-1] * (n + 1)
    dp[0] = 0.0
    for i in range(1, n + 1):
        j = i - 1
        while j >= 0:
            if dp[j] < INF:
                pen = cue_penalty(j, i)
                if pen is not None and dp[j] + pen < dp[i]:
                    dp[i] = dp[j] + pen
                    back[i] = j
            if j in forced:  # cannot span a forced boundary
                break
            j -= 1

    if dp[n] == INF:
        for k, w in enumerate(words):
            if cue_penalty(k, k + 1) is None:
                raise InfeasibleSegment(
                    f"word {w.text!r} at {w.start.millis} ms violates a hard "
                    f"readability constraint on its own", word=w)
        raise InfeasibleSegment("no feasible segmentation", word=None)

    bounds = []
    i = n
    while i > 0:
        j = back[i]
        bounds.append((j, i))
        i = j
    bounds.reverse()

    cues = []
    for idx, (j, i) in enumerate(bounds, 1):
        text = " ".join(texts[j:i])
        cues.append(Cue(index=idx, start=words[j].start, end=words[i - 1].end,
                        lines=split_lines(text, cfg.max_line_chars)))
    return SubtitleFile(cues=tuple(cues), source_label="segmenter")


def segmentation_penalty(words: list[TimedWord], bounds: list[tuple[int, int]],
                         cfg: SegmenterConfig = SegmenterConfig()) -> float | None:
    """Penalty of an explicit segmentation, or None if any cue is infeasible.

    Shares the exact cost definition with segment(); used by tests to compare
    the DP result against exhaustive search.
    """
    n = len(words)
    breaks = [classify_gap(words[i - 1], words[i], i) for i in range(1, n)]
    forced = {bp.position for bp in breaks if bp.silence_ms >= cfg.hard_silence_split_ms}
    limits = cfg.limits
    cuts = {j for j, _ in bounds} | {i for _, i in bounds}
    if any(f not in cuts for f in forced):
        return None
    total = 0.0
    for j, i in bounds:
        text = " ".join(w.text for w in words[j:i])
        ncs = len(text)
        duration_ms = words[i - 1].end.millis - words[j].start.millis
        if duration_ms <= 0 or ncs > limits.ncs_max:
            return None
        msd = duration_ms / 1000.0
        cps = ncs / msd
        if msd > limits.msd_max or cps > limits.cps_max:
            return None
        if _cue_layout(text, cfg) is None:
            return None
        penalty = 0.0 if i == n else cfg.break_penalties[breaks[i - 1].strength]
        if ncs < limits.ncs_min:
            penalty += cfg.ncs_low_penalty
        if msd < limits.msd_min:
            penalty += cfg.msd_low_penalty
        if cps < limits.cps_min:
            penalty += cfg.cps_low_penalty
        total += penalty
    return total
