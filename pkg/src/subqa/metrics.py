"""Transcription and subtitling quality metrics.

WER over full token streams and one-minute windows, broadcast readability
compliance (NCS / MSD / CPS), and semantic scoring over aligned sentence
pairs. SubER lives in suber.py.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import align
from .errors import EmptyReference, ScorerFailure, ZeroDuration
from .model import SubtitleFile, TimedWord


@dataclass(frozen=True)
class WerBreakdown:
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def wer(self) -> float:
        return (self.substitutions + self.deletions + self.insertions) / self.ref_len


def wer(ref: list[str], hyp: list[str]) -> WerBreakdown:
    """Word error rate from the minimal alignment of the two token lists."""
    if not ref:
        raise EmptyReference("reference token list is empty")
    alignment = align.levenshtein(ref, hyp)
    _, s, d, i = alignment.counts()
    return WerBreakdown(substitutions=s, deletions=d, insertions=i, ref_len=len(ref))


@dataclass(frozen=True)
class WindowRow:
    """One time window; breakdown is None for windows with no reference words.

    Hypothesis words falling in an empty window are reported as
    unmatched_hyp_words ("unmatched speech" mass, e.g. transcribed songs)
    instead of producing an undefined WER.
    """

    index: int
    ref_word_count: int
    breakdown: WerBreakdown | None
    unmatched_hyp_words: int = 0


@dataclass(frozen=True)
class WindowedWer:
    window_seconds: int
    rows: tuple[WindowRow, ...]

    def defined_wers(self) -> list[float]:
        return [r.breakdown.wer for r in self.rows if r.breakdown is not None]


def windowed_wer(ref: list[TimedWord], hyp: list[TimedWord],
                 window_s: int = 60,
                 spec: align.NormSpec = align.METRIC_DEFAULT) -> WindowedWer:
    """WER computed independently per time window.

    A word belongs to window floor(midpoint / window) with half-open
    boundaries [k*w, (k+1)*w).
    """
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    window_ms = window_s * 1000

    def bucket(words: list[TimedWord]) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for w in words:
            out.setdefault(w.midpoint_ms // window_ms, []).extend(
                align.normalize(w.text, spec))
        return out

    ref_buckets = bucket(ref)
    hyp_buckets = bucket(hyp)
    n_windows = max([k + 1 for k in (*ref_buckets, *hyp_buckets)], default=0)
    rows = []
    for k in range(n_windows):
        ref_tokens = ref_buckets.get(k, [])
        hyp_tokens = hyp_buckets.get(k, [])
        if ref_tokens:
            rows.append(WindowRow(index=k, ref_word_count=len(ref_tokens),
                                  breakdown=wer(ref_tokens, hyp_tokens)))
        else:
            rows.append(WindowRow(index=k, ref_word_count=0, breakdown=None,
                                  unmatched_hyp_words=len(hyp_tokens)))
    return WindowedWer(window_seconds=window_s, rows=tuple(rows))


@dataclass(frozen=True)
class ReadabilityLimits:
    """Broadcast readability ranges (RAI guidelines)."""

    ncs_min: int = 30
    ncs_max: int = 74
    msd_min: float = 1.0
    msd_max: float = 6.0
    cps_min: float = 9.0
    cps_max: float = 15.0


class Violation(enum.Enum):
    NCS_LOW = "NcsLow"
    NCS_HIGH = "NcsHigh"
    MSD_LOW = "MsdLow"
    MSD_HIGH = "MsdHigh"
    CPS_LOW = "CpsLow"
    CPS_HIGH = "CpsHigh"


def cue_ncs(lines: tuple[str, ...]) -> int:
    """Characters per segment: all characters of all lines including spaces,
    excluding the line separators themselves."""
    return sum(len(line) for line in lines)


def check_limits(ncs: int, msd: float, cps: float,
                 limits: ReadabilityLimits) -> frozenset[Violation]:
    flags = set()
    if ncs < limits.ncs_min:
        flags.add(Violation.NCS_LOW)
    if ncs > limits.ncs_max:
        flags.add(Violation.NCS_HIGH)
    if msd < limits.msd_min:
        flags.add(Violation.MSD_LOW)
    if msd > limits.msd_max:
        flags.add(Violation.MSD_HIGH)
    if cps < limits.cps_min:
        flags.add(Violation.CPS_LOW)
    if cps > limits.cps_max:
        flags.add(Violation.CPS_HIGH)
    return frozenset(flags)


@dataclass(frozen=True)
class CueReadability:
    cue_index: int
    ncs: int
    msd: float
    cps: float
    violations: frozenset[Violation]


@dataclass(frozen=True)
class ReadabilityReport:
    rows: tuple[CueReadability, ...]
    limits: ReadabilityLimits

    def violation_rates(self) -> dict[Violation, float]:
        if not self.rows:
            return {v: 0.0 for v in Violation}
        n = len(self.rows)
        return {v: sum(1 for r in self.rows if v in r.violations) / n for v in Violation}

    @property
    def hard_violation_count(self) -> int:
        hard = {Violation.NCS_HIGH, Violation.MSD_HIGH, Violation.CPS_HIGH}
        return sum(1 for r in self.rows for v in r.violations if v in hard)


def readability(file: SubtitleFile,
                limits: ReadabilityLimits = ReadabilityLimits()) -> ReadabilityReport:
    """Per-cue NCS / MSD / CPS with threshold flags and aggregate rates."""
    rows = []
    for cue in file.cues:
        ncs = cue_ncs(cue.lines)
        msd = cue.duration_ms / 1000.0
        if msd == 0:
            raise ZeroDuration(f"cue {cue.index} has zero duration")
        cps = ncs / msd
        rows.append(CueReadability(cue_index=cue.index, ncs=ncs, msd=msd, cps=cps,
                                   violations=check_limits(ncs, msd, cps, limits)))
    return ReadabilityReport(rows=tuple(rows), limits=limits)


class SemanticScorer:
    """Interface for sentence-pair semantic scorers.

    score(x, x) must return max_score; unpaired sentences are charged
    min_score in semantic_report.
    """

    min_score: float = 0.0
    max_score: float = 1.0

    def score(self, ref: str, hyp: str) -> float:
        raise NotImplementedError


class LexicalScorer(SemanticScorer):
    """Default scorer: character-level Levenshtein ratio. Deterministic and
    dependency-free; a remote model-backed scorer can be swapped in."""

    def score(self, ref: str, hyp: str) -> float:
        return align.similarity(ref, hyp)


class RemoteScorer(SemanticScorer):
    """Adapter for an external semantic scoring service (e.g. a BLEURT server).

    POSTs {"ref": ..., "hyp": ...} and expects {"score": <unit-interval>}.
    """

    def __init__(self, endpoint: str, timeout_s: float = 30.0):
        self.endpoint = endpoint
        self.timeout_s = timeout_s

    def score(self, ref: str, hyp: str) -> float:
        import httpx

        try:
            resp = httpx.post(self.endpoint, json={"ref": ref, "hyp": hyp},
                              timeout=self.timeout_s)
            resp.raise_for_status()
            return float(resp.json()["score"])
        except Exception as exc:
            raise ScorerFailure(f"remote scorer failed: {exc}", ref=ref, hyp=hyp) from exc


@dataclass(frozen=True)
class SemanticReport:
    pair_scores: tuple[tuple[int, int, float], ...]
    unpaired_ref: tuple[int, ...]
    mean: float


def semantic_report(pairing: align.SentencePairing, ref_count: int,
                    ref: list[str], hyp: list[str],
                    scorer: SemanticScorer | None = None) -> SemanticReport:
    """Apply a scorer to each aligned pair; unpaired reference sentences are
    scored at the scorer's minimum; mean is over reference sentences."""
    scorer = scorer or LexicalScorer()
    pair_scores = []
    for ri, hi, _sim in pairing.pairs:
        try:
            pair_scores.append((ri, hi, scorer.score(ref[ri], hyp[hi])))
        except ScorerFailure:
            raise
        except Exception as exc:
            raise ScorerFailure(f"scorer failed on pair ({ri},{hi}): {exc}",
                                ref=ref[ri], hyp=hyp[hi]) from exc
    if ref_count == 0:
        mean = scorer.max_score
    else:
        total = sum(s for _, _, s in pair_scores)
        total += scorer.min_score * len(pairing.unpaired_ref)
        mean = total / ref_count
    return SemanticReport(pair_scores=tuple(pair_scores),
                          unpaired_ref=pairing.unpaired_ref, mean=mean)
