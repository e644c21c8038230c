"""Entity Error Rate pipeline.

Reference entities (produced by an external NER tool) are matched to
hypothesis token n-grams inside a +/-5 s temporal window around the entity's
anchor; the most similar candidate decides the verdict: Correct, Incorrect,
or Missing. EER = (#Incorrect + #Missing) / #reference entities.
"""
from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field

from . import align
from .errors import EmptyEntityList, MissingField, UnknownCategory
from .model import TimeCode, TimedWord, Transcript
from .transcript import transcript_words


class Category(enum.Enum):
    PERSON = "Person"
    ORGANIZATION = "Organization"
    LOCATION = "Location"


class Verdict(enum.Enum):
    CORRECT = "Correct"
    INCORRECT = "Incorrect"
    MISSING = "Missing"


@dataclass(frozen=True)
class EntityRecord:
    surface: str
    category: Category
    anchor: TimeCode
    span: tuple[int, int] | None = None
    episode_id: str | None = None

    def __post_init__(self):
        if not self.surface.strip():
            raise ValueError("empty entity surface")


@dataclass(frozen=True)
class EerConfig:
    window_ms: int = 5000
    similarity_threshold: float = 0.5
    norm: align.NormSpec = align.METRIC_DEFAULT
    # Italian leading-apostrophe forms ("'ndrangheta" vs "ndrangheta") are
    # accepted as equal by default.
    accept_leading_apostrophe: bool = True

    def __post_init__(self):
        if self.window_ms <= 0:
            raise ValueError("window_ms must be positive")
        if not 0 < self.similarity_threshold <= 1:
            raise ValueError("similarity_threshold must be in (0, 1]")


@dataclass(frozen=True)
class Candidate:
    text: str
    first_word_midpoint_ms: int
    position: int  # index of the first word in the hypothesis word stream
    similarity: float


@dataclass(frozen=True)
class EntityMatch:
    ref: EntityRecord
    candidate: Candidate | None
    verdict: Verdict


@dataclass(frozen=True)
class EerResult:
    matches: tuple[EntityMatch, ...]
    by_category: dict

    @property
    def eer(self) -> float:
        errors = sum(1 for m in self.matches if m.verdict is not Verdict.CORRECT)
        return errors / len(self.matches)


def load_entities(raw: bytes) -> list[EntityRecord]:
    """Parse line-delimited JSON entity annotations, sorted by anchor."""
    records = []
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MissingField(f"line {lineno}: not valid JSON: {exc}") from None
        for key in ("surface", "category", "anchor_s"):
            if key not in obj:
                raise MissingField(f"line {lineno}: missing field '{key}'")
        try:
            category = Category(obj["category"])
        except ValueError:
            raise UnknownCategory(
                f"line {lineno}: unknown category {obj['category']!r}") from None
        records.append(EntityRecord(
            surface=obj["surface"], category=category,
            anchor=TimeCode.from_seconds(obj["anchor_s"]),
            episode_id=obj.get("episode_id")))
    records.sort(key=lambda r: r.anchor.millis)
    return records


def _verdict_key(text: str, cfg: EerConfig) -> str:
    """Normalized form used for the Correct/Incorrect decision.

    With accept_leading_apostrophe (the default) a leading apostrophe is
    stripped like any other punctuation, so "'ndrangheta" == "ndrangheta";
    otherwise it is preserved and the two forms differ.
    """
    keep_leading = not cfg.accept_leading_apostrophe
    tokens = []
    for raw in text.split():
        lead = "'" if (keep_leading and raw and raw[0] in align.APOSTROPHES
                       and len(raw) > 1 and raw[1].isalnum()) else ""
        normed = align.normalize(raw, cfg.norm)
        if normed:
            tokens.append(lead + " ".join(normed))
    return " ".join(tokens)


def match_entity(ref: EntityRecord, hyp: Transcript,
                 cfg: EerConfig = EerConfig(),
                 hyp_words: list[TimedWord] | None = None) -> EntityMatch:
    """Match one reference entity against hypothesis word n-grams.

    Candidates are n-grams (n = entity word count +/-1) whose first word's
    midpoint lies within the temporal window around the anchor. The winner is
    the highest-similarity candidate; ties break by smallest time difference,
    then earliest position.
    """
    words = hyp_words if hyp_words is not None else transcript_words(hyp)
    n_ref = max(1, len(ref.surface.split()))
    lo = ref.anchor.millis - cfg.window_ms
    hi = ref.anchor.millis + cfg.window_ms

    best: Candidate | None = None
    for pos, word in enumerate(words):
        mid = word.midpoint_ms
        if mid < lo or mid > hi:
            continue
        for n in range(max(1, n_ref - 1), n_ref + 2):
            if pos + n > len(words):
                continue
            text = " ".join(w.text for w in words[pos:pos + n])
            sim = align.similarity(ref.surface, text)
            cand = Candidate(text=text, first_word_midpoint_ms=mid,
                             position=pos, similarity=sim)
            if best is None:
                best = cand
                continue
            key = (-cand.similarity, abs(mid - ref.anchor.millis), cand.position)
            best_key = (-best.similarity,
                        abs(best.first_word_midpoint_ms - ref.anchor.millis),
                        best.position)
            if key < best_key:
                best = cand

    if best is None or best.similarity < cfg.similarity_threshold:
        return EntityMatch(ref=ref, candidate=None, verdict=Verdict.MISSING)
    if _verdict_key(ref.surface, cfg) == _verdict_key(best.text, cfg):
        return EntityMatch(ref=ref, candidate=best, verdict=Verdict.CORRECT)
    return EntityMatch(ref=ref, candidate=best, verdict=Verdict.INCORRECT)


def eer(refs: list[EntityRecord], hyp: Transcript,
        cfg: EerConfig = EerConfig()) -> EerResult:
    """Aggregate match_entity over all reference entity occurrences."""
    if not refs:
        raise EmptyEntityList("no reference entities")
    words = transcript_words(hyp)
    matches = tuple(match_entity(r, hyp, cfg, hyp_words=words) for r in refs)
    by_category: dict[Category, Counter] = {}
    for m in matches:
        by_category.setdefault(m.ref.category, Counter())[m.verdict] += 1
    return EerResult(matches=matches, by_category=by_category)
