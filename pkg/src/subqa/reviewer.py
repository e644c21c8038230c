"""LLM post-editing client with a validated batch protocol.

Cues are reviewed in batches of up to 40 texts. The provider must return a
structured output with the same number of texts (count-preservation
contract); on violation the batch is retried once, then bisected down to
single cues, and single-cue failures fall back to the original text with a
flag. The reviewer only ever replaces cue text: indices and timings are
untouched, and revised text that would break a hard readability limit is
rejected in favor of the original.
"""
from __future__ import annotations

import enum
import hashlib
import json
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ContractViolation, CountMismatch, ProviderUnreachable
from .metrics import ReadabilityLimits, cue_ncs
from .model import Cue, SubtitleFile
from .segmenter import split_lines
from .errors import Unsplittable

MAX_BATCH = 40
DEFAULT_PARALLELISM = 4


class ReviewMode(enum.Enum):
    ENTITY_CORRECTION = "entities"
    PUNCTUATION_RESTORATION = "punctuation"


_PROMPT_FILES = {
    ReviewMode.ENTITY_CORRECTION: "entity_correction.txt",
    ReviewMode.PUNCTUATION_RESTORATION: "punctuation_restoration.txt",
}


def prompt_template(mode: ReviewMode) -> str:
    return resources.files("subqa.prompts").joinpath(_PROMPT_FILES[mode]).read_text("utf-8")


@dataclass(frozen=True)
class ReviewBatch:
    cue_texts: tuple[str, ...]
    mode: ReviewMode
    context: str = ""
    batch_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])

    def __post_init__(self):
        if isinstance(self.cue_texts, list):
            object.__setattr__(self, "cue_texts", tuple(self.cue_texts))
        if not 1 <= len(self.cue_texts) <= MAX_BATCH:
            raise ValueError(f"batch size {len(self.cue_texts)} outside 1..{MAX_BATCH}")
        if any(not t.strip() for t in self.cue_texts):
            raise ValueError("empty cue text in batch")


@dataclass(frozen=True)
class ReviewResult:
    revised_texts: tuple[str, ...]
    provider_id: str
    latency_ms: int
    flagged: tuple[int, ...] = ()  # batch-local indices that fell back to the original


class ReviewerProvider:
    """Interface for review backends."""

    provider_id: str = "provider"
    supports_batch: bool = True

    def review(self, batch: ReviewBatch) -> list[str]:
        """Return the revised texts; must preserve the count (validated by
        review_batch, not trusted)."""
        raise NotImplementedError


class MockProvider(ReviewerProvider):
    """Deterministic offline provider: echo plus scripted substitutions.

    violate_first_n makes the first N calls return a wrong count (one text
    dropped); always_violate makes every call violate the contract.
    """

    provider_id = "mock"

    def __init__(self, substitutions: dict[str, str] | None = None,
                 violate_first_n: int = 0, always_violate: bool = False):
        self.substitutions = substitutions or {}
        self.violate_first_n = violate_first_n
        self.always_violate = always_violate
        self.calls = 0
        self._lock = threading.Lock()

    def review(self, batch: ReviewBatch) -> list[str]:
        with self._lock:
            self.calls += 1
            call_no = self.calls
        texts = []
        for text in batch.cue_texts:
            for old, new in self.substitutions.items():
                text = text.replace(old, new)
            texts.append(text)
        if self.always_violate or call_no <= self.violate_first_n:
            return texts[:-1]
        return texts


class HttpProvider(ReviewerProvider):
    """Adapter for a remote LLM endpoint.

    POSTs {"model", "prompt", "texts"} and expects {"texts": [...]}. Endpoint
    and API key come from configuration or the REVIEWER_ENDPOINT /
    REVIEWER_API_KEY environment variables.
    """

    def __init__(self, model: str, endpoint: str | None = None,
                 api_key: str | None = None, timeout_s: float = 60.0,
                 supports_batch: bool = True):
        self.model = model
        self.provider_id = model
        self.endpoint = endpoint or os.environ.get("REVIEWER_ENDPOINT", "")
        self.api_key = api_key or os.environ.get("REVIEWER_API_KEY", "")
        self.timeout_s = timeout_s
        self.supports_batch = supports_batch
        if not self.endpoint:
            raise ValueError("no reviewer endpoint configured")

    def review(self, batch: ReviewBatch) -> list[str]:
        import httpx

        prompt = prompt_template(batch.mode).format(
            n=len(batch.cue_texts), context=batch.context)
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = httpx.post(self.endpoint,
                              json={"model": self.model, "prompt": prompt,
                                    "texts": list(batch.cue_texts)},
                              headers=headers, timeout=self.timeout_s)
            resp.raise_for_status()
            return [str(t) for t in resp.json()["texts"]]
        except Exception as exc:
            raise ProviderUnreachable(f"provider {self.model}: {exc}") from exc


def build_batches(file: SubtitleFile, mode: ReviewMode,
                  max_batch: int = MAX_BATCH, context: str = "") -> list[ReviewBatch]:
    """Chunk cue texts into order-preserving batches; all full but the last."""
    texts = [cue.text for cue in file.cues]
    return [ReviewBatch(cue_texts=tuple(texts[i:i + max_batch]), mode=mode,
                        context=context)
            for i in range(0, len(texts), max_batch)]


def review_batch(provider: ReviewerProvider, batch: ReviewBatch,
                 audit: "AuditLog | None" = None) -> ReviewResult:
    """Review one batch, enforcing the count-preservation contract.

    On count mismatch: one retry, then recursive bisection down to single
    cues; a single cue that still fails falls back to its original text and
    is flagged.
    """
    started = time.monotonic()

    def attempt(b: ReviewBatch) -> list[str] | None:
        texts = provider.review(b)
        return list(texts) if len(texts) == len(b.cue_texts) else None

    def resolve(b: ReviewBatch) -> tuple[list[str], list[int]]:
        texts = attempt(b)
        if texts is None:
            texts = attempt(b)  # one retry
        if texts is not None:
            _log(audit, b, "ok")
            return texts, []
        if len(b.cue_texts) == 1:
            _log(audit, b, "fallback")
            return [b.cue_texts[0]], [0]
        _log(audit, b, "bisect")
        mid = len(b.cue_texts) // 2
        left = ReviewBatch(b.cue_texts[:mid], b.mode, b.context)
        right = ReviewBatch(b.cue_texts[mid:], b.mode, b.context)
        lt, lf = resolve(left)
        rt, rf = resolve(right)
        return lt + rt, lf + [mid + i for i in rf]

    texts, flagged = resolve(batch)
    latency = int((time.monotonic() - started) * 1000)
    return ReviewResult(revised_texts=tuple(texts), provider_id=provider.provider_id,
                        latency_ms=latency, flagged=tuple(flagged))


@dataclass(frozen=True)
class ReviewApplication:
    file: SubtitleFile
    flagged_cues: tuple[int, ...]  # cue indices kept at their original text


def apply_review(file: SubtitleFile, results: list[ReviewResult],
                 max_line_chars: int = 37,
                 limits: ReadabilityLimits = ReadabilityLimits()) -> ReviewApplication:
    """Merge review results back into the subtitle file.

    Only cue text changes; indices and timings are preserved exactly. Revised
    text is re-laid-out via split_lines; text that cannot be laid out within
    the hard readability limits keeps the original and is flagged for human
    review.
    """
    revised = [t for r in results for t in r.revised_texts]
    if len(revised) != len(file.cues):
        raise CountMismatch(
            f"{len(revised)} revised texts for {len(file.cues)} cues")
    flagged = set()
    offset = 0
    for r in results:
        for i in r.flagged:
            flagged.add(file.cues[offset + i].index)
        offset += len(r.revised_texts)

    cues = []
    for cue, text in zip(file.cues, revised):
        text = " ".join(text.split())
        lines = None
        if text:
            try:
                lines = split_lines(text, max_line_chars)
            except Unsplittable:
                lines = None
        if lines is not None:
            ncs = cue_ncs(lines)
            cps = ncs / (cue.duration_ms / 1000.0)
            if ncs > limits.ncs_max or cps > limits.cps_max:
                lines = None
        if lines is None or text == "":
            flagged.add(cue.index)
            lines = cue.lines
        cues.append(Cue(index=cue.index, start=cue.start, end=cue.end, lines=lines))
    return ReviewApplication(
        file=SubtitleFile(cues=tuple(cues), source_label=file.source_label),
        flagged_cues=tuple(sorted(flagged)))


class AuditLog:
    """Line-delimited review audit records."""

    def __init__(self, path: Path | str):
        self.path = Path(path)

    def write(self, record: dict):
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def _log(audit: AuditLog | None, batch: ReviewBatch, outcome: str,
         response_texts: list[str] | None = None):
    if audit is None:
        return
    req = hashlib.sha256("\n".join(batch.cue_texts).encode("utf-8")).hexdigest()[:16]
    resp = (hashlib.sha256("\n".join(response_texts).encode("utf-8")).hexdigest()[:16]
            if response_texts else "")
    audit.write({"batch_id": batch.batch_id, "mode": batch.mode.value,
                 "request_hash": req, "response_hash": resp, "outcome": outcome})


def review_file(provider: ReviewerProvider, file: SubtitleFile, mode: ReviewMode,
                context: str = "", max_batch: int = MAX_BATCH,
                parallelism: int = DEFAULT_PARALLELISM,
                audit: AuditLog | None = None,
                max_line_chars: int = 37) -> ReviewApplication:
    """Review a whole file: batch, dispatch with bounded parallelism, merge."""
    batches = build_batches(file, mode, max_batch=max_batch, context=context)
    if not batches:
        return ReviewApplication(file=file, flagged_cues=())
    if provider.supports_batch and parallelism > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(lambda b: review_batch(provider, b, audit), batches))
    else:
        if not provider.supports_batch:
            # per-cue providers process each subtitle individually
            batches = [ReviewBatch((t,), mode, context)
                       for b in batches for t in b.cue_texts]
        results = [review_batch(provider, b, audit) for b in batches]
    return apply_review(file, results, max_line_chars=max_line_chars)
