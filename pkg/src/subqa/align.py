"""Text normalization, Levenshtein alignment and string similarity.

These primitives are shared by every metric; they are deterministic and
dependency-free so that scores reproduce bit-for-bit across platforms.
"""
from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass

APOSTROPHES = {"'", "’"}


@dataclass(frozen=True)
class NormSpec:
    """Which normalization steps to apply before token comparison."""

    case_fold: bool = True
    strip_punctuation: bool = True
    unicode_compat_fold: bool = True
    keep_intra_word_apostrophes: bool = True


#: canonical preset used by all metrics unless configured otherwise
METRIC_DEFAULT = NormSpec()


def _strip_punct(token: str, keep_intra_apostrophes: bool) -> str:
    out = []
    for i, ch in enumerate(token):
        if unicodedata.category(ch).startswith("P"):
            if (keep_intra_apostrophes and ch in APOSTROPHES
                    and 0 < i < len(token) - 1
                    and token[i - 1].isalnum() and token[i + 1].isalnum()):
                out.append(ch)
            continue
        out.append(ch)
    return "".join(out)


def normalize(text: str, spec: NormSpec = METRIC_DEFAULT) -> list[str]:
    """Normalize text to a token list. Deterministic and idempotent."""
    if spec.unicode_compat_fold:
        text = unicodedata.normalize("NFKC", text)
    if spec.case_fold:
        text = text.casefold()
    tokens = []
    for token in text.split():
        if spec.strip_punctuation:
            token = _strip_punct(token, spec.keep_intra_word_apostrophes)
        if token:
            tokens.append(token)
    return tokens


class OpKind(enum.Enum):
    MATCH = "match"
    SUBSTITUTE = "substitute"
    DELETE = "delete"
    INSERT = "insert"


@dataclass(frozen=True)
class AlignOp:
    """One edit step; src/tgt are positions in the source/target sequences."""

    kind: OpKind
    src: int | None
    tgt: int | None


@dataclass(frozen=True)
class Alignment:
    ops: tuple[AlignOp, ...]
    cost: int

    def counts(self) -> tuple[int, int, int, int]:
        """(matches, substitutions, deletions, insertions)."""
        m = s = d = i = 0
        for op in self.ops:
            if op.kind is OpKind.MATCH:
                m += 1
            elif op.kind is OpKind.SUBSTITUTE:
                s += 1
            elif op.kind is OpKind.DELETE:
                d += 1
            else:
                i += 1
        return m, s, d, i

def levenshtein(a: list, b: list) -> Alignment:
    """Minimal unit-cost alignment of two token lists.

    Tie-break is fixed (Match > Substitute > Delete > Insert) so the edit
    script is deterministic across runs and platforms.
    """
    la, lb = len(a), len(b)
    # dist[i][j]: distance between a[:i] and b[:j]
    dist = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la + 1):
        dist[i][0] = i
    for j in range(lb + 1):
        dist[0][j] = j
    for i in range(1, la + 1):
        row, prev = dist[i], dist[i - 1]
        ai = a[i - 1]
        for j in range(1, lb + 1):
            sub = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            dele = prev[j] + 1
            ins = row[j - 1] + 1
            row[j] = min(sub, dele, ins)

    ops: list[AlignOp] = []
    i, j = la, lb
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and dist[i - 1][j - 1] == here:
            ops.append(AlignOp(OpKind.MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and a[i - 1] != b[j - 1] and dist[i - 1][j - 1] + 1 == here:
            ops.append(AlignOp(OpKind.SUBSTITUTE, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i - 1][j] + 1 == here:
            ops.append(AlignOp(OpKind.DELETE, i - 1, None))
            i -= 1
        else:
            ops.append(AlignOp(OpKind.INSERT, None, j - 1))
            j -= 1
    ops.reverse()
    return Alignment(ops=tuple(ops), cost=dist[la][lb])


def replay(ops: tuple[AlignOp, ...], source: list, target: list) -> list:
    """Replay an edit script on the source; must reproduce the target."""
    out = []
    for op in ops:
        if op.kind is OpKind.MATCH:
            out.append(source[op.src])
        elif op.kind is OpKind.SUBSTITUTE:
            out.append(target[op.tgt])
        elif op.kind is OpKind.INSERT:
            out.append(target[op.tgt])
        # DELETE contributes nothing
    return out


def char_distance(a: str, b: str) -> int:
    """Plain character-level Levenshtein distance (two-row DP)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j - 1] + (ca != cb), prev[j] + 1, cur[-1] + 1))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """Character-level Levenshtein ratio on case-folded strings, in [0, 1]."""
    a, b = a.casefold(), b.casefold()
    if not a and not b:
        return 1.0
    longest = max(len(a), len(b))
    return 1.0 - char_distance(a, b) / longest


@dataclass(frozen=True)
class SentencePairing:
    """Monotone pairing of reference and hypothesis sentences."""

    pairs: tuple[tuple[int, int, float], ...]
    unpaired_ref: tuple[int, ...]
    unpaired_hyp: tuple[int, ...]


def align_sentences(ref: list[str], hyp: list[str]) -> SentencePairing:
    """Sequence-level Levenshtein with substitution cost 1 - similarity.

    Match/Substitute ops become (ref_idx, hyp_idx, similarity) pairs;
    Delete/Insert become unpaired reference/hypothesis indices.
    """
    lr, lh = len(ref), len(hyp)
    sim = [[similarity(ref[i], hyp[j]) for j in range(lh)] for i in range(lr)]
    dist = [[0.0] * (lh + 1) for _ in range(lr + 1)]
    for i in range(lr + 1):
        dist[i][0] = float(i)
    for j in range(lh + 1):
        dist[0][j] = float(j)
    for i in range(1, lr + 1):
        for j in range(1, lh + 1):
            dist[i][j] = min(
                dist[i - 1][j - 1] + 1.0 - sim[i - 1][j - 1],
                dist[i - 1][j] + 1.0,
                dist[i][j - 1] + 1.0,
            )

    eps = 1e-12
    pairs: list[tuple[int, int, float]] = []
    unpaired_ref: list[int] = []
    unpaired_hyp: list[int] = []
    i, j = lr, lh
    while i > 0 or j > 0:
        here = dist[i][j]
        if (i > 0 and j > 0
                and abs(dist[i - 1][j - 1] + 1.0 - sim[i - 1][j - 1] - here) < eps):
            pairs.append((i - 1, j - 1, sim[i - 1][j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and abs(dist[i - 1][j] + 1.0 - here) < eps:
            unpaired_ref.append(i - 1)
            i -= 1
        else:
            unpaired_hyp.append(j - 1)
            j -= 1
    pairs.reverse()
    unpaired_ref.reverse()
    unpaired_hyp.reverse()
    return SentencePairing(tuple(pairs), tuple(unpaired_ref), tuple(unpaired_hyp))


# Sentence boundary: terminal punctuation, whitespace, then an uppercase
# letter or opening quote. The corpus is Italian television transcripts, so
# accented capitals are included.
_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?…])\s+(?=[A-ZÀ-ÖØ-Þ\"'«‘“])")


def split_sentences(text: str) -> list[str]:
    """Split text into sentences for alignment."""
    return [s for s in (_s.strip() for _s in _SENTENCE_BOUNDARY.split(text)) if s]
