"""Subtitle Edit Rate: a TER-style edit rate over subtitle token streams.

Tokenization appends an <eol> token after each non-final line of a cue and an
<eob> token after each cue. Words and break tokens carry their parent cue's
time span; two tokens may align as Match/Substitute only when those spans
overlap. Block shifts of hypothesis tokens follow the greedy TER heuristic:
repeatedly apply the shift that most reduces the remaining edit distance,
until no shift helps. Score = (word_edits + break_edits + shifts) / denom,
with denom = reference words + reference break tokens.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import EmptyReference
from .model import SubtitleFile

MAX_SHIFT_ITERATIONS = 1000
MAX_SHIFT_BLOCK = 10
# below this many hypothesis tokens every block move is tried; above it the
# candidate set is pruned to blocks that literally occur in the reference
EXHAUSTIVE_SHIFT_LIMIT = 20


class TokenKind(enum.Enum):
    WORD = "word"
    EOL = "<eol>"
    EOB = "<eob>"


@dataclass(frozen=True)
class SuberToken:
    text: str
    kind: TokenKind
    span: tuple[int, int]  # parent cue [start_ms, end_ms]

    @property
    def is_break(self) -> bool:
        return self.kind is not TokenKind.WORD


@dataclass(frozen=True)
class SuberConfig:
    case_fold: bool = True
    max_shift_block: int = MAX_SHIFT_BLOCK
    max_shift_iterations: int = MAX_SHIFT_ITERATIONS


def tokenize(file: SubtitleFile, cfg: SuberConfig = SuberConfig()) -> list[SuberToken]:
    tokens: list[SuberToken] = []
    for cue in file.cues:
        span = (cue.start.millis, cue.end.millis)
        for li, line in enumerate(cue.lines):
            for word in line.split():
                text = word.casefold() if cfg.case_fold else word
                tokens.append(SuberToken(text, TokenKind.WORD, span))
            if li < len(cue.lines) - 1:
                tokens.append(SuberToken(TokenKind.EOL.value, TokenKind.EOL, span))
        tokens.append(SuberToken(TokenKind.EOB.value, TokenKind.EOB, span))
    return tokens


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return max(a[0], b[0]) < min(a[1], b[1])


def _alignable(r: SuberToken, h: SuberToken) -> bool:
    return _overlaps(r.span, h.span)


class _MaxFenwick:
    """Prefix-maximum tree over 1..n, initialized to 0."""

    def __init__(self, n: int):
        self.n = n
        self.tree = [0] * (n + 1)

    def update(self, i: int, value: int):
        while i <= self.n:
            if self.tree[i] < value:
                self.tree[i] = value
            i += i & -i

    def query(self, i: int) -> int:
        best = 0
        while i > 0:
            if self.tree[i] > best:
                best = self.tree[i]
            i -= i & -i
        return best


def _adjacency(ref: list[SuberToken], hyp: list[SuberToken]) -> list[list[tuple[int, int]]]:
    """For each hypothesis token, the (ref index, gain) pairs it may align to:
    gain 2 for an exact match, 1 for a time-overlapping substitution."""
    adj = []
    for h in hyp:
        pairs = []
        for i, r in enumerate(ref):
            if _overlaps(r.span, h.span):
                gain = 2 if (r.text == h.text and r.kind == h.kind) else 1
                pairs.append((i, gain))
        adj.append(pairs)
    return adj


def _chain_distance(lr: int, perm: list[int], adj: list[list[tuple[int, int]]]) -> int:
    """Constrained edit distance of ref vs the hypothesis ordered by perm.

    dist = lr + lh - max monotone chain gain over alignable (ref, hyp) pairs:
    each match on the chain saves a delete and an insert, each substitution
    saves one of the two.
    """
    lh = len(perm)
    if lr == 0 or lh == 0:
        return lr + lh
    rows: list[list[tuple[int, int]]] = [[] for _ in range(lr)]
    for j, oi in enumerate(perm):
        for i, gain in adj[oi]:
            rows[i].append((j, gain))
    fen = _MaxFenwick(lh)
    for cells in rows:
        cells.sort()
        updates = [(j, fen.query(j) + gain) for j, gain in cells]
        for j, v in updates:
            fen.update(j + 1, v)
    return lr + lh - fen.query(lh)


def constrained_distance(ref: list[SuberToken], hyp: list[SuberToken]) -> int:
    """Levenshtein distance where Match/Substitute require time overlap."""
    return _chain_distance(len(ref), list(range(len(hyp))), _adjacency(ref, hyp))


def _classify_edits(ref: list[SuberToken], hyp: list[SuberToken]) -> tuple[int, int]:
    """Backtrace the constrained DP and split edits into (word, break) counts.

    A substitution counts as a break edit when either side is a break token;
    deletions classify by the reference token, insertions by the hypothesis.
    """
    lr, lh = len(ref), len(hyp)
    big = lr + lh + 1
    dist = [[0] * (lh + 1) for _ in range(lr + 1)]
    for i in range(lr + 1):
        dist[i][0] = i
    for j in range(lh + 1):
        dist[0][j] = j
    for i in range(1, lr + 1):
        r = ref[i - 1]
        row, prev = dist[i], dist[i - 1]
        for j in range(1, lh + 1):
            h = hyp[j - 1]
            if _alignable(r, h):
                diag = prev[j - 1] + (0 if (r.text == h.text and r.kind == h.kind) else 1)
            else:
                diag = big
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)

    word_edits = break_edits = 0
    i, j = lr, lh
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and _alignable(ref[i - 1], hyp[j - 1]):
            same = ref[i - 1].text == hyp[j - 1].text and ref[i - 1].kind == hyp[j - 1].kind
            if same and dist[i - 1][j - 1] == here:
                i, j = i - 1, j - 1
                continue
            if not same and dist[i - 1][j - 1] + 1 == here:
                if ref[i - 1].is_break or hyp[j - 1].is_break:
                    break_edits += 1
                else:
                    word_edits += 1
                i, j = i - 1, j - 1
                continue
        if i > 0 and dist[i - 1][j] + 1 == here:
            if ref[i - 1].is_break:
                break_edits += 1
            else:
                word_edits += 1
            i -= 1
        else:
            if hyp[j - 1].is_break:
                break_edits += 1
            else:
                word_edits += 1
            j -= 1
    return word_edits, break_edits


def shift_candidates(n: int, max_block: int):
    """All (start, length, destination) block moves of a length-n sequence."""
    for start in range(n):
        for length in range(1, min(max_block, n - start) + 1):
            for dest in range(n - length + 1):
                if dest != start:
                    yield start, length, dest


def apply_shift(tokens: list, start: int, length: int, dest: int) -> list:
    block = tokens[start:start + length]
    rest = tokens[:start] + tokens[start + length:]
    return rest[:dest] + block + rest[dest:]


def _matched_hyp_positions(ref: list[SuberToken], hyp: list[SuberToken]) -> list[bool]:
    """Which hypothesis positions are exact matches in one optimal constrained
    alignment (full DP backtrace)."""
    lr, lh = len(ref), len(hyp)
    big = lr + lh + 1
    dist = [[0] * (lh + 1) for _ in range(lr + 1)]
    for i in range(lr + 1):
        dist[i][0] = i
    for j in range(lh + 1):
        dist[0][j] = j
    for i in range(1, lr + 1):
        r = ref[i - 1]
        row, prev = dist[i], dist[i - 1]
        for j in range(1, lh + 1):
            h = hyp[j - 1]
            if _alignable(r, h):
                diag = prev[j - 1] + (0 if (r.text == h.text and r.kind == h.kind) else 1)
            else:
                diag = big
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)
    matched = [False] * lh
    i, j = lr, lh
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and _alignable(ref[i - 1], hyp[j - 1]):
            same = (ref[i - 1].text == hyp[j - 1].text
                    and ref[i - 1].kind == hyp[j - 1].kind)
            if same and dist[i - 1][j - 1] == here:
                matched[j - 1] = True
                i, j = i - 1, j - 1
                continue
            if not same and dist[i - 1][j - 1] + 1 == here:
                i, j = i - 1, j - 1
                continue
        if i > 0 and dist[i - 1][j] + 1 == here:
            i -= 1
        else:
            j -= 1
    return matched


def _ref_ngram_index(ref: list[SuberToken], max_block: int) -> dict:
    index: dict[tuple, list[int]] = {}
    for length in range(1, max_block + 1):
        for p in range(len(ref) - length + 1):
            key = tuple((t.text, t.kind) for t in ref[p:p + length])
            index.setdefault(key, []).append(p)
    return index


def _pruned_candidates(ref: list[SuberToken], current: list[SuberToken],
                       matched: list[bool], index: dict, max_block: int):
    """Block moves worth trying on large inputs: the block must occur verbatim
    in the reference and contain at least one unmatched token; destinations
    near each reference occurrence."""
    n = len(current)
    cands = set()
    for start in range(n):
        any_unmatched = False
        for length in range(1, min(max_block, n - start) + 1):
            any_unmatched = any_unmatched or not matched[start + length - 1]
            if not any_unmatched:
                continue
            key = tuple((t.text, t.kind) for t in current[start:start + length])
            for p in index.get(key, ()):
                for dest in (p - 1, p, p + 1):
                    if 0 <= dest <= n - length and dest != start:
                        cands.add((start, length, dest))
    return sorted(cands)


def greedy_shifts(ref: list[SuberToken], hyp: list[SuberToken],
                  cfg: SuberConfig) -> tuple[list[SuberToken], int]:
    """Greedy TER shift search; each applied shift strictly reduces the
    remaining constrained edit distance, so the loop terminates.

    Every block move is considered when the hypothesis is short; on longer
    inputs the candidate set is pruned to blocks that occur verbatim in the
    reference (the classical TER heuristic), which keeps the search tractable
    without changing what a shift costs.
    """
    if not ref or not hyp:
        return list(hyp), 0
    adj = _adjacency(ref, hyp)
    perm = list(range(len(hyp)))
    lr = len(ref)
    dist = _chain_distance(lr, perm, adj)
    shifts = 0
    exhaustive = len(hyp) <= EXHAUSTIVE_SHIFT_LIMIT
    index = None if exhaustive else _ref_ngram_index(ref, cfg.max_shift_block)
    for _ in range(cfg.max_shift_iterations):
        if dist == 0:
            break
        if exhaustive:
            cands = shift_candidates(len(perm), cfg.max_shift_block)
        else:
            tokens_now = [hyp[oi] for oi in perm]
            matched = _matched_hyp_positions(ref, tokens_now)
            cands = _pruned_candidates(ref, tokens_now, matched, index,
                                       cfg.max_shift_block)
        best = None  # ((neg reduction, start, length, dest), perm, dist)
        for start, length, dest in cands:
            shifted = apply_shift(perm, start, length, dest)
            d = _chain_distance(lr, shifted, adj)
            reduction = dist - d
            if reduction >= 1:
                key = (-reduction, start, length, dest)
                if best is None or key < best[0]:
                    best = (key, shifted, d)
        if best is None:
            break
        perm, dist = best[1], best[2]
        shifts += 1
    return [hyp[oi] for oi in perm], shifts


@dataclass(frozen=True)
class SuberScore:
    word_edits: int
    break_edits: int
    shifts: int
    denom: int

    @property
    def score(self) -> float:
        return (self.word_edits + self.break_edits + self.shifts) / self.denom


def suber(ref: SubtitleFile, hyp: SubtitleFile,
          cfg: SuberConfig = SuberConfig()) -> SuberScore:
    """Subtitle edit rate of hyp against ref."""
    ref_tokens = tokenize(ref, cfg)
    if not ref_tokens:
        raise EmptyReference("reference subtitle file has no cues")
    hyp_tokens = tokenize(hyp, cfg)
    shifted, shifts = greedy_shifts(ref_tokens, hyp_tokens, cfg)
    word_edits, break_edits = _classify_edits(ref_tokens, shifted)
    return SuberScore(word_edits=word_edits, break_edits=break_edits,
                      shifts=shifts, denom=len(ref_tokens))
