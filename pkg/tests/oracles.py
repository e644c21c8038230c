"""Independent brute-force oracles used to validate the metric implementations.

Each oracle deliberately avoids the code path it checks: recursive edit
scripts instead of the iterative DP, breadth-first shift search instead of
the greedy heuristic, full enumeration instead of closed forms.
"""
from __future__ import annotations

import heapq
import itertools
from functools import lru_cache

from subqa.suber import SuberToken, apply_shift, constrained_distance, shift_candidates


def brute_edit_distance(a: tuple, b: tuple) -> int:
    """Minimum cost over all edit scripts, by recursive enumeration."""

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(
            go(i + 1, j + 1) + (0 if a[i] == b[j] else 1),
            go(i + 1, j) + 1,
            go(i, j + 1) + 1,
        )

    return go(0, 0)


def brute_suber_cost(ref: list[SuberToken], hyp: list[SuberToken],
                     max_block: int = 10) -> int:
    """Minimum (#shifts + constrained edit distance) over all shift sequences.

    Breadth-first search over hypothesis permutations reachable by block
    shifts; safe for small instances only.
    """
    start = tuple(hyp)
    best = constrained_distance(ref, list(start))
    seen = {start: 0}
    heap = [(0, 0, start)]
    tick = itertools.count()
    while heap:
        shifts, _, state = heapq.heappop(heap)
        if shifts >= best:  # a further shift cannot improve on best
            break
        if shifts > seen.get(state, shifts):
            continue
        for s, l, dest in shift_candidates(len(state), max_block):
            nxt = tuple(apply_shift(list(state), s, l, dest))
            cost = shifts + 1
            if cost < seen.get(nxt, cost + 1):
                seen[nxt] = cost
                d = constrained_distance(ref, list(nxt))
                best = min(best, cost + d)
                heapq.heappush(heap, (cost, next(tick), nxt))
    return best


def brute_monotone_pairing_cost(ref: list[str], hyp: list[str], sim) -> float:
    """Minimum cost over all monotone pairings: unpaired cost 1, paired cost
    1 - sim(r, h)."""
    lr, lh = len(ref), len(hyp)
    best = float("inf")
    # choose k paired indices on each side, matched in order
    for k in range(min(lr, lh) + 1):
        for ref_idx in itertools.combinations(range(lr), k):
            for hyp_idx in itertools.combinations(range(lh), k):
                cost = (lr - k) + (lh - k)
                cost += sum(1.0 - sim(ref[i], hyp[j])
                            for i, j in zip(ref_idx, hyp_idx))
                best = min(best, cost)
    return best


def enumerate_segmentations(n: int):
    """All ways to cut positions 1..n-1 of an n-word stream."""
    for mask in range(2 ** (n - 1)):
        bounds = []
        start = 0
        for pos in range(1, n):
            if mask >> (pos - 1) & 1:
                bounds.append((start, pos))
                start = pos
        bounds.append((start, n))
        yield bounds


def wilcoxon_enumeration(deltas: list[float], alternative: str) -> float:
    """Exact p-value by full enumeration of the 2^n sign assignments."""
    from scipy.stats import rankdata

    nonzero = [d for d in deltas if d != 0]
    n = len(nonzero)
    ranks = rankdata([abs(d) for d in nonzero])
    w = sum(r for r, d in zip(ranks, nonzero) if d > 0)
    eps = 1e-9
    le = ge = 0
    for mask in range(2 ** n):
        wm = sum(ranks[i] for i in range(n) if mask >> i & 1)
        if wm <= w + eps:
            le += 1
        if wm >= w - eps:
            ge += 1
    p_le, p_ge = le / 2 ** n, ge / 2 ** n
    if alternative == "less":
        return p_le
    if alternative == "greater":
        return p_ge
    return min(1.0, 2 * min(p_le, p_ge))
