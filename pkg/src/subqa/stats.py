"""Paired significance testing for before/after metric deltas.

Wilcoxon signed-rank test: exact null distribution (via the rank-sum
generating function, which handles midranks from ties) for n <= 25, normal
approximation with continuity and tie correction above. Zero deltas are
dropped per standard practice.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .errors import TooFewSamples

EXACT_LIMIT = 25
MIN_SAMPLES = 5


@dataclass(frozen=True)
class PairedTestResult:
    n: int
    statistic: float  # W+ : sum of ranks of positive deltas
    p_value: float
    mean_delta: float
    method: str  # "exact" or "normal"


def _midranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def _exact_cdf_counts(double_ranks: list[int]) -> Counter:
    """Distribution of 2*W+ over all sign assignments (counts per value)."""
    dist = Counter({0: 1})
    for r in double_ranks:
        nxt = Counter()
        for value, count in dist.items():
            nxt[value] += count
            nxt[value + r] += count
        dist = nxt
    return dist


def wilcoxon_signed_rank(deltas: list[float],
                         alternative: str = "two-sided") -> PairedTestResult:
    """Wilcoxon signed-rank test on paired deltas.

    alternative: "two-sided", "less" (deltas shifted negative) or "greater".
    """
    if alternative not in ("two-sided", "less", "greater"):
        raise ValueError(f"unknown alternative {alternative!r}")
    nonzero = [d for d in deltas if d != 0]
    if len(nonzero) < MIN_SAMPLES:
        raise TooFewSamples(
            f"need >= {MIN_SAMPLES} nonzero deltas, got {len(nonzero)}")
    n = len(nonzero)
    ranks = _midranks([abs(d) for d in nonzero])
    w_plus = sum(r for r, d in zip(ranks, nonzero) if d > 0)
    mean_delta = sum(deltas) / len(deltas)

    if n <= EXACT_LIMIT:
        double_ranks = [round(2 * r) for r in ranks]
        dist = _exact_cdf_counts(double_ranks)
        total = 2 ** n
        w2 = round(2 * w_plus)
        p_le = sum(c for v, c in dist.items() if v <= w2) / total
        p_ge = sum(c for v, c in dist.items() if v >= w2) / total
        method = "exact"
    else:
        mu = n * (n + 1) / 4
        tie_counts = Counter(ranks).values()
        var = n * (n + 1) * (2 * n + 1) / 24 - sum(t ** 3 - t for t in tie_counts) / 48
        sd = math.sqrt(var)
        p_le = _norm_cdf((w_plus - mu + 0.5) / sd)
        p_ge = 1.0 - _norm_cdf((w_plus - mu - 0.5) / sd)
        method = "normal"

    if alternative == "less":
        p = p_le
    elif alternative == "greater":
        p = p_ge
    else:
        p = min(1.0, 2 * min(p_le, p_ge))
    return PairedTestResult(n=n, statistic=w_plus, p_value=p,
                            mean_delta=mean_delta, method=method)


def _norm_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
