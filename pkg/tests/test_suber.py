import random

import pytest

from subqa.errors import EmptyReference
from subqa.model import Cue, SubtitleFile, TimeCode
from subqa.suber import (SuberConfig, SuberToken, TokenKind, constrained_distance,
                         suber, tokenize)
from oracles import brute_suber_cost


def make_file(spec):
    """spec: list of (start_ms, end_ms, lines)."""
    cues = tuple(Cue(i + 1, TimeCode(s), TimeCode(e), tuple(lines))
                 for i, (s, e, lines) in enumerate(spec))
    return SubtitleFile(cues=cues)


def test_tokenize_breaks_and_spans():
    f = make_file([(0, 2000, ("a b", "c")), (2500, 4000, ("d",))])
    toks = tokenize(f)
    assert [(t.text, t.kind) for t in toks] == [
        ("a", TokenKind.WORD), ("b", TokenKind.WORD), ("<eol>", TokenKind.EOL),
        ("c", TokenKind.WORD), ("<eob>", TokenKind.EOB),
        ("d", TokenKind.WORD), ("<eob>", TokenKind.EOB)]
    assert toks[0].span == (0, 2000) and toks[5].span == (2500, 4000)


def test_tokenize_case_fold_toggle():
    f = make_file([(0, 1000, ("Ciao",))])
    assert tokenize(f)[0].text == "ciao"
    assert tokenize(f, SuberConfig(case_fold=False))[0].text == "Ciao"


def test_identity_scores_zero():
    f = make_file([(0, 2000, ("a b",)), (2500, 4000, ("c", "d"))])
    s = suber(f, f)
    assert (s.word_edits, s.break_edits, s.shifts) == (0, 0, 0)
    assert s.score == 0.0


def test_single_substitution():
    ref = make_file([(0, 2000, ("a b",))])
    hyp = make_file([(0, 2000, ("a c",))])
    s = suber(ref, hyp)
    assert (s.word_edits, s.break_edits, s.shifts, s.denom) == (1, 0, 0, 3)
    assert s.score == pytest.approx(1 / 3)


def test_missing_line_break_is_break_edit():
    ref = make_file([(0, 2000, ("a", "b"))])
    hyp = make_file([(0, 2000, ("a b",))])
    s = suber(ref, hyp)
    assert (s.word_edits, s.break_edits) == (0, 1)
    assert s.score == pytest.approx(1 / 4)


def test_empty_reference_raises():
    hyp = make_file([(0, 1000, ("a",))])
    with pytest.raises(EmptyReference):
        suber(SubtitleFile(cues=()), hyp)


def test_empty_hypothesis_scores_one():
    ref = make_file([(0, 2000, ("a b c",))])
    assert suber(ref, SubtitleFile(cues=())).score == 1.0


def test_no_time_overlap_blocks_matching():
    ref = make_file([(0, 1000, ("a",))])
    hyp = make_file([(5000, 6000, ("a",))])
    s = suber(ref, hyp)
    # identical text but disjoint spans: everything is delete + insert
    assert s.word_edits + s.break_edits == 4
    assert s.shifts == 0
    assert s.score == 2.0


def test_shift_restores_word_order():
    ref = make_file([(0, 4000, ("a b c d",))])
    hyp = make_file([(0, 4000, ("b c d a",))])
    s = suber(ref, hyp)
    assert (s.word_edits, s.break_edits, s.shifts, s.denom) == (0, 0, 1, 5)
    assert s.score == pytest.approx(1 / 5)


def test_shift_applied_only_when_it_pays():
    ref = make_file([(0, 4000, ("a b",))])
    hyp = make_file([(0, 4000, ("b a",))])
    s = suber(ref, hyp)
    # swapping costs one shift, same as one sub + nothing saved? A shift
    # turning "b a" into "a b" removes two edits for the cost of one.
    assert s.word_edits + s.break_edits + s.shifts <= 2


def test_constrained_distance_equals_plain_when_all_overlap():
    span = (0, 10_000)
    ref = [SuberToken(t, TokenKind.WORD, span) for t in "kitten"]
    hyp = [SuberToken(t, TokenKind.WORD, span) for t in "sitting"]
    assert constrained_distance(ref, hyp) == 3


def test_total_cost_matches_exhaustive_search():
    rng = random.Random(13)
    for _ in range(60):
        n_ref = rng.randrange(1, 6)
        n_hyp = rng.randrange(0, 6)
        span = (0, 10_000)
        ref = [SuberToken(rng.choice("abc"), TokenKind.WORD, span) for _ in range(n_ref)]
        hyp = [SuberToken(rng.choice("abc"), TokenKind.WORD, span) for _ in range(n_hyp)]
        from subqa.suber import _classify_edits, greedy_shifts
        shifted, shifts = greedy_shifts(ref, hyp, SuberConfig())
        w, b = _classify_edits(ref, shifted)
        assert w + b + shifts == brute_suber_cost(ref, hyp)


def test_total_cost_matches_exhaustive_with_disjoint_spans():
    rng = random.Random(17)
    for _ in range(40):
        spans = [(0, 5000), (5000, 10_000)]
        ref = [SuberToken(rng.choice("ab"), TokenKind.WORD, rng.choice(spans))
               for _ in range(rng.randrange(1, 5))]
        hyp = [SuberToken(rng.choice("ab"), TokenKind.WORD, rng.choice(spans))
               for _ in range(rng.randrange(0, 5))]
        from subqa.suber import _classify_edits, greedy_shifts
        shifted, shifts = greedy_shifts(ref, hyp, SuberConfig())
        w, b = _classify_edits(ref, shifted)
        assert w + b + shifts == brute_suber_cost(ref, hyp)


def test_score_never_negative_and_bounded_by_worst_case():
    rng = random.Random(19)
    for _ in range(30):
        ref = make_file([(0, 4000, (" ".join(rng.choice("abcd")
                                             for _ in range(rng.randrange(1, 6))),))])
        hyp = make_file([(0, 4000, (" ".join(rng.choice("abcd")
                                             for _ in range(rng.randrange(1, 6))),))])
        s = suber(ref, hyp)
        assert s.score >= 0.0
        # never worse than deleting every ref token and inserting every hyp token
        worst = len(tokenize(ref)) + len(tokenize(hyp))
        assert s.word_edits + s.break_edits + s.shifts <= worst
