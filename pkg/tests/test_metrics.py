import random

import pytest

from subqa.align import align_sentences, similarity
from subqa.errors import EmptyReference, ScorerFailure
from subqa.metrics import (LexicalScorer, ReadabilityLimits, SemanticScorer,
                           Violation, check_limits, readability, semantic_report,
                           wer, windowed_wer)
from subqa.model import Cue, SubtitleFile, TimeCode, TimedWord
from oracles import brute_edit_distance


def tw(text, start_ms, end_ms):
    return TimedWord(text=text, start=TimeCode(start_ms), end=TimeCode(end_ms))


# --- WER ---

def test_wer_example():
    b = wer(["la", "gatta", "bianca", "dorme"], ["la", "gatto", "bianca"])
    assert (b.substitutions, b.deletions, b.insertions, b.ref_len) == (1, 1, 0, 4)
    assert b.wer == 0.5


def test_wer_identity():
    assert wer(["a", "b"], ["a", "b"]).wer == 0.0


def test_wer_empty_hypothesis():
    b = wer(["a", "b", "c"], [])
    assert b.wer == 1.0 and b.deletions == 3


def test_wer_empty_reference():
    with pytest.raises(EmptyReference):
        wer([], ["a"])


def test_wer_matches_brute_force():
    rng = random.Random(3)
    for _ in range(300):
        ref = [rng.choice("abcd") for _ in range(rng.randrange(1, 7))]
        hyp = [rng.choice("abcd") for _ in range(rng.randrange(0, 7))]
        b = wer(ref, hyp)
        assert b.substitutions + b.deletions + b.insertions == \
            brute_edit_distance(tuple(ref), tuple(hyp))


# --- windowed WER ---

def test_window_boundary_is_half_open():
    ref = [tw("a", 59_800, 60_000), tw("b", 59_900, 60_100)]
    # midpoints 59,900 ms -> window 0 and 60,000 ms -> window 1
    result = windowed_wer(ref, ref)
    assert [r.ref_word_count for r in result.rows] == [1, 1]


def test_windowed_identical_streams():
    words = [tw(f"w{i}", i * 2000, i * 2000 + 500) for i in range(100)]
    result = windowed_wer(words, words)
    assert all(r.breakdown.wer == 0.0 for r in result.rows)


def test_windowed_one_substitution_in_second_window():
    ref = [tw("a", 1000, 2000), tw("b", 61_000, 62_000), tw("c", 63_000, 64_000)]
    hyp = [tw("a", 1000, 2000), tw("x", 61_000, 62_000), tw("c", 63_000, 64_000)]
    result = windowed_wer(ref, hyp)
    assert result.rows[0].breakdown.wer == 0.0
    assert result.rows[1].breakdown.wer == pytest.approx(1 / 2)


def test_empty_window_reports_unmatched_mass():
    ref = [tw("a", 1000, 2000)]
    hyp = [tw("a", 1000, 2000), tw("la", 70_000, 71_000), tw("la", 72_000, 73_000)]
    result = windowed_wer(ref, hyp)
    assert result.rows[1].breakdown is None
    assert result.rows[1].unmatched_hyp_words == 2


def test_window_partition_property():
    rng = random.Random(4)
    words = []
    t = 0
    for i in range(200):
        t += rng.randrange(200, 2000)
        words.append(tw(f"w{i}", t, t + 150))
        t += 150
    result = windowed_wer(words, [])
    total = sum(r.ref_word_count for r in result.rows)
    assert total == len(words)


# --- readability ---

def test_check_limits_boundaries():
    limits = ReadabilityLimits()
    cases = [
        (dict(ncs=29, msd=2.9, cps=10.0), {Violation.NCS_LOW}),
        (dict(ncs=30, msd=3.0, cps=10.0), set()),
        (dict(ncs=74, msd=5.0, cps=14.8), set()),
        (dict(ncs=75, msd=5.0, cps=15.0), {Violation.NCS_HIGH}),
        (dict(ncs=40, msd=0.9, cps=12.0), {Violation.MSD_LOW}),
        (dict(ncs=40, msd=1.0, cps=12.0), set()),
        (dict(ncs=60, msd=6.0, cps=10.0), set()),
        (dict(ncs=61, msd=6.1, cps=10.0), {Violation.MSD_HIGH}),
        (dict(ncs=45, msd=5.0, cps=8.9), {Violation.CPS_LOW}),
        (dict(ncs=45, msd=5.0, cps=9.0), set()),
        (dict(ncs=60, msd=4.0, cps=15.0), set()),
        (dict(ncs=60, msd=4.0, cps=15.1), {Violation.CPS_HIGH}),
    ]
    for values, expected in cases:
        assert check_limits(limits=limits, **values) == frozenset(expected), values


def test_readability_short_cue():
    f = SubtitleFile(cues=(Cue(1, TimeCode(0), TimeCode(2000), ("Ciao.",)),))
    row = readability(f).rows[0]
    assert (row.ncs, row.msd, row.cps) == (5, 2.0, 2.5)
    assert row.violations == frozenset({Violation.NCS_LOW, Violation.CPS_LOW})


def test_readability_compliant_cue():
    f = SubtitleFile(cues=(Cue(1, TimeCode(0), TimeCode(4000),
                               ("aaaaaaaaaaaaaaaaaaaaaaaa",
                                "aaaaaaaaaaaaaaaaaaaaaaaa")),))
    row = readability(f).rows[0]
    assert (row.ncs, row.cps) == (48, 12.0)
    assert row.violations == frozenset()


def test_readability_empty_file():
    report = readability(SubtitleFile(cues=()))
    assert report.rows == ()
    assert all(rate == 0.0 for rate in report.violation_rates().values())


def test_readability_flags_recomputable():
    rng = random.Random(6)
    cues = []
    t = 0
    for i in range(50):
        dur = rng.randrange(300, 8000)
        text = "x" * rng.randrange(1, 90)
        cues.append(Cue(i + 1, TimeCode(t), TimeCode(t + dur), (text,)))
        t += dur + 100
    report = readability(SubtitleFile(cues=tuple(cues)))
    for row in report.rows:
        assert row.violations == check_limits(row.ncs, row.msd, row.cps, report.limits)


# --- semantic ---

def test_semantic_identity_pairs():
    sents = ["Prima frase.", "Seconda frase."]
    pairing = align_sentences(sents, sents)
    report = semantic_report(pairing, len(sents), sents, sents)
    assert report.mean == 1.0
    assert all(s == 1.0 for _, _, s in report.pair_scores)


def test_semantic_unpaired_pulls_mean():
    ref = ["uno due tre", "quattro cinque sei", "sette otto nove"]
    hyp = ["uno due tre", "sette otto nove"]
    pairing = align_sentences(ref, hyp)
    report = semantic_report(pairing, len(ref), ref, hyp)
    assert len(report.unpaired_ref) == 1
    assert report.mean == pytest.approx(2 / 3)


def test_semantic_garbled_scores_lower():
    rng = random.Random(8)
    ref = ["la prima frase di esempio", "la seconda frase di esempio"]
    for _ in range(20):
        garbled = "".join(rng.choice("zqxkw ") for _ in range(20)).strip() or "z"
        hyp = [ref[0], garbled]
        pairing = align_sentences(ref, hyp)
        report = semantic_report(pairing, len(ref), ref, hyp)
        scores = dict(((r, h), s) for r, h, s in report.pair_scores)
        assert scores[(0, 0)] == 1.0
        if (1, 1) in scores:
            assert scores[(1, 1)] < 1.0


def test_scorer_failure_propagates_with_context():
    class Broken(SemanticScorer):
        def score(self, ref, hyp):
            raise RuntimeError("boom")

    pairing = align_sentences(["a"], ["a"])
    with pytest.raises(ScorerFailure):
        semantic_report(pairing, 1, ["a"], ["a"], scorer=Broken())


def test_lexical_scorer_is_similarity():
    assert LexicalScorer().score("abc", "abd") == similarity("abc", "abd")
