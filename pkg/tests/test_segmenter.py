import random

import pytest

from subqa.errors import InfeasibleSegment, Unsplittable
from subqa.metrics import readability
from subqa.model import TimeCode, TimedWord
from subqa.segmenter import (BreakStrength, SegmenterConfig, classify_gap,
                             segment, segmentation_penalty, split_lines)
from conftest import make_word_stream
from oracles import enumerate_segmentations


def tw(text, start_ms, end_ms):
    return TimedWord(text=text, start=TimeCode(start_ms), end=TimeCode(end_ms))


# --- gap classification ---

def test_classify_gap_strengths():
    cases = [
        ("finita.", BreakStrength.SENTENCE_FINAL),
        ("davvero?", BreakStrength.SENTENCE_FINAL),
        ("pausa,", BreakStrength.CLAUSE),
        ("prima:", BreakStrength.CLAUSE),
        ("e", BreakStrength.CONJUNCTION),
        ("però", BreakStrength.CONJUNCTION),
        ("casa", BreakStrength.ANY),
    ]
    nxt = tw("dopo", 1000, 1300)
    for text, expected in cases:
        bp = classify_gap(tw(text, 0, 900), nxt, 1)
        assert bp.strength is expected, text


def test_classify_gap_sees_through_closing_quote():
    bp = classify_gap(tw('fine."', 0, 900), tw("Poi", 1000, 1300), 1)
    assert bp.strength is BreakStrength.SENTENCE_FINAL


def test_classify_gap_silence():
    bp = classify_gap(tw("a", 0, 500), tw("b", 2100, 2400), 1)
    assert bp.silence_ms == 1600


# --- line layout ---

def test_split_lines_short_text_single_line():
    assert split_lines("breve", 37) == ("breve",)


def test_split_lines_prefers_punctuation():
    text = "prima parte finisce qui. seconda parte"
    left, right = split_lines(text, 37)
    assert left == "prima parte finisce qui."
    assert right == "seconda parte"


def test_split_lines_falls_back_to_midpoint():
    text = "una frase senza punteggiatura interna da dividere"
    left, right = split_lines(text, 37)
    assert max(len(left), len(right)) <= 37
    assert f"{left} {right}" == text
    # nearest-to-midpoint whitespace among feasible ones
    best = min((abs(len(text[:k]) - len(text) / 2), k)
               for k in range(len(text)) if text[k] == " "
               if len(text[:k]) <= 37 and len(text) - k - 1 <= 37)
    assert len(left) == best[1]


def test_split_lines_unsplittable():
    with pytest.raises(Unsplittable):
        split_lines("x" * 80, 37)


# --- segmentation ---

def test_single_short_utterance_is_one_cue():
    words = [tw("ciao", 0, 400), tw("a", 500, 700), tw("tutti.", 800, 1400)]
    f = segment(words)
    assert len(f.cues) == 1
    assert f.cues[0].text == "ciao a tutti."


def test_forced_split_at_long_silence():
    words = [tw("prima", 0, 500), tw("parte", 600, 1100),
             tw("seconda", 2800, 3300), tw("parte", 3400, 3900)]
    f = segment(words)
    assert len(f.cues) == 2
    assert f.cues[0].end.millis == 1100 and f.cues[1].start.millis == 2800


def test_no_split_below_silence_threshold():
    words = [tw("prima", 0, 500), tw("parte", 600, 1100),
             tw("stessa", 2500, 3000), tw("frase", 3100, 3600)]
    f = segment(words)
    assert len(f.cues) == 1


def test_hard_limits_never_violated():
    rng = random.Random(21)
    for _ in range(10):
        words = make_word_stream(rng, 120, word_ms=350, gap_ms=rng.choice([250, 350, 450]))
        f = segment(words)
        report = readability(f)
        for row in report.rows:
            assert row.ncs <= 74 and row.msd <= 6.0 and row.cps <= 15.0
        for cue in f.cues:
            assert all(len(line) <= 37 for line in cue.lines)
        # every input word survives, in order
        out = " ".join(c.text for c in f.cues).split()
        assert out == [w.text for w in words]


def test_infeasible_single_word():
    words = [tw("supercalifragilistico" * 4, 0, 1000)]
    with pytest.raises(InfeasibleSegment) as exc:
        segment(words)
    assert exc.value.word is not None


def test_empty_stream_rejected():
    with pytest.raises(ValueError):
        segment([])


def test_cue_timings_match_word_extents():
    rng = random.Random(23)
    words = make_word_stream(rng, 60, gap_ms=300)
    f = segment(words)
    pos = 0
    for cue in f.cues:
        k = len(cue.text.split())
        assert cue.start == words[pos].start
        assert cue.end == words[pos + k - 1].end
        pos += k
    assert pos == len(words)


def test_dp_matches_exhaustive_minimum():
    rng = random.Random(29)
    cfg = SegmenterConfig()
    for _ in range(25):
        n = rng.randrange(2, 9)
        words = make_word_stream(rng, n, word_ms=rng.choice([250, 400]),
                                 gap_ms=rng.choice([100, 300, 1600]),
                                 sentence_every=rng.choice([3, 5, 8]))
        feasible = [segmentation_penalty(words, bounds, cfg)
                    for bounds in enumerate_segmentations(n)]
        costs = [c for c in feasible if c is not None]
        try:
            f = segment(words, cfg)
        except InfeasibleSegment:
            assert not costs
            continue
        bounds = []
        pos = 0
        for cue in f.cues:
            k = len(cue.text.split())
            bounds.append((pos, pos + k))
            pos += k
        got = segmentation_penalty(words, bounds, cfg)
        assert got is not None
        assert got == pytest.approx(min(costs))


def test_prefers_sentence_final_boundary():
    # two sentences that fit as either one long cue or two clean cues
    words = [tw("la", 0, 200), tw("prima", 300, 700), tw("frase", 800, 1300),
             tw("finisce.", 1400, 2000),
             tw("la", 2100, 2300), tw("seconda", 2400, 2900),
             tw("frase", 3000, 3500), tw("continua", 3600, 4200)]
    f = segment(words)
    boundary_texts = [c.text.split()[-1] for c in f.cues[:-1]]
    assert all(t.endswith(".") for t in boundary_texts)
