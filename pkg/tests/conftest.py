"""Shared fixture builders: synthetic episodes and the entity-review clip."""
from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from subqa.model import Cue, SubtitleFile, TimeCode, TimedWord
from subqa.segmenter import split_lines
from subqa.srt import emit_srt

WORD_POOL = (
    "il la un una governo legge clima misura nuova oggi domani sempre "
    "parlamento ministro regione città paese lavoro scuola salute economia "
    "ricerca scienza studio dati analisi programma servizio pubblico rete "
    "energia acqua terra mare montagna strada treno progetto futuro storia"
).split()


def build_cues_from_words(words: list[TimedWord], words_per_cue: int = 7,
                          max_line_chars: int = 37) -> SubtitleFile:
    cues = []
    idx = 0
    for i in range(0, len(words), words_per_cue):
        chunk = words[i:i + words_per_cue]
        text = " ".join(w.text for w in chunk)
        idx += 1
        cues.append(Cue(index=idx, start=chunk[0].start, end=chunk[-1].end,
                        lines=split_lines(text, max_line_chars)))
    return SubtitleFile(cues=tuple(cues))


def make_word_stream(rng: random.Random, n_words: int, start_ms: int = 0,
                     word_ms: int = 350, gap_ms: int = 100,
                     sentence_every: int = 8) -> list[TimedWord]:
    """Evenly timed words with periodic sentence-final punctuation."""
    words = []
    t = start_ms
    for i in range(n_words):
        text = rng.choice(WORD_POOL)
        if (i + 1) % sentence_every == 0 or i == n_words - 1:
            text += "."
        elif (i + 1) % sentence_every == 4:
            text += ","
        words.append(TimedWord(text=text, start=TimeCode(t), end=TimeCode(t + word_ms)))
        t += word_ms + gap_ms
    return words


def transcript_json(model_id: str, audio_id: str, duration_s: float,
                    segments: list[tuple[str, float, float, list[tuple[str, float, float]]]]) -> bytes:
    doc = {
        "model_id": model_id,
        "audio_id": audio_id,
        "audio_duration_s": duration_s,
        "segments": [
            {"text": text, "start_s": s, "end_s": e,
             "words": [{"text": wt, "start_s": ws, "end_s": we}
                       for wt, ws, we in words]}
            for text, s, e, words in segments
        ],
    }
    return json.dumps(doc, ensure_ascii=False).encode("utf-8")


def transcript_from_words(model_id: str, audio_id: str, duration_s: float,
                          words: list[TimedWord], words_per_segment: int = 7) -> bytes:
    segments = []
    for i in range(0, len(words), words_per_segment):
        chunk = words[i:i + words_per_segment]
        segments.append((
            " ".join(w.text for w in chunk),
            chunk[0].start.seconds, chunk[-1].end.seconds,
            [(w.text, w.start.seconds, w.end.seconds) for w in chunk],
        ))
    return transcript_json(model_id, audio_id, duration_s, segments)


def corrupt_words(rng: random.Random, words: list[TimedWord],
                  rate: float = 0.1) -> list[TimedWord]:
    out = []
    for w in words:
        if rng.random() < rate:
            out.append(TimedWord(text=rng.choice(WORD_POOL), start=w.start, end=w.end))
        else:
            out.append(w)
    return out


@pytest.fixture
def synthetic_episode(tmp_path: Path) -> dict:
    """A 3-minute episode: reference SRT, hypothesis transcript, entities,
    manifest. Hypothesis is mildly corrupted so metrics are non-trivial."""
    rng = random.Random(20260823)
    duration_s = 180.0
    words = make_word_stream(rng, 300, word_ms=350, gap_ms=250)  # ~180 s
    # plant entities at known times
    entity_plan = [(40, "Roma", "Location"), (120, "Mattarella", "Person"),
                   (250, "Rai", "Organization")]
    for pos, surface, _cat in entity_plan:
        old = words[pos]
        words[pos] = TimedWord(text=surface, start=old.start, end=old.end)

    ref = build_cues_from_words(words)
    ref_path = tmp_path / "reference.srt"
    ref_path.write_bytes(emit_srt(ref))

    hyp_words = corrupt_words(rng, words, rate=0.08)
    # keep the planted entities intact in the hypothesis
    for pos, surface, _cat in entity_plan:
        old = hyp_words[pos]
        hyp_words[pos] = TimedWord(text=surface, start=old.start, end=old.end)
    hyp_path = tmp_path / "hyp_modelA.json"
    hyp_path.write_bytes(transcript_from_words("modelA", "ep1", duration_s, hyp_words))

    ents_path = tmp_path / "entities.jsonl"
    lines = [json.dumps({"surface": surface, "category": cat,
                         "anchor_s": round(words[pos].midpoint_ms / 1000, 3),
                         "episode_id": "ep1"}, ensure_ascii=False)
             for pos, surface, cat in entity_plan]
    ents_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "episodes": [{
            "episode_id": "ep1",
            "typology": "TalkShow",
            "reference": "reference.srt",
            "hypotheses": {"modelA": "hyp_modelA.json"},
            "entities": "entities.jsonl",
            "audio_duration_s": duration_s,
        }],
    }), encoding="utf-8")
    return {"dir": tmp_path, "manifest": manifest, "reference": ref_path,
            "hypothesis": hyp_path, "entities": ents_path,
            "words": words, "hyp_words": hyp_words}


# --- entity-correction clip (before/after review) ---

CLIP_REFERENCE = (
    "E' sicuramente una grandissima operazione, sicuramente abbiamo azzerato "
    "i vertici della 'ndrangheta della provincia di Vibo Valentia, oltre 13 "
    "locali in provincia di Vibo Valentia che erano ramificati in tutta Italia."
)

CLIP_RAW_HYP = (
    "Sicuramente è una grandissima operazione, sicuramente abbiamo azzerato "
    "i vertici dell'Andrangheta della provincia di Vibo-Valenzia. Oltre 12-13 "
    "locali di Andrangheta in provincia di Vibo-Valenzia che avevano "
    "ramificazioni in tutta Italia."
)

CLIP_REVIEWED_HYP = (
    "Sicuramente è una grandissima operazione, sicuramente abbiamo azzerato "
    "i vertici dell''ndrangheta della provincia di Vibo Valentia. Oltre 12-13 "
    "locali di ndrangheta in provincia di Vibo Valentia che avevano "
    "ramificazioni in tutta Italia."
)


def clip_transcript(text: str, model_id: str) -> bytes:
    """Lay the clip's words out evenly over ~16 seconds of audio."""
    tokens = text.split()
    word_s = 0.5
    segments = []
    words = [(tok, round(i * word_s, 3), round(i * word_s + 0.4, 3))
             for i, tok in enumerate(tokens)]
    segments.append((text, 0.0, round(len(tokens) * word_s, 3), words))
    return transcript_json(model_id, "clip", len(tokens) * word_s + 1, segments)


def clip_entities() -> list[dict]:
    """Reference entities anchored at their position in the reference text."""
    tokens = CLIP_REFERENCE.split()
    word_s = 0.5

    def anchor(index: int) -> float:
        return round(index * word_s + 0.2, 3)

    entries = []
    entries.append({"surface": "'ndrangheta", "category": "Organization",
                    "anchor_s": anchor(tokens.index("'ndrangheta"))})
    first_vibo = tokens.index("Vibo")
    entries.append({"surface": "Vibo Valentia", "category": "Location",
                    "anchor_s": anchor(first_vibo)})
    second_vibo = tokens.index("Vibo", first_vibo + 1)
    entries.append({"surface": "Vibo Valentia", "category": "Location",
                    "anchor_s": anchor(second_vibo)})
    entries.append({"surface": "Italia", "category": "Location",
                    "anchor_s": anchor(len(tokens) - 1)})
    return entries
