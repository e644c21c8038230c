#!/usr/bin/env python3
"""Generate a synthetic episode for local experiments.

Writes a reference SRT, one or more corrupted hypothesis transcripts, entity
annotations and a corpus manifest into the output directory. The hypothesis
texture mimics ASR output: word-level timestamps, occasional substitutions,
intact named entities.
"""
import argparse
import json
import random
from pathlib import Path

from subqa.model import TimedWord, TimeCode
from subqa.segmenter import split_lines
from subqa.model import Cue, SubtitleFile
from subqa.srt import emit_srt

WORD_POOL = (
    "il la un una governo legge clima misura nuova oggi domani sempre "
    "parlamento ministro regione città paese lavoro scuola salute economia "
    "ricerca scienza studio dati analisi programma servizio pubblico rete "
    "energia acqua terra mare montagna strada treno progetto futuro storia"
).split()

ENTITY_PLAN = [("Roma", "Location"), ("Mattarella", "Person"), ("Rai", "Organization")]


def word_stream(rng, n_words, word_ms=350, gap_ms=250):
    words, t = [], 0
    for i in range(n_words):
        text = rng.choice(WORD_POOL)
        if (i + 1) % 8 == 0 or i == n_words - 1:
            text += "."
        elif (i + 1) % 8 == 4:
            text += ","
        words.append(TimedWord(text=text, start=TimeCode(t), end=TimeCode(t + word_ms)))
        t += word_ms + gap_ms
    return words


def cues_from(words, per_cue=7):
    cues = []
    for k, i in enumerate(range(0, len(words), per_cue)):
        chunk = words[i:i + per_cue]
        text = " ".join(w.text for w in chunk)
        cues.append(Cue(index=k + 1, start=chunk[0].start, end=chunk[-1].end,
                        lines=split_lines(text, 37)))
    return SubtitleFile(cues=tuple(cues))


def transcript_doc(model_id, audio_id, duration_s, words, per_segment=7):
    segments = []
    for i in range(0, len(words), per_segment):
        chunk = words[i:i + per_segment]
        segments.append({
            "text": " ".join(w.text for w in chunk),
            "start_s": chunk[0].start.seconds, "end_s": chunk[-1].end.seconds,
            "words": [{"text": w.text, "start_s": w.start.seconds,
                       "end_s": w.end.seconds} for w in chunk]})
    return {"model_id": model_id, "audio_id": audio_id,
            "audio_duration_s": duration_s, "segments": segments}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--words", type=int, default=300)
    ap.add_argument("--models", default="modelA,modelB")
    ap.add_argument("--error-rate", type=float, default=0.08)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    words = word_stream(rng, args.words)
    duration_s = round(words[-1].end.seconds + 1.0, 3)
    entity_positions = sorted(rng.sample(range(5, args.words - 5), len(ENTITY_PLAN)))
    for pos, (surface, _cat) in zip(entity_positions, ENTITY_PLAN):
        old = words[pos]
        words[pos] = TimedWord(text=surface, start=old.start, end=old.end)

    (out / "reference.srt").write_bytes(emit_srt(cues_from(words)))

    hypotheses = {}
    for model in args.models.split(","):
        hyp = []
        for i, w in enumerate(words):
            if i not in entity_positions and rng.random() < args.error_rate:
                hyp.append(TimedWord(text=rng.choice(WORD_POOL), start=w.start, end=w.end))
            else:
                hyp.append(w)
        path = out / f"hyp_{model}.json"
        path.write_text(json.dumps(transcript_doc(model, "ep1", duration_s, hyp),
                                   ensure_ascii=False, indent=1), encoding="utf-8")
        hypotheses[model] = path.name

    with open(out / "entities.jsonl", "w", encoding="utf-8") as fh:
        for pos, (surface, cat) in zip(entity_positions, ENTITY_PLAN):
            fh.write(json.dumps({
                "surface": surface, "category": cat,
                "anchor_s": round(words[pos].midpoint_ms / 1000, 3),
                "episode_id": "ep1"}, ensure_ascii=False) + "\n")

    (out / "manifest.json").write_text(json.dumps({
        "episodes": [{"episode_id": "ep1", "typology": "TalkShow",
                      "reference": "reference.srt", "hypotheses": hypotheses,
                      "entities": "entities.jsonl",
                      "audio_duration_s": duration_s}]}, indent=1),
        encoding="utf-8")
    print(f"wrote episode ({args.words} words, {duration_s:.0f} s) to {out}")


if __name__ == "__main__":
    main()
