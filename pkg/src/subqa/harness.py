"""Corpus evaluation runner, RTFx/cost models and report emission.

A run spec (manifest) lists episodes with their reference SRT, per-model
hypothesis transcripts and optional entity annotations. Episodes are
evaluated independently: a corrupt file produces an error row, never an
aborted run. Output is deterministic: identical inputs give byte-identical
CSV.
"""
from __future__ import annotations

import enum
import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import align, entities, metrics, suber
from .errors import MissingRtfx, NonPositiveDuration, SpecInvalid
from .model import Cue, SubtitleFile, Transcript
from .srt import parse_srt
from .transcript import parse_transcript, reference_words, transcript_words

ALL_METRICS = ("wer", "suber", "eer", "readability", "semantic")


class Typology(enum.Enum):
    TALK_SHOW = "TalkShow"
    INVESTIGATIVE_JOURNALISM = "InvestigativeJournalism"
    SCIENTIFIC_COMMUNICATION = "ScientificCommunication"


@dataclass(frozen=True)
class EpisodeSpec:
    episode_id: str
    typology: Typology
    reference: Path
    hypotheses: dict  # model_id -> transcript path
    entities_path: Path | None = None
    audio_duration_s: float | None = None


@dataclass(frozen=True)
class CorpusRunSpec:
    episodes: tuple[EpisodeSpec, ...]
    metric_toggles: tuple[str, ...] = ALL_METRICS
    eer_config: entities.EerConfig = field(default_factory=entities.EerConfig)


def load_run_spec(path: Path | str,
                  metric_toggles: tuple[str, ...] | None = None) -> CorpusRunSpec:
    """Load and validate a manifest; paths are resolved relative to it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecInvalid(f"cannot read manifest {path}: {exc}") from None
    base = path.parent
    episodes = []
    seen = set()
    for ep in doc.get("episodes", []):
        try:
            episode_id = ep["episode_id"]
            typology = Typology(ep["typology"])
            reference = (base / ep["reference"]).resolve()
            hypotheses = {m: (base / p).resolve() for m, p in ep["hypotheses"].items()}
        except (KeyError, ValueError, TypeError) as exc:
            raise SpecInvalid(f"bad episode entry: {exc}") from None
        if episode_id in seen:
            raise SpecInvalid(f"duplicate episode_id {episode_id!r}")
        seen.add(episode_id)
        ents = ep.get("entities")
        spec = EpisodeSpec(
            episode_id=episode_id, typology=typology, reference=reference,
            hypotheses=hypotheses,
            entities_path=(base / ents).resolve() if ents else None,
            audio_duration_s=ep.get("audio_duration_s"))
        for p in (spec.reference, *spec.hypotheses.values(),
                  *( [spec.entities_path] if spec.entities_path else [] )):
            if not Path(p).exists():
                raise SpecInvalid(f"episode {episode_id!r}: missing file {p}")
        episodes.append(spec)
    toggles = tuple(metric_toggles if metric_toggles is not None
                    else doc.get("metrics", ALL_METRICS))
    for t in toggles:
        if t not in ALL_METRICS:
            raise SpecInvalid(f"unknown metric toggle {t!r}")
    return CorpusRunSpec(episodes=tuple(episodes), metric_toggles=toggles)


@dataclass(frozen=True)
class ReportRow:
    episode_id: str
    typology: str
    model_id: str
    wer: float | None = None
    suber: float | None = None
    eer: float | None = None
    semantic_mean: float | None = None
    ncs_low_rate: float | None = None
    ncs_high_rate: float | None = None
    msd_low_rate: float | None = None
    msd_high_rate: float | None = None
    cps_low_rate: float | None = None
    cps_high_rate: float | None = None
    window_wer_min: float | None = None
    window_wer_max: float | None = None


@dataclass(frozen=True)
class RowError:
    episode_id: str
    model_id: str
    message: str


@dataclass(frozen=True)
class MetricsReport:
    rows: tuple[ReportRow, ...]
    errors: tuple[RowError, ...] = ()

    def aggregates(self) -> list[dict]:
        """Mean of each metric per (typology, model); recomputable from rows."""
        groups: dict[tuple[str, str], list[ReportRow]] = {}
        for row in self.rows:
            groups.setdefault((row.typology, row.model_id), []).append(row)
        out = []
        for (typology, model), rows in sorted(groups.items()):
            agg = {"typology": typology, "model_id": model, "episodes": len(rows)}
            for name in ("wer", "suber", "eer", "semantic_mean"):
                values = [getattr(r, name) for r in rows if getattr(r, name) is not None]
                agg[f"mean_{name}"] = sum(values) / len(values) if values else None
            out.append(agg)
        return out


def hypothesis_cues(transcript: Transcript) -> SubtitleFile:
    """View a transcript's segments as subtitle cues (raw ASR layout)."""
    cues = []
    idx = 0
    for seg in transcript.segments:
        text = " ".join(seg.text.split())
        if not text:
            continue
        idx += 1
        cues.append(Cue(index=idx, start=seg.start, end=seg.end, lines=(text,)))
    return SubtitleFile(cues=tuple(cues), source_label=transcript.model_id)


def evaluate_pair(episode: EpisodeSpec, model_id: str, hyp_path: Path,
                  toggles: tuple[str, ...],
                  eer_config: entities.EerConfig) -> ReportRow:
    """All requested metrics for one (episode, model) pair."""
    ref = parse_srt(Path(episode.reference).read_bytes())
    hyp = parse_transcript(Path(hyp_path).read_bytes())
    ref_text = " ".join(c.text for c in ref.cues)
    hyp_text = " ".join(s.text for s in hyp.segments)
    values: dict = {}

    if "wer" in toggles:
        ref_tokens = align.normalize(ref_text)
        hyp_tokens = align.normalize(hyp_text)
        values["wer"] = metrics.wer(ref_tokens, hyp_tokens).wer
        windowed = metrics.windowed_wer(reference_words(ref), transcript_words(hyp))
        defined = windowed.defined_wers()
        if defined:
            values["window_wer_min"] = min(defined)
            values["window_wer_max"] = max(defined)

    hyp_file = hypothesis_cues(hyp)
    if "suber" in toggles:
        values["suber"] = suber.suber(ref, hyp_file).score
    if "readability" in toggles:
        rates = metrics.readability(hyp_file).violation_rates()
        values["ncs_low_rate"] = rates[metrics.Violation.NCS_LOW]
        values["ncs_high_rate"] = rates[metrics.Violation.NCS_HIGH]
        values["msd_low_rate"] = rates[metrics.Violation.MSD_LOW]
        values["msd_high_rate"] = rates[metrics.Violation.MSD_HIGH]
        values["cps_low_rate"] = rates[metrics.Violation.CPS_LOW]
        values["cps_high_rate"] = rates[metrics.Violation.CPS_HIGH]
    if "semantic" in toggles:
        ref_sentences = align.split_sentences(ref_text)
        hyp_sentences = align.split_sentences(hyp_text)
        pairing = align.align_sentences(ref_sentences, hyp_sentences)
        values["semantic_mean"] = metrics.semantic_report(
            pairing, len(ref_sentences), ref_sentences, hyp_sentences).mean
    if "eer" in toggles and episode.entities_path is not None:
        refs = entities.load_entities(Path(episode.entities_path).read_bytes())
        if refs:
            values["eer"] = entities.eer(refs, hyp, eer_config).eer

    return ReportRow(episode_id=episode.episode_id, typology=episode.typology.value,
                     model_id=model_id, **values)


def run_corpus(spec: CorpusRunSpec, jobs: int = 1) -> MetricsReport:
    """Evaluate every (episode, model) pair; failures isolate per row."""
    pairs = [(ep, model, path)
             for ep in spec.episodes
             for model, path in sorted(ep.hypotheses.items())]

    def one(pair) -> tuple[ReportRow | None, RowError | None]:
        ep, model, path = pair
        try:
            return evaluate_pair(ep, model, path, spec.metric_toggles,
                                 spec.eer_config), None
        except Exception as exc:
            return None, RowError(episode_id=ep.episode_id, model_id=model,
                                  message=f"{type(exc).__name__}: {exc}")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]

    rows = [r for r, _ in results if r is not None]
    errors = [e for _, e in results if e is not None]
    rows.sort(key=lambda r: (r.episode_id, r.model_id))
    errors.sort(key=lambda e: (e.episode_id, e.model_id))
    return MetricsReport(rows=tuple(rows), errors=tuple(errors))


# --- RTFx and cost ---

@dataclass(frozen=True)
class RtfxStat:
    audio_duration_s: float
    processing_duration_s: float

    @property
    def rtfx(self) -> float:
        return self.audio_duration_s / self.processing_duration_s


def rtfx(audio_s: float, processing_s: float) -> RtfxStat:
    """Inverse real-time factor: audio duration over processing duration."""
    if audio_s <= 0 or processing_s <= 0:
        raise NonPositiveDuration(
            f"durations must be positive: audio={audio_s}, processing={processing_s}")
    return RtfxStat(audio_duration_s=audio_s, processing_duration_s=processing_s)


class CostKind(enum.Enum):
    PER_COMPUTE_HOUR = "PerComputeHour"
    PER_AUDIO_HOUR = "PerAudioHour"


@dataclass(frozen=True)
class CostModel:
    kind: CostKind
    rate_usd_per_hour: float

    def __post_init__(self):
        if self.rate_usd_per_hour <= 0:
            raise ValueError("rate must be positive")


def cost(audio_s: float, model: CostModel, stats: RtfxStat | None = None) -> float:
    """Estimated USD cost of processing audio_s seconds of audio.

    PerAudioHour charges by input audio time; PerComputeHour charges by
    compute time derived from the measured RTFx.
    """
    audio_hours = audio_s / 3600.0
    if model.kind is CostKind.PER_AUDIO_HOUR:
        return audio_hours * model.rate_usd_per_hour
    if stats is None:
        raise MissingRtfx("PerComputeHour cost needs an RtfxStat")
    return audio_hours / stats.rtfx * model.rate_usd_per_hour


# --- report emission ---

CSV_COLUMNS = ("episode_id", "typology", "model_id", "wer", "suber", "eer",
               "semantic_mean", "ncs_low_rate", "ncs_high_rate", "msd_low_rate",
               "msd_high_rate", "cps_low_rate", "cps_high_rate",
               "window_wer_min", "window_wer_max")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def rows_to_csv(rows, columns) -> str:
    lines = [",".join(columns)]
    for row in rows:
        get = row.get if isinstance(row, dict) else lambda c, r=row: getattr(r, c)
        lines.append(",".join(_fmt(get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def boxplot_stats(values: list[float]) -> dict:
    """Five-number summary with linear-interpolation (inclusive) quartiles and
    1.5*IQR whiskers."""
    if not values:
        raise ValueError("no values")
    values = sorted(values)
    if len(values) == 1:
        q1 = median = q3 = values[0]
    else:
        q1, median, q3 = statistics.quantiles(values, n=4, method="inclusive")
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = [v for v in values if lo_fence <= v <= hi_fence]
    return {"min": values[0], "q1": q1, "median": median, "q3": q3,
            "max": values[-1],
            "whisker_low": min(inside), "whisker_high": max(inside)}


def emit_report(report: MetricsReport, out_dir: Path | str,
                plots_dir: Path | str | None = None,
                review_deltas: list[float] | None = None) -> list[Path]:
    """Write metrics.csv, aggregates.csv, errors.csv and optional plot data.

    Plot data: per-metric boxplot quartiles by typology x model, and the
    sorted per-episode delta series for the review-gain figure.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    path = out_dir / "metrics.csv"
    path.write_bytes(rows_to_csv(report.rows, CSV_COLUMNS).encode("utf-8"))
    written.append(path)

    agg_columns = ("typology", "model_id", "episodes", "mean_wer", "mean_suber",
                   "mean_eer", "mean_semantic_mean")
    path = out_dir / "aggregates.csv"
    path.write_bytes(rows_to_csv(report.aggregates(), agg_columns).encode("utf-8"))
    written.append(path)

    if report.errors:
        path = out_dir / "errors.csv"
        path.write_bytes(rows_to_csv(
            report.errors, ("episode_id", "model_id", "message")).encode("utf-8"))
        written.append(path)

    if plots_dir is not None:
        plots_dir = Path(plots_dir)
        plots_dir.mkdir(parents=True, exist_ok=True)
        box_columns = ("typology", "model_id", "min", "q1", "median", "q3", "max",
                       "whisker_low", "whisker_high")
        for metric in ("wer", "suber", "eer"):
            groups: dict[tuple[str, str], list[float]] = {}
            for row in report.rows:
                value = getattr(row, metric)
                if value is not None:
                    groups.setdefault((row.typology, row.model_id), []).append(value)
            box_rows = []
            for (typology, model), values in sorted(groups.items()):
                box_rows.append({"typology": typology, "model_id": model,
                                 **boxplot_stats(values)})
            if box_rows:
                path = plots_dir / f"boxplot_{metric}.csv"
                path.write_bytes(rows_to_csv(box_rows, box_columns).encode("utf-8"))
                written.append(path)
        if review_deltas is not None:
            path = plots_dir / "review_gain.csv"
            lines = ["delta"] + [_fmt(d) for d in sorted(review_deltas)]
            path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
            written.append(path)
    return written
