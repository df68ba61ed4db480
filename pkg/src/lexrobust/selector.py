"""Per-pair feature extraction and noise-robust synonym choice.

Features are always computed for a *hypothesis*: one word assumed to be the
better-recognised member (``winner``) and the other its ``alternative``.
``diff.*`` features are winner minus alternative. At selection time the true
winner is unknown, so both hypotheses are scored and the one with the larger
predicted diff.HRS wins.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .audio import AudioSignal, NoiseCondition
from .lexicon import PronunciationLexicon, SynonymPairRecord, normalize_word, phoneme_length
from .lm import NgramModel
from .regression import INTERCEPT, FitResult
from .stoi import compute_stoi

FEATURE_NAMES = ("log.prob", "diff.log.prob", "ph.len", "diff.ph.len", "STOI", "diff.STOI")
STOI_FEATURES = frozenset({"STOI", "diff.STOI"})
TIE_TOL = 1e-9
MODELS_FORMAT = "lexrobust-condition-models"


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    log_prob: float
    diff_log_prob: float
    ph_len: int
    diff_ph_len: int
    stoi: float | None = None
    diff_stoi: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return dict(zip(FEATURE_NAMES, (self.log_prob, self.diff_log_prob, self.ph_len,
                                        self.diff_ph_len, self.stoi, self.diff_stoi)))


@dataclass(frozen=True)
class WordAudio:
    """Clean and noisy recordings of one utterance and the target word's sample span."""

    clean: AudioSignal
    noisy: AudioSignal
    span: tuple[int, int] | None = None

    def target_pair(self) -> tuple[AudioSignal, AudioSignal]:
        if self.span is None:
            return self.clean, self.noisy
        start, stop = self.span
        return self.clean.segment(start, stop), self.noisy.segment(start, stop)

    @cached_property
    def stoi(self) -> float:
        return compute_stoi(*self.target_pair())


@dataclass(frozen=True)
class ConditionModel:
    """Linear diff.HRS model valid for SNRs in ``[snr_low, snr_high)``."""

    snr_low: float
    snr_high: float
    coefficients: Mapping[str, float]
    provenance: str = "fitted"
    label: str = ""

    def __post_init__(self):
        if not self.snr_low < self.snr_high:
            raise SelectionError(f"empty SNR band [{self.snr_low}, {self.snr_high})")
        unknown = set(self.coefficients) - set(FEATURE_NAMES) - {INTERCEPT}
        if unknown:
            raise SelectionError(f"unknown model term(s): {', '.join(sorted(unknown))}")
        object.__setattr__(self, "coefficients", dict(self.coefficients))

    def covers(self, snr_db: float) -> bool:
        return self.snr_low <= snr_db < self.snr_high

    @property
    def uses_stoi(self) -> bool:
        return bool(STOI_FEATURES & set(self.coefficients))

    def scaled(self, c: float) -> "ConditionModel":
        return ConditionModel(self.snr_low, self.snr_high,
                              {k: c * v for k, v in self.coefficients.items()},
                              self.provenance, self.label)

    @classmethod
    def from_fit(cls, fit: FitResult, snr_low: float, snr_high: float, label: str = "") -> "ConditionModel":
        return cls(snr_low, snr_high, fit.params, "fitted", label)

    def to_dict(self) -> dict:
        band = [None if math.isinf(self.snr_low) else self.snr_low,
                None if math.isinf(self.snr_high) else self.snr_high]
        return {"label": self.label, "snr_band": band, "provenance": self.provenance,
                "coefficients": dict(self.coefficients)}


def snr_band_for(snr_db: float) -> tuple[float, float]:
    """Band of the nearest tested condition (5, 0 or -5 dB)."""
    if snr_db >= 2.5:
        return 2.5, math.inf
    if snr_db >= -2.5:
        return -2.5, 2.5
    return -math.inf, -2.5


def check_partition(models: Sequence[ConditionModel]) -> None:
    bands = sorted((m.snr_low, m.snr_high) for m in models)
    if not bands or bands[0][0] != -math.inf or bands[-1][1] != math.inf:
        raise SelectionError("model SNR bands must cover the whole real line")
    for (_, hi), (lo, _) in zip(bands, bands[1:]):
        if hi != lo:
            raise SelectionError(f"model SNR bands overlap or leave a gap at {hi} / {lo}")


def parse_models(payload: Mapping) -> list[ConditionModel]:
    if payload.get("format", MODELS_FORMAT) != MODELS_FORMAT:
        raise SelectionError(f"not a condition-model file (format {payload.get('format')!r})")
    entries = payload["models"] if isinstance(payload, Mapping) else payload
    models = []
    for e in entries:
        lo, hi = e["snr_band"]
        models.append(ConditionModel(
            -math.inf if lo is None else float(lo),
            math.inf if hi is None else float(hi),
            {k: float(v) for k, v in e["coefficients"].items()},
            e.get("provenance", "fitted"),
            e.get("label", ""),
        ))
    check_partition(models)
    return models


def load_models(path: str | Path) -> list[ConditionModel]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if isinstance(payload, list):
        payload = {"models": payload}
    return parse_models(payload)


def save_models(models: Sequence[ConditionModel], path: str | Path) -> None:
    check_partition(models)
    payload = {"format": MODELS_FORMAT, "version": 1, "models": [m.to_dict() for m in models]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def canonical_models() -> list[ConditionModel]:
    """The bundled babble-noise reference models, one per SNR band (coefficients p < 0.05 only)."""
    text = resources.files("lexrobust").joinpath("data/canonical_models.json").read_text(encoding="utf-8")
    return parse_models(json.loads(text))


def model_for(models: Sequence[ConditionModel], snr_db: float) -> ConditionModel:
    hits = [m for m in models if m.covers(snr_db)]
    if len(hits) != 1:
        raise SelectionError(f"{len(hits)} models cover SNR {snr_db:g} dB; need exactly one")
    return hits[0]


def extract_features(
    pair: SynonymPairRecord,
    candidate_order: tuple[str, str],
    lm: NgramModel,
    lexicon: PronunciationLexicon,
    audio: Mapping[str, WordAudio] | None = None,
) -> FeatureVector:
    """Feature vector for ``candidate_order = (winner hypothesis, alternative)``.

    STOI features are filled only when ``audio`` has entries for both words.
    """
    winner, alt = candidate_order
    context = pair.left_context()
    lp_w, lp_a = lm.log_prob(winner, context), lm.log_prob(alt, context)
    len_w, len_a = phoneme_length(lexicon, winner), phoneme_length(lexicon, alt)

    stoi_w = diff_stoi = None
    if audio is not None:
        audio = {normalize_word(k): v for k, v in audio.items()}
        try:
            a_w, a_a = audio[normalize_word(winner)], audio[normalize_word(alt)]
        except KeyError as exc:
            raise SelectionError(f"pair {pair.pair_id}: no audio for {exc.args[0]!r}") from None
        stoi_w = a_w.stoi
        diff_stoi = stoi_w - a_a.stoi
    return FeatureVector(lp_w, lp_w - lp_a, len_w, len_w - len_a, stoi_w, diff_stoi)


def predict_diff_hrs(features: FeatureVector, model: ConditionModel) -> float:
    values = features.as_dict()
    total = model.coefficients.get(INTERCEPT, 0.0)
    for name, beta in model.coefficients.items():
        if name == INTERCEPT:
            continue
        v = values[name]
        if v is None:
            raise SelectionError(f"model {model.label or ''} needs feature {name} but it is missing")
        total += beta * v
    return total


@dataclass(frozen=True)
class Decision:
    pair_id: str
    condition: NoiseCondition
    chosen: str
    alternative: str
    predicted_gain: float
    tie: bool
    features: FeatureVector
    predictions: Mapping[str, float] = field(default_factory=dict)
    model_label: str = ""


def choose(
    pair: SynonymPairRecord,
    condition: NoiseCondition,
    models: Sequence[ConditionModel],
    lm: NgramModel,
    lexicon: PronunciationLexicon,
    audio: Mapping[str, WordAudio] | None = None,
) -> Decision:
    """Pick the synonym with the larger predicted recognition gain.

    Predictions closer than 1e-9 count as a tie and return ``word_a``.
    """
    return choose_words(pair, pair.word_a, pair.word_b, condition, models, lm, lexicon, audio)


def choose_words(
    pair: SynonymPairRecord,
    word_a: str,
    word_b: str,
    condition: NoiseCondition,
    models: Sequence[ConditionModel],
    lm: NgramModel,
    lexicon: PronunciationLexicon,
    audio: Mapping[str, WordAudio] | None = None,
) -> Decision:
    """:func:`choose` for an explicit word pair in ``pair``'s context.

    Unlike a :class:`SynonymPairRecord`, the two words may coincide.
    """
    model = model_for(models, condition.snr_db)
    if model.uses_stoi and audio is None:
        raise SelectionError(
            f"pair {pair.pair_id}: model {model.label!r} uses STOI but no audio was supplied"
        )
    feats_a = extract_features(pair, (word_a, word_b), lm, lexicon, audio)
    feats_b = extract_features(pair, (word_b, word_a), lm, lexicon, audio)
    pred_a, pred_b = predict_diff_hrs(feats_a, model), predict_diff_hrs(feats_b, model)

    tie = abs(pred_a - pred_b) < TIE_TOL
    if tie or pred_a > pred_b:
        chosen, alt, gain, feats = word_a, word_b, pred_a, feats_a
    else:
        chosen, alt, gain, feats = word_b, word_a, pred_b, feats_b
    return Decision(pair.pair_id, condition, chosen, alt, gain, tie, feats,
                    {word_a: pred_a, word_b: pred_b}, model.label)
