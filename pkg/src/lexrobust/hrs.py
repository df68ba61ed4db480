"""Human Recognition Scores from listener transcripts and synonym-pair differences.

HRS of a stimulus is the share of its responses judged correct; the
difference between the two members of a synonym pair (``diff_hrs``) is the
recognition gain available by choosing the better one.
"""

from __future__ import annotations

import csv
import math
import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean
from typing import Iterable, Sequence

from .audio import NoiseCondition
from .lexicon import PronunciationLexicon, SynonymPairRecord, normalize_word, phonetic_match
from .regression import t_pvalue

PLACEHOLDER = "..."
SINGLE_WORD = "single_word"
IN_CONTEXT = "in_context"

RESPONSE_FIELDS = ("stimulus_id", "participant_id", "target", "condition_snr_db", "noise_id", "transcript")


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class ResponseRecord:
    stimulus_id: str
    target: str
    condition: NoiseCondition
    participant_id: str
    transcript: str


@dataclass(frozen=True)
class StimulusScore:
    stimulus_id: str
    target: str
    condition: NoiseCondition
    n_correct: int
    n_total: int

    def __post_init__(self):
        if self.n_total < 1 or not 0 <= self.n_correct <= self.n_total:
            raise AnalysisError(
                f"stimulus {self.stimulus_id}: invalid counts {self.n_correct}/{self.n_total}"
            )

    @property
    def hrs(self) -> float:
        return self.n_correct / self.n_total


@dataclass(frozen=True)
class PairComparison:
    pair_id: str
    condition: NoiseCondition
    word_a: str
    word_b: str
    hrs_a: float
    hrs_b: float

    @property
    def diff_hrs(self) -> float:
        return abs(self.hrs_a - self.hrs_b)

    @property
    def hrs_min(self) -> float:
        return min(self.hrs_a, self.hrs_b)

    @property
    def hrs_max(self) -> float:
        return max(self.hrs_a, self.hrs_b)

    @property
    def tie(self) -> bool:
        return self.hrs_a == self.hrs_b

    @property
    def winner(self) -> str:
        return self.word_b if self.hrs_b > self.hrs_a else self.word_a


# -- judging -----------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\.{3}|[^\s.]+(?:\.[^\s.]+)*")


def transcript_tokens(transcript: str) -> list[str]:
    """Lowercased word tokens; the ``...`` placeholder and punctuation are dropped."""
    tokens = []
    for raw in _TOKEN_RE.findall(transcript):
        if raw == PLACEHOLDER:
            continue
        word = normalize_word(raw)
        if word:
            tokens.append(word)
    return tokens


def judge_response(
    lexicon: PronunciationLexicon, target: str, transcript: str, mode: str = IN_CONTEXT
) -> bool:
    """Whether a transcript counts as recognising ``target``.

    In single-word mode the whole transcript is one response word; in context
    mode the target only has to appear somewhere in the transcript.
    """
    tokens = transcript_tokens(transcript)
    if not tokens:
        return False
    if mode == SINGLE_WORD:
        return phonetic_match(lexicon, target, " ".join(tokens))
    if mode == IN_CONTEXT:
        return any(phonetic_match(lexicon, target, tok) for tok in tokens)
    raise ValueError(f"unknown mode {mode!r}")


def compute_hrs(
    records: Sequence[ResponseRecord], lexicon: PronunciationLexicon, mode: str = IN_CONTEXT
) -> list[StimulusScore]:
    """One score per (stimulus, condition), in first-seen order."""
    if not records:
        raise AnalysisError("no response records")
    seen: set[tuple[str, str]] = set()
    groups: dict[tuple[str, NoiseCondition], list[ResponseRecord]] = defaultdict(list)
    for rec in records:
        key = (rec.stimulus_id, rec.participant_id)
        if key in seen:
            raise AnalysisError(
                f"duplicate response from participant {rec.participant_id} to stimulus {rec.stimulus_id}"
            )
        seen.add(key)
        groups[(rec.stimulus_id, rec.condition)].append(rec)

    scores = []
    for (sid, cond), recs in groups.items():
        targets = {normalize_word(r.target) for r in recs}
        if len(targets) != 1:
            raise AnalysisError(f"stimulus {sid} has conflicting targets {sorted(targets)}")
        correct = sum(judge_response(lexicon, r.target, r.transcript, mode) for r in recs)
        scores.append(StimulusScore(sid, recs[0].target, cond, correct, len(recs)))
    return scores


def _find_score(scores_by_cond: dict, pair: SynonymPairRecord, word: str, cond: NoiseCondition):
    in_cond = scores_by_cond.get(cond, [])
    for s in in_cond:
        if s.stimulus_id == f"{pair.pair_id}:{word}":
            return s
    matches = [s for s in in_cond if normalize_word(s.target) == normalize_word(word)]
    if len(matches) == 1:
        return matches[0]
    if not matches:
        raise AnalysisError(
            f"pair {pair.pair_id}: no score for {word!r} at SNR {cond.snr_db:g} ({cond.noise_id})"
        )
    raise AnalysisError(
        f"pair {pair.pair_id}: {len(matches)} stimuli with target {word!r} at SNR {cond.snr_db:g}; "
        f"name them '{pair.pair_id}:{word}'"
    )


def compare_pairs(
    scores: Sequence[StimulusScore],
    pairs: Sequence[SynonymPairRecord],
    conditions: Iterable[NoiseCondition] | None = None,
) -> list[PairComparison]:
    """Pair up member scores per condition.

    A member's stimulus is the one with id ``"<pair_id>:<word>"`` if present,
    otherwise the unique stimulus whose target is that word.
    """
    by_cond: dict[NoiseCondition, list[StimulusScore]] = defaultdict(list)
    for s in scores:
        by_cond[s.condition].append(s)
    conds = list(conditions) if conditions is not None else sorted(
        by_cond, key=lambda c: (-c.snr_db, c.noise_id)
    )
    out = []
    for cond in conds:
        for pair in pairs:
            a = _find_score(by_cond, pair, pair.word_a, cond)
            b = _find_score(by_cond, pair, pair.word_b, cond)
            out.append(PairComparison(pair.pair_id, cond, pair.word_a, pair.word_b, a.hrs, b.hrs))
    return out


# -- per-condition summaries ------------------------------------------------------

@dataclass(frozen=True)
class PairedTest:
    statistic: float
    df: int
    p_value: float
    mean_difference: float
    n: int


@dataclass(frozen=True)
class ConditionSummary:
    condition: NoiseCondition
    count: int
    mean_hrs: float
    mean_diff_hrs: float | None
    mean_hrs_min: float | None
    mean_hrs_max: float | None
    test: PairedTest | None


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> PairedTest:
    """Two-sided paired t-test of ``a - b``.

    With zero spread the statistic is 0 (p = 1) for a zero mean difference and
    infinite (p = 0) otherwise.
    """
    if len(a) != len(b):
        raise AnalysisError("paired samples differ in length")
    n = len(a)
    if n < 2:
        raise AnalysisError("paired t-test needs at least 2 pairs")
    d = [x - y for x, y in zip(a, b)]
    mean = fmean(d)
    var = sum((v - mean) ** 2 for v in d) / (n - 1)
    if var == 0.0:
        t = 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
    else:
        t = mean / math.sqrt(var / n)
    return PairedTest(t, n - 1, t_pvalue(t, n - 1), mean, n)


def _keyed_values(items, condition: NoiseCondition) -> dict[str, float]:
    out = {}
    for it in items:
        if it.condition != condition:
            continue
        if isinstance(it, PairComparison):
            out[it.pair_id] = it.diff_hrs
        else:
            out[it.stimulus_id] = it.hrs
    return out


def condition_summary(
    items: Sequence[StimulusScore] | Sequence[PairComparison],
    condition: NoiseCondition,
    baseline: NoiseCondition | None = None,
) -> ConditionSummary:
    """Means for one condition and, given ``baseline``, a paired t-test against it.

    Stimulus scores are paired by ``stimulus_id`` (on HRS), pair comparisons
    by ``pair_id`` (on diff_hrs).
    """
    chosen = [it for it in items if it.condition == condition]
    if len(chosen) < 2:
        raise AnalysisError(
            f"condition SNR {condition.snr_db:g} has {len(chosen)} data point(s); need at least 2"
        )
    if isinstance(chosen[0], PairComparison):
        mean_hrs = fmean(h for c in chosen for h in (c.hrs_a, c.hrs_b))
        mean_diff = fmean(c.diff_hrs for c in chosen)
        mean_min = fmean(c.hrs_min for c in chosen)
        mean_max = fmean(c.hrs_max for c in chosen)
    else:
        mean_hrs = fmean(s.hrs for s in chosen)
        mean_diff = mean_min = mean_max = None

    test = None
    if baseline is not None:
        here = _keyed_values(items, condition)
        there = _keyed_values(items, baseline)
        keys = [k for k in here if k in there]
        test = paired_t_test([here[k] for k in keys], [there[k] for k in keys])
    return ConditionSummary(condition, len(chosen), mean_hrs, mean_diff, mean_min, mean_max, test)


# -- CSV interchange ----------------------------------------------------------------

def load_responses(path: str | Path) -> list[ResponseRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(RESPONSE_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise AnalysisError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
        for row in reader:
            try:
                snr = float(row["condition_snr_db"])
                cond = NoiseCondition(snr, row["noise_id"].strip() or "babble")
            except ValueError as exc:
                raise AnalysisError(f"{path}:{reader.line_num}: bad condition ({exc})") from None
            records.append(
                ResponseRecord(
                    row["stimulus_id"].strip(),
                    row["target"].strip(),
                    cond,
                    row["participant_id"].strip(),
                    row["transcript"] or "",
                )
            )
    return records


SCORE_FIELDS = ("stimulus_id", "target", "condition_snr_db", "noise_id", "n_correct", "n_total", "hrs")
COMPARISON_FIELDS = (
    "pair_id", "condition_snr_db", "noise_id", "word_a", "word_b",
    "hrs_a", "hrs_b", "diff_hrs", "hrs_min", "hrs_max", "winner", "tie",
)


def score_rows(scores: Iterable[StimulusScore]) -> list[dict]:
    return [
        {"stimulus_id": s.stimulus_id, "target": s.target, "condition_snr_db": f"{s.condition.snr_db:g}",
         "noise_id": s.condition.noise_id, "n_correct": s.n_correct, "n_total": s.n_total,
         "hrs": repr(s.hrs)}
        for s in scores
    ]


def comparison_rows(comparisons: Iterable[PairComparison]) -> list[dict]:
    return [
        {"pair_id": c.pair_id, "condition_snr_db": f"{c.condition.snr_db:g}",
         "noise_id": c.condition.noise_id, "word_a": c.word_a, "word_b": c.word_b,
         "hrs_a": repr(c.hrs_a), "hrs_b": repr(c.hrs_b), "diff_hrs": repr(c.diff_hrs),
         "hrs_min": repr(c.hrs_min), "hrs_max": repr(c.hrs_max), "winner": c.winner,
         "tie": int(c.tie)}
        for c in comparisons
    ]


def load_comparisons(path: str | Path) -> list[PairComparison]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"pair_id", "condition_snr_db", "word_a", "word_b", "hrs_a", "hrs_b"} - set(
            reader.fieldnames or ()
        )
        if missing:
            raise AnalysisError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
        for row in reader:
            try:
                cond = NoiseCondition(float(row["condition_snr_db"]), (row.get("noise_id") or "babble").strip())
                out.append(PairComparison(row["pair_id"], cond, row["word_a"], row["word_b"],
                                          float(row["hrs_a"]), float(row["hrs_b"])))
            except ValueError as exc:
                raise AnalysisError(f"{path}:{reader.line_num}: {exc}") from None
    return out
