import math

import pytest
from hypothesis import given, strategies as st

from lexrobust.audio import NoiseCondition
from lexrobust.hrs import (
    SINGLE_WORD, AnalysisError, PairComparison, ResponseRecord, StimulusScore,
    compare_pairs, comparison_rows, compute_hrs, condition_summary, judge_response,
    load_comparisons, load_responses, paired_t_test, transcript_tokens,
)
from lexrobust.lexicon import SynonymPairRecord

C5, C0, CM5 = NoiseCondition(5.0), NoiseCondition(0.0), NoiseCondition(-5.0)


def test_judge_in_context_examples(lexicon):
    assert judge_response(lexicon, "ocean", "and he runs away scared and dives into the ocean")
    assert not judge_response(lexicon, "ocean", "and he dives into the ...")
    assert not judge_response(lexicon, "ocean", "")
    assert judge_response(lexicon, "sea", "He dived into the SEE!")


def test_judge_single_word(lexicon):
    assert judge_response(lexicon, "sea", "see", SINGLE_WORD)
    assert judge_response(lexicon, "sea", " Sea. ", SINGLE_WORD)
    assert not judge_response(lexicon, "sea", "tea", SINGLE_WORD)
    assert not judge_response(lexicon, "sea", "...", SINGLE_WORD)
    # a whole phrase is one (wrong) response word
    assert not judge_response(lexicon, "sea", "the sea", SINGLE_WORD)


def test_judge_unknown_mode(lexicon):
    with pytest.raises(ValueError):
        judge_response(lexicon, "sea", "sea", "fuzzy")


def test_tokens_drop_placeholder_and_punctuation():
    assert transcript_tokens("And he ... dives, into the SEA...") == ["and", "he", "dives", "into", "the", "sea"]
    assert transcript_tokens("...") == []


@given(st.permutations(["and", "he", "dives", "into", "the", "ocean", "..."]))
def test_in_context_order_invariant(words):
    from lexrobust.lexicon import default_lexicon
    assert judge_response(default_lexicon(), "ocean", " ".join(words))


def _records(sid, target, cond, transcripts):
    return [ResponseRecord(sid, target, cond, f"u{i}", t) for i, t in enumerate(transcripts)]


@pytest.mark.parametrize("transcripts,expected", [
    (["sea", "see", "sea", "tea", "me"], 0.6),
    (["sea"] * 5, 1.0),
    (["..."] * 6, 0.0),
])
def test_compute_hrs_examples(lexicon, transcripts, expected):
    (score,) = compute_hrs(_records("s1", "sea", C0, transcripts), lexicon, SINGLE_WORD)
    assert score.hrs == expected
    assert score.n_total == len(transcripts)


def test_compute_hrs_groups_by_condition(lexicon):
    recs = _records("s1", "sea", C5, ["sea", "sea"]) + [
        ResponseRecord("s1", "sea", C0, "u9", "tea")
    ]
    scores = {s.condition: s for s in compute_hrs(recs, lexicon)}
    assert scores[C5].hrs == 1.0 and scores[C0].hrs == 0.0


def test_compute_hrs_errors(lexicon):
    with pytest.raises(AnalysisError, match="no response"):
        compute_hrs([], lexicon)
    dup = _records("s1", "sea", C0, ["sea"]) * 2
    with pytest.raises(AnalysisError, match="duplicate"):
        compute_hrs(dup, lexicon)
    conflict = [ResponseRecord("s1", "sea", C0, "u1", "x"), ResponseRecord("s1", "ocean", C0, "u2", "x")]
    with pytest.raises(AnalysisError, match="conflicting"):
        compute_hrs(conflict, lexicon)


def test_stimulus_score_invariants():
    with pytest.raises(AnalysisError):
        StimulusScore("s", "sea", C0, 3, 2)
    with pytest.raises(AnalysisError):
        StimulusScore("s", "sea", C0, 0, 0)


def _cmp(a, b, cond=C0, pid="p"):
    return PairComparison(pid, cond, "sea", "ocean", a, b)


def test_pair_comparison_examples():
    c = _cmp(0.97, 0.69)
    assert c.diff_hrs == pytest.approx(0.28, abs=1e-12)
    assert c.winner == "sea" and not c.tie
    c = _cmp(0.77, 0.37)
    assert c.diff_hrs == pytest.approx(0.40, abs=1e-12)
    assert (c.hrs_min, c.hrs_max, c.winner) == (0.37, 0.77, "sea")
    c = _cmp(0.5, 0.5)
    assert c.diff_hrs == 0 and c.tie and c.winner == "sea"
    assert _cmp(0.2, 0.9).winner == "ocean"


@given(st.fractions(0, 1), st.fractions(0, 1))
def test_diff_symmetric_and_bounded(a, b):
    a, b = float(a), float(b)
    x, y = _cmp(a, b), _cmp(b, a)
    assert x.diff_hrs == y.diff_hrs
    assert 0 <= x.diff_hrs <= 1
    assert x.hrs_min <= x.hrs_max


def test_compare_pairs_matching_rules():
    pair = SynonymPairRecord("p1", "sea", "ocean", "the {TARGET}")
    scores = [
        StimulusScore("p1:sea", "sea", C0, 4, 5),
        StimulusScore("x", "ocean", C0, 1, 5),
        StimulusScore("other", "sea", C0, 0, 5),
    ]
    (c,) = compare_pairs(scores, [pair])
    assert (c.hrs_a, c.hrs_b) == (0.8, 0.2)


def test_compare_pairs_missing_or_ambiguous():
    pair = SynonymPairRecord("p1", "sea", "ocean", "the {TARGET}")
    with pytest.raises(AnalysisError, match="no score for 'ocean'"):
        compare_pairs([StimulusScore("a", "sea", C0, 1, 2)], [pair])
    two = [StimulusScore("a", "sea", C0, 1, 2), StimulusScore("b", "sea", C0, 1, 2),
           StimulusScore("c", "ocean", C0, 1, 2)]
    with pytest.raises(AnalysisError, match="2 stimuli"):
        compare_pairs(two, [pair])
    with pytest.raises(AnalysisError, match="no score"):
        compare_pairs(two[2:], [pair], conditions=[C5])


def test_paired_t_all_equal():
    t = paired_t_test([0.3] * 10, [0.3] * 10)
    assert (t.statistic, t.p_value) == (0.0, 1.0)


def test_paired_t_constant_shift():
    base = [i / 40 for i in range(30)]
    t = paired_t_test([b + 0.25 for b in base], base)
    assert t.mean_difference == pytest.approx(0.25, abs=1e-12)
    assert t.p_value < 1e-6
    assert t.df == 29


def test_paired_t_reference_value():
    # closed form: d = (1, 2, 3, 4), mean 2.5, sd sqrt(5/3), t = 2.5 / sqrt(5/12)
    t = paired_t_test([1, 2, 3, 4], [0, 0, 0, 0])
    assert t.statistic == pytest.approx(2.5 / math.sqrt(5 / 12), rel=1e-12)
    assert t.p_value == pytest.approx(0.030466291662171, rel=1e-9)  # scipy.stats.ttest_rel


def test_paired_t_errors():
    with pytest.raises(AnalysisError):
        paired_t_test([1.0], [1.0])
    with pytest.raises(AnalysisError):
        paired_t_test([1.0, 2.0], [1.0])


def test_condition_summary_comparisons():
    comps = [_cmp(0.9, 0.7, C5, "a"), _cmp(0.8, 0.8, C5, "b"),
             _cmp(0.9, 0.3, CM5, "a"), _cmp(0.7, 0.2, CM5, "b")]
    s = condition_summary(comps, CM5, baseline=C5)
    assert s.count == 2
    assert s.mean_diff_hrs == pytest.approx(0.55)
    assert s.mean_hrs_min == pytest.approx(0.25) and s.mean_hrs_max == pytest.approx(0.8)
    assert s.test.mean_difference == pytest.approx(0.45)
    with pytest.raises(AnalysisError, match="need at least 2"):
        condition_summary(comps[:1], C5)


def test_condition_summary_scores():
    scores = [StimulusScore("a", "sea", C0, 3, 6), StimulusScore("b", "ocean", C0, 6, 6)]
    s = condition_summary(scores, C0)
    assert s.mean_hrs == 0.75 and s.mean_diff_hrs is None and s.test is None


def test_csv_round_trips(tmp_path, lexicon):
    import csv
    path = tmp_path / "responses.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["stimulus_id", "participant_id", "target", "condition_snr_db", "noise_id", "transcript"])
        w.writerow(["s1", "u1", "sea", "5", "babble", "dives into the see, ..."])
        w.writerow(["s1", "u2", "sea", "5", "babble", ""])
    recs = load_responses(path)
    assert recs[0].condition == C5 and recs[1].transcript == ""
    assert compute_hrs(recs, lexicon)[0].hrs == 0.5

    comps = [_cmp(0.97, 0.69, C0, "p1"), _cmp(0.1, 0.3, CM5, "p2")]
    out = tmp_path / "cmp.csv"
    rows = comparison_rows(comps)
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    assert load_comparisons(out) == comps


def test_load_responses_missing_column(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("stimulus_id,target\ns1,sea\n")
    with pytest.raises(AnalysisError, match="missing column"):
        load_responses(p)
