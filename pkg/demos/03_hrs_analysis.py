"""
From listener transcripts to recognition differences
====================================================

Simulates a small listening experiment (six listeners per stimulus and SNR),
scores each transcript, and summarises the synonym-pair differences per
condition.
"""

from pathlib import Path

import numpy as np

from lexrobust.hrs import compare_pairs, compute_hrs, judge_response
from lexrobust.lexicon import default_lexicon, load_pairs
from lexrobust.report import report
from lexrobust.synth import simulate_responses

DATA = Path(__file__).parent / "data"
lexicon = default_lexicon()

# Presence of the target anywhere in the transcript counts as recognised
print(judge_response(lexicon, "ocean", "and he runs away scared and dives into the ocean"))
print(judge_response(lexicon, "ocean", "and he dives into the ..."))

pairs = load_pairs(DATA / "pairs.csv")
records = simulate_responses(pairs, [5, 0, -5], np.random.default_rng(7))
print(f"\n{len(records)} simulated responses")

scores = compute_hrs(records, lexicon)
comparisons = compare_pairs(scores, pairs)
for c in comparisons[:4]:
    print(f"{c.pair_id} SNR {c.condition.snr_db:+g}: {c.word_a} {c.hrs_a:.2f} vs {c.word_b} {c.hrs_b:.2f}"
          f" -> diff {c.diff_hrs:.2f}, winner {c.winner}")

print()
print(report(comparisons))
