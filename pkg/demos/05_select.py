"""
Choosing the more noise-robust synonym
======================================

Runs the bundled per-condition models on the demo pairs. The quiet and
middle conditions use text features only; the loud condition needs STOI,
so each word gets a (synthetic) clean and noisy recording.

Two things to keep in mind when reading the output. The log.prob weights
were estimated on a different language model's scale, so the predicted
gains are only useful for ranking the two words, not as absolute values.
And both hypotheses are scored with the same model, so at SNR -5 the
decision follows the sign of (STOI + 2 * diff.STOI) weights, which is
slightly negative: the bundled model on its own leans towards the word
with the lower STOI.
"""

from pathlib import Path

import numpy as np

from lexrobust.audio import NoiseCondition, mix_at_snr
from lexrobust.lexicon import default_lexicon, load_pairs
from lexrobust.lm import train
from lexrobust.selector import WordAudio, canonical_models, choose
from lexrobust.synth import babble, speech_like

DATA = Path(__file__).parent / "data"
lexicon = default_lexicon()
lm = train((DATA / "corpus.txt").read_text().splitlines(), order=3)
models = canonical_models()
pairs = load_pairs(DATA / "pairs.csv")

for snr in (5.0, 0.0):
    print(f"SNR {snr:+g} dB")
    for pair in pairs[:6]:
        d = choose(pair, NoiseCondition(snr), models, lm, lexicon)
        flag = " (tie)" if d.tie else ""
        print(f"  {pair.word_a:>9} / {pair.word_b:<9} -> {d.chosen}{flag}  predicted diff.HRS {d.predicted_gain:+.3f}")

# At SNR -5 the model reads STOI, so recordings are required
rng = np.random.default_rng(5)
noise = babble(rng, 6.0, 16000)
cond = NoiseCondition(-5.0)
print("\nSNR -5 dB")
for pair in pairs[:6]:
    audio = {}
    for word in pair.words:
        clean = speech_like(rng, 1.2, 16000)
        audio[word] = WordAudio(clean, mix_at_snr(clean, noise, cond, int(rng.integers(len(noise)))))
    d = choose(pair, cond, models, lm, lexicon, audio)
    stoi = {w: a.stoi for w, a in audio.items()}
    print(f"  {pair.word_a:>9} {stoi[pair.word_a]:.2f} / {pair.word_b:<9} {stoi[pair.word_b]:.2f}"
          f" -> {d.chosen}  predicted diff.HRS {d.predicted_gain:+.3f}")
