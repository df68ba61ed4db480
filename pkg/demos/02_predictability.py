"""
Phoneme length and contextual predictability
============================================

The two text features of a synonym: how many phonemes it has and how
predictable it is from the words to its left.
"""

from pathlib import Path

from lexrobust.lexicon import default_lexicon, load_pairs, phoneme_length, phonetic_match
from lexrobust.lm import train

DATA = Path(__file__).parent / "data"

lexicon = default_lexicon()
for word in ("sea", "ocean", "difficult"):
    print(f"{word:<10} {' '.join(lexicon.pronunciations(word)[0]):<28} {phoneme_length(lexicon, word)} phonemes")

# Homophones count as the same response
print("sea ~ see:", phonetic_match(lexicon, "sea", "see"), "| sea ~ tea:", phonetic_match(lexicon, "sea", "tea"))

# A trigram Kneser-Ney model on the small demo corpus
corpus = (DATA / "corpus.txt").read_text().splitlines()
lm = train(corpus, order=3)
print(f"\nLM: order {lm.order}, {len(lm.vocab)} vocabulary entries")

for pair in load_pairs(DATA / "pairs.csv")[:6]:
    ctx = pair.left_context()
    lp = {w: lm.log_prob(w, ctx) for w in pair.words}
    better = max(lp, key=lp.get)
    print(f"... {' '.join(ctx[-3:]):<22} {pair.word_a:>8} {lp[pair.word_a]:7.2f}   "
          f"{pair.word_b:>8} {lp[pair.word_b]:7.2f}   more predictable: {better}")

# Probabilities over the vocabulary sum to one in any context
dist = lm.distribution(["dives", "into", "the"])
print(f"\nsum P(w | dives into the) = {sum(dist.values()):.12f}")
