"""Interpolated Kneser-Ney n-gram language model for left-context predictability.

Scores ``log P(target | left context)`` in natural log. Words seen once in
training are counted a second time as ``<unk>`` so that unknown words get
probability mass without held-out data.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable, Sequence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

MAGIC = "#lexrobust-ngram"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    return text.lower().split()


class NgramModel:
    """Immutable interpolated Kneser-Ney model built from highest-order counts.

    Lower orders use continuation counts (number of distinct left extensions),
    the highest order uses raw counts; the recursion bottoms out in a uniform
    distribution over the vocabulary (all training words, ``</s>``, ``<unk>``).
    """

    def __init__(self, order: int, discount: float, ngram_counts: dict[tuple[str, ...], int]):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if not 0.0 < discount < 1.0:
            raise ValueError(f"discount must lie in (0, 1), got {discount}")
        if not ngram_counts:
            raise ValueError("model has no counts")
        self.order = order
        self.discount = float(discount)
        self._counts = dict(ngram_counts)

        vocab = {EOS, UNK}
        for gram in self._counts:
            if len(gram) != order:
                raise ValueError(f"n-gram {gram} does not match order {order}")
            vocab.update(gram)
        vocab.discard(BOS)
        self.vocab = frozenset(vocab)
        self._build_levels()

    def _build_levels(self):
        n = self.order
        # numerators per level: raw counts at the top, continuation counts below
        numer: dict[int, dict[tuple, int]] = {n: dict(self._counts)}
        for k in range(n - 1, 0, -1):
            cont: Counter = Counter()
            for gram in numer[k + 1]:
                cont[gram[1:]] += 1
            numer[k] = dict(cont)

        self._numer = numer
        self._denom: dict[int, dict[tuple, int]] = {}
        self._types: dict[int, dict[tuple, int]] = {}
        for k, table in numer.items():
            den: defaultdict = defaultdict(int)
            typ: defaultdict = defaultdict(int)
            for gram, c in table.items():
                den[gram[:-1]] += c
                typ[gram[:-1]] += 1
            self._denom[k] = dict(den)
            self._types[k] = dict(typ)

    def count(self, ngram: Sequence[str]) -> int:
        """Raw training count of a full-order n-gram."""
        return self._counts.get(tuple(ngram), 0)

    @property
    def ngram_counts(self) -> dict[tuple[str, ...], int]:
        return dict(self._counts)

    def _map(self, word: str) -> str:
        w = word.lower()
        if w == BOS:
            return BOS
        return w if w in self.vocab else UNK

    def history(self, left_context: Sequence[str]) -> tuple[str, ...]:
        if self.order == 1:
            return ()
        ctx = [self._map(w) for w in left_context][-(self.order - 1):]
        return (BOS,) * (self.order - 1 - len(ctx)) + tuple(ctx)

    def _prob(self, word: str, hist: tuple[str, ...]) -> float:
        d = self.discount
        p = 1.0 / len(self.vocab)
        for k in range(1, self.order + 1):
            h = hist[len(hist) - (k - 1):] if k > 1 else ()
            total = self._denom[k].get(h, 0)
            if total == 0:
                continue
            c = self._numer[k].get(h + (word,), 0)
            p = (max(c - d, 0.0) + d * self._types[k][h] * p) / total
        return p

    def prob(self, target: str, left_context: Sequence[str] = ()) -> float:
        return self._prob(self._map(target), self.history(left_context))

    def log_prob(self, target: str, left_context: Sequence[str] = ()) -> float:
        """Natural-log probability of ``target`` given the words to its left."""
        return math.log(self.prob(target, left_context))

    def distribution(self, left_context: Sequence[str] = ()) -> dict[str, float]:
        hist = self.history(left_context)
        return {w: self._prob(w, hist) for w in sorted(self.vocab)}


def train(corpus: Iterable[str | Sequence[str]], order: int = 3, discount: float = 0.75) -> NgramModel:
    """Count n-grams over padded utterances and build a Kneser-Ney model.

    Utterances may be strings (lowercased and split on whitespace) or token
    sequences.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    sentences = [tokenize(u) if isinstance(u, str) else [t.lower() for t in u] for u in corpus]
    sentences = [s for s in sentences if s]
    if not sentences:
        raise ValueError("empty corpus")

    freq = Counter(t for s in sentences for t in s)
    singletons = {w for w, c in freq.items() if c == 1}

    counts: Counter = Counter()
    for sent in sentences:
        padded = [BOS] * (order - 1) + sent + [EOS]
        for i in range(order - 1, len(padded)):
            gram = tuple(padded[i - order + 1 : i + 1])
            counts[gram] += 1
            if singletons.intersection(gram):
                counts[tuple(UNK if t in singletons else t for t in gram)] += 1
    return NgramModel(order, discount, dict(counts))


def save_model(model: NgramModel, path: str | Path) -> None:
    """Write a line-based count dump.

    Layout: magic line, ``version``, ``order``, ``discount`` (Python float
    repr), ``ngrams <N>``, then N lines ``<count>\\t<tok> <tok> ...`` and a
    closing ``#end`` line.
    """
    grams = sorted(model.ngram_counts.items())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{MAGIC}\nversion {FORMAT_VERSION}\norder {model.order}\n")
        fh.write(f"discount {model.discount!r}\nngrams {len(grams)}\n")
        for gram, c in grams:
            fh.write(f"{c}\t{' '.join(gram)}\n")
        fh.write("#end\n")


def _header(lines, key: str) -> str:
    try:
        line = next(lines)
    except StopIteration:
        raise ModelFormatError(f"truncated model file: missing {key!r}") from None
    name, _, value = line.rstrip("\n").partition(" ")
    if name != key:
        raise ModelFormatError(f"expected {key!r} header, found {line.strip()!r}")
    return value


def load_model(path: str | Path) -> NgramModel:
    with open(path, encoding="utf-8") as fh:
        lines = iter(fh)
        first = next(lines, "").rstrip("\n")
        if first != MAGIC:
            raise ModelFormatError(f"{path}: not a lexrobust n-gram model")
        version = int(_header(lines, "version"))
        if version > FORMAT_VERSION:
            raise ModelFormatError(
                f"{path}: format version {version} is newer than supported version {FORMAT_VERSION}"
            )
        order = int(_header(lines, "order"))
        discount = float(_header(lines, "discount"))
        n = int(_header(lines, "ngrams"))
        counts: dict[tuple[str, ...], int] = {}
        for i in range(n):
            line = next(lines, None)
            if line is None or line.startswith("#end"):
                raise ModelFormatError(f"{path}: truncated after {i} of {n} n-grams")
            c, _, gram = line.rstrip("\n").partition("\t")
            counts[tuple(gram.split(" "))] = int(c)
        if next(lines, "").rstrip("\n") != "#end":
            raise ModelFormatError(f"{path}: missing end marker")
    return NgramModel(order, discount, counts)
