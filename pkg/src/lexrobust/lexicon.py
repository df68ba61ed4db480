"""Pronouncing-dictionary lookup, phoneme counts and synonym-pair ingestion."""

from __future__ import annotations

import csv
import os
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

SLOT = "{TARGET}"
LEXICON_ENV = "LEXROBUST_LEXICON"

_ALT_RE = re.compile(r"^(?P<word>.+?)\((?P<n>\d+)\)$")
_STRESS_RE = re.compile(r"\d+$")
_EDGE_PUNCT = "\"'.,;:!?()[]{}<>-_`*“”‘’…"


class LexiconError(ValueError):
    pass


class OOVError(KeyError):
    """Word is not in the pronouncing dictionary."""

    def __str__(self):
        return f"out-of-vocabulary word: {self.args[0]!r}"


def normalize_word(word: str) -> str:
    return word.strip().strip(_EDGE_PUNCT).lower()


def strip_stress(phone: str) -> str:
    return _STRESS_RE.sub("", phone)


class PronunciationLexicon:
    """Immutable, case-insensitive map from word to its pronunciations."""

    def __init__(self, entries: Mapping[str, Iterable[Iterable[str]]]):
        table: dict[str, tuple[tuple[str, ...], ...]] = {}
        for word, prons in entries.items():
            prons = tuple(tuple(p) for p in prons)
            if not prons or any(len(p) == 0 for p in prons):
                raise LexiconError(f"word {word!r} needs at least one non-empty pronunciation")
            table[word.lower()] = prons
        self._entries = table

    def __contains__(self, word: str) -> bool:
        return normalize_word(word) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def pronunciations(self, word: str) -> tuple[tuple[str, ...], ...]:
        key = normalize_word(word)
        try:
            return self._entries[key]
        except KeyError:
            raise OOVError(key) from None

    def items(self):
        return self._entries.items()


def parse_lexicon(lines: Iterable[str], source: str = "<lexicon>") -> PronunciationLexicon:
    entries: dict[str, list[tuple[str, ...]]] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith(";;;") or line.startswith("#"):
            continue
        parts = line.split("#", 1)[0].split()
        if len(parts) < 2:
            raise LexiconError(f"{source}:{lineno}: malformed entry {line!r} (no phonemes)")
        head, phones = parts[0], tuple(parts[1:])
        m = _ALT_RE.match(head)
        word = (m.group("word") if m else head).lower()
        entries.setdefault(word, []).append(phones)
    if not entries:
        raise LexiconError(f"{source}: empty lexicon")
    return PronunciationLexicon(entries)


def load_lexicon(path: str | Path) -> PronunciationLexicon:
    """Load a CMUdict-style file: ``WORD PH1 PH2 ...``, alternates as ``WORD(2)``."""
    with open(path, encoding="utf-8", errors="replace") as fh:
        return parse_lexicon(fh, str(path))


def save_lexicon(lexicon: PronunciationLexicon, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word, prons in lexicon.items():
            for i, pron in enumerate(prons):
                head = word.upper() if i == 0 else f"{word.upper()}({i + 1})"
                fh.write(f"{head}  {' '.join(pron)}\n")


def default_lexicon() -> PronunciationLexicon:
    """Lexicon named by ``$LEXROBUST_LEXICON``, else the bundled word list."""
    path = os.environ.get(LEXICON_ENV)
    if path:
        return load_lexicon(path)
    text = resources.files("lexrobust").joinpath("data/lexicon.dict").read_text(encoding="utf-8")
    return parse_lexicon(text.splitlines(), "lexrobust/data/lexicon.dict")


def phoneme_length(lexicon: PronunciationLexicon, word: str) -> int:
    """Phoneme count of the first-listed pronunciation."""
    return len(lexicon.pronunciations(word)[0])


def _stressless(prons) -> set[tuple[str, ...]]:
    return {tuple(strip_stress(p) for p in pron) for pron in prons}


def phonetic_match(lexicon: PronunciationLexicon, target: str, response: str) -> bool:
    """Same word after normalisation, or homophones under any pronunciation."""
    t, r = normalize_word(target), normalize_word(response)
    if t == r:
        return bool(t)
    if t not in lexicon or r not in lexicon:
        return False
    return not _stressless(lexicon.pronunciations(t)).isdisjoint(
        _stressless(lexicon.pronunciations(r))
    )


@dataclass(frozen=True)
class SynonymPairRecord:
    pair_id: str
    word_a: str
    word_b: str
    context: str
    audio_a: str | None = None
    audio_b: str | None = None

    def __post_init__(self):
        if normalize_word(self.word_a) == normalize_word(self.word_b):
            raise LexiconError(f"pair {self.pair_id}: both words are {self.word_a!r}")
        if self.context.count(SLOT) != 1:
            raise LexiconError(
                f"pair {self.pair_id}: context must contain exactly one {SLOT} slot"
            )

    @property
    def words(self) -> tuple[str, str]:
        return self.word_a, self.word_b

    def left_context(self) -> list[str]:
        return self.context.split(SLOT, 1)[0].split()

    def realize(self, word: str) -> str:
        return self.context.replace(SLOT, word)


def load_pairs(path: str | Path) -> list[SynonymPairRecord]:
    """Read the pairs CSV (``pair_id,word_a,word_b,context[,audio_a,audio_b]``)."""
    records: list[SynonymPairRecord] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"pair_id", "word_a", "word_b", "context"} - set(reader.fieldnames or ())
        if missing:
            raise LexiconError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
        for row in reader:
            line = reader.line_num
            pid = row["pair_id"].strip()
            if pid in seen:
                raise LexiconError(f"{path}:{line}: duplicate pair_id {pid!r}")
            seen.add(pid)
            try:
                records.append(
                    SynonymPairRecord(
                        pair_id=pid,
                        word_a=row["word_a"].strip(),
                        word_b=row["word_b"].strip(),
                        context=row["context"],
                        audio_a=(row.get("audio_a") or "").strip() or None,
                        audio_b=(row.get("audio_b") or "").strip() or None,
                    )
                )
            except LexiconError as exc:
                raise LexiconError(f"{path}:{line}: {exc}") from None
    return records
