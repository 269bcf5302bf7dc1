"""Tokenization, syllables, lexicons, frequency tables and embeddings.

File formats
------------
Lexicon (UTF-8 text)::

    # comment
    posemo<TAB>happy,glad,happ*
    negemo<TAB>sad,hate*
    [valence]
    happy<TAB>2.7
    sad<TAB>-2.1

Every line before ``[valence]`` defines one category: its name, a tab and a
comma-separated pattern list. A pattern ending in ``*`` matches any token that
starts with the part before the star (including the bare stem). Lines after
``[valence]`` map one word to a valence in [-4, 4].

Frequency table::

    #total<TAB>1234
    word<TAB>count

rows sorted by word. Embeddings use the common word2vec text format: an
optional ``count dim`` header followed by ``token v1 ... vdim`` rows.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

_WORD_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")
_SENT_SPLIT_RE = re.compile(r"[.!?]+")
_ALNUM_RE = re.compile(r"[^\W_]")
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")

QUOTE_CHARS = frozenset('"“”«»')
PUNCTUATION = frozenset(
    "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~" "‘’“”«»…–—"
)


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[str, ...]
    raw: tuple[str, ...]
    sentences: int
    punctuation_count: int
    quote_count: int
    all_caps_tokens: int

    def __len__(self) -> int:
        return len(self.tokens)


def is_all_caps(word: str) -> bool:
    letters = [ch for ch in word if ch.isalpha()]
    return len(letters) >= 2 and all(ch.isupper() for ch in letters)


def tokenize(text: str) -> TokenStream:
    """Split text into lowercase word tokens plus surface counts.

    A word is a maximal run of letters/digits, optionally joined by internal
    apostrophes. Sentences are the non-empty segments between ``.``, ``!``
    and ``?`` runs, at least one for any text containing a word character.
    A token counts as all-caps when it has two or more letters, all upper case.
    """
    text = unicodedata.normalize("NFC", text)
    raw = tuple(m.group(0).replace("’", "'") for m in _WORD_RE.finditer(text))
    if _ALNUM_RE.search(text):
        segments = sum(1 for seg in _SENT_SPLIT_RE.split(text) if _ALNUM_RE.search(seg))
        sentences = max(1, segments)
    else:
        sentences = 0
    return TokenStream(
        tokens=tuple(w.lower() for w in raw),
        raw=raw,
        sentences=sentences,
        punctuation_count=sum(1 for ch in text if ch in PUNCTUATION),
        quote_count=sum(1 for ch in text if ch in QUOTE_CHARS),
        all_caps_tokens=sum(1 for w in raw if is_all_caps(w)),
    )


def syllable_count(word: str) -> int:
    """Vowel-group heuristic; a final lone ``e`` group is silent when there are others."""
    w = word.lower()
    groups = _VOWEL_GROUP_RE.findall(w)
    n = len(groups)
    if n > 1 and w.endswith("e") and groups[-1] == "e":
        n -= 1
    return max(1, n)


# -- lexicon -----------------------------------------------------------------

class LexiconError(ValueError):
    pass


@dataclass
class Lexicon:
    categories: dict[str, tuple[str, ...]]
    valence: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self._literal: dict[str, set[str]] = {}
        self._prefix: dict[str, set[str]] = {}
        self._max_prefix = 0
        for name, patterns in self.categories.items():
            if not patterns:
                raise LexiconError(f"category {name!r} has no patterns")
            for pat in patterns:
                if pat.endswith("*"):
                    stem = pat[:-1]
                    if not stem:
                        raise LexiconError(f"category {name!r}: bare '*' pattern")
                    self._prefix.setdefault(stem, set()).add(name)
                    self._max_prefix = max(self._max_prefix, len(stem))
                else:
                    self._literal.setdefault(pat, set()).add(name)
        self._cache: dict[str, frozenset[str]] = {}

    @property
    def names(self) -> list[str]:
        return list(self.categories)

    def match(self, token: str) -> frozenset[str]:
        """Categories the token belongs to."""
        hit = self._cache.get(token)
        if hit is None:
            cats = set(self._literal.get(token, ()))
            for i in range(0, min(len(token), self._max_prefix) + 1):
                cats.update(self._prefix.get(token[:i], ()))
            hit = self._cache[token] = frozenset(cats)
        return hit


def parse_lexicon(lines: Iterable[str], source: str = "<lexicon>") -> Lexicon:
    categories: dict[str, tuple[str, ...]] = {}
    valence: dict[str, float] = {}
    in_valence = False
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if line.strip().lower() == "[valence]":
            in_valence = True
            continue
        try:
            key, value = line.split("\t", 1)
        except ValueError:
            raise LexiconError(f"{source}:{lineno}: expected a tab-separated line") from None
        key = key.strip()
        if in_valence:
            score = float(value)
            if not -4.0 <= score <= 4.0:
                raise LexiconError(f"{source}:{lineno}: valence {score} for {key!r} outside [-4, 4]")
            valence[key.lower()] = score
        else:
            if key in categories:
                raise LexiconError(f"{source}:{lineno}: duplicate category {key!r}")
            patterns = tuple(p.strip().lower() for p in value.split(",") if p.strip())
            if not patterns:
                raise LexiconError(f"{source}:{lineno}: category {key!r} has no patterns")
            categories[key] = patterns
    return Lexicon(categories, valence)


def load_lexicon(path) -> Lexicon:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        return parse_lexicon(fh, source=path.name)


def category_counts(tokens: Iterable[str], lexicon: Lexicon) -> dict[str, int]:
    counts = dict.fromkeys(lexicon.categories, 0)
    for tok in tokens:
        for cat in lexicon.match(tok):
            counts[cat] += 1
    return counts


def _bundled(name: str) -> str:
    return resources.files("commentrank").joinpath("data", name).read_text(encoding="utf-8")


def default_lexicon() -> Lexicon:
    """The open starter lexicon shipped with the package."""
    return parse_lexicon(_bundled("starter_lexicon.txt").splitlines(), source="starter_lexicon.txt")


def default_stopwords() -> frozenset[str]:
    return frozenset(
        w.strip().lower() for w in _bundled("stopwords.txt").splitlines() if w.strip() and not w.startswith("#")
    )


def load_stopwords(path) -> frozenset[str]:
    with Path(path).open("r", encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip() and not w.startswith("#"))


# -- frequency tables --------------------------------------------------------

@dataclass(frozen=True)
class FrequencyTable:
    counts: Mapping[str, int]
    total: int
    source: str = ""

    @property
    def vocab_size(self) -> int:
        return len(self.counts)

    def count(self, word: str) -> int:
        return self.counts.get(word, 0)


def build_frequency_table(texts: Iterable[str], source: str = "") -> FrequencyTable:
    counts: Counter = Counter()
    for text in texts:
        counts.update(tokenize(text).tokens)
    return FrequencyTable(dict(sorted(counts.items())), sum(counts.values()), source)


def log_frequency(table: FrequencyTable, word: str) -> float:
    """Add-one smoothed relative log-frequency ``ln(c + 1) - ln(total + V)``."""
    if table.total <= 0:
        raise ValueError(f"frequency table {table.source!r} is empty")
    return math.log(table.count(word) + 1) - math.log(table.total + table.vocab_size)


def save_frequency_table(table: FrequencyTable, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#total\t{table.total}\n")
        for word in sorted(table.counts):
            fh.write(f"{word}\t{table.counts[word]}\n")


def load_frequency_table(path) -> FrequencyTable:
    path = Path(path)
    counts: dict[str, int] = {}
    declared = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            word, _, value = line.partition("\t")
            if word == "#total":
                declared = int(value)
                continue
            n = int(value)
            if n < 1:
                raise ValueError(f"{path.name}:{lineno}: count must be >= 1")
            counts[word] = counts.get(word, 0) + n
    total = sum(counts.values())
    if declared is not None and declared != total:
        raise ValueError(f"{path.name}: header total {declared} != sum of counts {total}")
    return FrequencyTable(counts, total, path.name)


# -- embeddings --------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: Mapping[str, np.ndarray]

    def get(self, word: str) -> np.ndarray | None:
        """Vector for ``word`` or None when absent."""
        return self.vectors.get(word)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors


def load_embeddings(path) -> EmbeddingTable:
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                dim = int(parts[1])
                continue
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim or dim == 0:
                raise ValueError(f"{path.name}:{lineno}: expected {dim} components, got {len(values)}")
            vectors[word.lower()] = np.asarray([float(v) for v in values], dtype=np.float64)
    if dim is None:
        raise ValueError(f"{path.name}: no vectors")
    return EmbeddingTable(dim, vectors)
