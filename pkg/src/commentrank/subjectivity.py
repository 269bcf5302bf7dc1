"""Multinomial naive Bayes subjectivity classifier.

Training data is either a TSV file of ``label<TAB>sentence`` rows (label
``subj``/``obj``, also accepted: ``subjective``/``objective``, ``1``/``0``)
or the two plain-text files of the Pang & Lee subjectivity dataset, one
sentence per line.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .rng import fold_slices, shuffled
from .textstats import tokenize

SUBJ, OBJ = "subj", "obj"
_LABELS = {"subj": SUBJ, "subjective": SUBJ, "1": SUBJ, "obj": OBJ, "objective": OBJ, "0": OBJ}


@dataclass(frozen=True)
class SubjectivityModel:
    prior_subj: float
    loglik_subj: dict[str, float]
    loglik_obj: dict[str, float]

    @property
    def prior_obj(self) -> float:
        return 1.0 - self.prior_subj

    @property
    def vocabulary(self) -> frozenset[str]:
        return frozenset(self.loglik_subj)

    def log_odds(self, tokens: Iterable[str]) -> float:
        """log P(subj | tokens) - log P(obj | tokens); out-of-vocabulary tokens are ignored."""
        score = math.log(self.prior_subj) - math.log(self.prior_obj)
        ls, lo = self.loglik_subj, self.loglik_obj
        for tok in tokens:
            if tok in ls:
                score += ls[tok] - lo[tok]
        return score

    def prob_subjective(self, tokens: Iterable[str]) -> float:
        z = self.log_odds(tokens)
        # numerically stable logistic
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        e = math.exp(z)
        return e / (1.0 + e)


def train_subjectivity(examples: Iterable[tuple[str, str]]) -> SubjectivityModel:
    """Fit on ``(text, label)`` pairs with add-one smoothing."""
    counts = {SUBJ: Counter(), OBJ: Counter()}
    docs = Counter()
    for text, label in examples:
        label = _LABELS[str(label).strip().lower()]
        docs[label] += 1
        counts[label].update(tokenize(text).tokens)
    if docs[SUBJ] == 0 or docs[OBJ] == 0:
        raise ValueError("subjectivity training data needs examples of both classes")
    vocab = sorted(set(counts[SUBJ]) | set(counts[OBJ]))
    v = len(vocab)

    def loglik(c: Counter) -> dict[str, float]:
        denom = math.log(sum(c.values()) + v)
        return {w: math.log(c[w] + 1) - denom for w in vocab}

    return SubjectivityModel(
        prior_subj=docs[SUBJ] / (docs[SUBJ] + docs[OBJ]),
        loglik_subj=loglik(counts[SUBJ]),
        loglik_obj=loglik(counts[OBJ]),
    )


def subjectivity_features(tokens: Sequence[str], model: SubjectivityModel) -> tuple[float, float, float]:
    """``(psubj, pobj, subjcat)``; a 0.5 tie is objective."""
    psubj = model.prob_subjective(tokens)
    return psubj, 1.0 - psubj, 1.0 if psubj > 0.5 else 0.0


def load_labeled_sentences(path) -> list[tuple[str, str]]:
    path = Path(path)
    out = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            label, sep, text = line.partition("\t")
            if not sep or label.strip().lower() not in _LABELS:
                raise ValueError(f"{path.name}:{lineno}: expected '<subj|obj><TAB>sentence'")
            out.append((text, _LABELS[label.strip().lower()]))
    return out


def load_pang_lee(subjective_path, objective_path) -> list[tuple[str, str]]:
    """Read the two files of the Pang & Lee subjectivity v1.0 release (latin-1)."""
    out = []
    for path, label in ((subjective_path, SUBJ), (objective_path, OBJ)):
        with Path(path).open("r", encoding="latin-1") as fh:
            out += [(line.strip(), label) for line in fh if line.strip()]
    return out


def cross_validate(examples: Sequence[tuple[str, str]], folds: int = 5, seed: int = 0) -> float:
    """Mean held-out accuracy over ``folds`` contiguous blocks of a seeded shuffle."""
    order = shuffled(range(len(examples)), seed)
    accs = []
    for fold in fold_slices(len(order), folds):
        held = set(order[fold])
        model = train_subjectivity(examples[i] for i in range(len(examples)) if i not in held)
        hits = 0
        for i in order[fold]:
            text, label = examples[i]
            pred = SUBJ if subjectivity_features(tokenize(text).tokens, model)[2] else OBJ
            hits += pred == _LABELS[label]
        accs.append(hits / len(order[fold]))
    return sum(accs) / len(accs)

