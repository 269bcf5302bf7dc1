"""Per-comment feature vectors.

The registry below fixes the feature names and their column order in the
feature dump. Degenerate inputs (empty text, nothing embeddable, ...) give
zeros plus a flag naming the feature group, never an exception.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Comment, Post, Thread
from .sentiment import sentiment_scores
from .subjectivity import SubjectivityModel, subjectivity_features
from .textstats import (
    EmbeddingTable,
    FrequencyTable,
    Lexicon,
    TokenStream,
    category_counts,
    log_frequency,
    syllable_count,
    tokenize,
)

USER_FEATURES = ("h_index", "activity", "flair")
TIME_FEATURES = ("time_diff",)
SENTIMENT_FEATURES = (
    "vad_neg", "vad_pos", "vad_neu", "vad_comp", "psubj", "pobj", "subjcat",
    "posemo", "negemo", "tone", "affect", "analytic", "insight", "authentic",
    "clout", "tentative", "certain", "affil", "focuspresent", "focusfuture", "focuspast",
)
RELEVANCE_FEATURES = ("relevance",)
CONTENT_FEATURES = (
    "self_fluency", "coca_fluency", "WC", "WPS", "GI", "SMOG", "FKE", "ttr",
    "conj", "adverb", "auxverb", "pronoun", "ppron", "i", "we", "you", "shehe",
    "quant", "swear", "netspeak", "interrog", "per_stop", "AllPunc", "quotes",
    "function", "word_len",
)
REGISTRY = USER_FEATURES + TIME_FEATURES + SENTIMENT_FEATURES + RELEVANCE_FEATURES + CONTENT_FEATURES

# lexicon categories reported per 100 words
SENTIMENT_CATEGORIES = SENTIMENT_FEATURES[7:]
CONTENT_CATEGORIES = (
    "conj", "adverb", "auxverb", "pronoun", "ppron", "i", "we", "you", "shehe",
    "quant", "swear", "netspeak", "interrog", "function",
)

N_FLUENCY = 3
N_RELEVANCE = 5
WEIGHT_CAP = 1e6
COMPLEX_SYLLABLES = 3


@dataclass(frozen=True)
class FeatureVector:
    values: Mapping[str, float]
    flags: frozenset[str] = frozenset()

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def as_array(self, names: Sequence[str] = REGISTRY) -> np.ndarray:
        return np.array([self.values[n] for n in names], dtype=np.float64)


# -- text features -----------------------------------------------------------

def readability_from_counts(words: int, sentences: int, syllables: int, complex_words: int):
    """``(GI, SMOG, FKE)`` from raw counts; zeros when words or sentences is 0."""
    if words <= 0 or sentences <= 0:
        return 0.0, 0.0, 0.0
    wps = words / sentences
    fke = 0.39 * wps + 11.8 * (syllables / words) - 15.59
    gi = 0.4 * (wps + 100.0 * complex_words / words)
    smog = 1.043 * math.sqrt(complex_words * 30.0 / sentences) + 3.1291
    return gi, smog, fke


def readability(tokens: Sequence[str], sentences: int):
    syl = [syllable_count(t) for t in tokens]
    return readability_from_counts(len(tokens), sentences, sum(syl), sum(1 for s in syl if s >= COMPLEX_SYLLABLES))


def per_100(count: float, words: int) -> float:
    return 100.0 * count / words if words else 0.0


def content_features(stream: TokenStream, lexicon: Lexicon, stopwords: frozenset[str]) -> tuple[dict, set]:
    """Structure, readability and per-100-word lexicon counts of one text."""
    flags = set()
    tokens = stream.tokens
    wc = len(tokens)
    out = dict.fromkeys(("WC", "WPS", "GI", "SMOG", "FKE", "ttr", "per_stop", "word_len"), 0.0)
    out["AllPunc"] = float(stream.punctuation_count)
    out["quotes"] = float(stream.quote_count)
    counts = category_counts(tokens, lexicon)
    for cat in SENTIMENT_CATEGORIES + CONTENT_CATEGORIES:
        out[cat] = per_100(counts.get(cat, 0), wc)
    if wc == 0:
        flags.add("empty_text")
        return out, flags
    out["WC"] = float(wc)
    out["WPS"] = wc / stream.sentences
    out["GI"], out["SMOG"], out["FKE"] = readability(tokens, stream.sentences)
    out["ttr"] = len(set(tokens)) / wc
    out["word_len"] = sum(len(t) for t in tokens) / wc
    out["per_stop"] = per_100(sum(1 for t in tokens if t in stopwords), wc)
    return out, flags


def fluency(tokens: Sequence[str], subreddit_table: FrequencyTable, reference_table: FrequencyTable):
    """``(self_fluency, coca_fluency)``.

    self_fluency averages the subreddit log-frequency of the 3 distinct tokens
    most frequent in the subreddit table; coca_fluency averages the reference
    log-frequency of the 3 distinct tokens least frequent in the reference
    table. Ties are broken alphabetically. Returns None for no tokens.
    """
    distinct = sorted(set(tokens))
    if not distinct:
        return None
    common = sorted(distinct, key=lambda w: -subreddit_table.count(w))[:N_FLUENCY]
    rare = sorted(distinct, key=reference_table.count)[:N_FLUENCY]
    self_fl = sum(log_frequency(subreddit_table, w) for w in common) / len(common)
    coca_fl = sum(log_frequency(reference_table, w) for w in rare) / len(rare)
    return self_fl, coca_fl


def rare_word_centroid(tokens: Iterable[str], embeddings: EmbeddingTable, reference_table: FrequencyTable):
    """Inverse-|log-frequency| weighted centroid of the 5 rarest embeddable tokens."""
    candidates = sorted({t for t in tokens if t in embeddings})
    rare = sorted(candidates, key=reference_table.count)[:N_RELEVANCE]
    if not rare:
        return None
    acc = np.zeros(embeddings.dim)
    wsum = 0.0
    for w in rare:
        lf = abs(log_frequency(reference_table, w))
        weight = WEIGHT_CAP if lf < 1e-6 else min(1.0 / lf, WEIGHT_CAP)
        acc += weight * embeddings.get(w)
        wsum += weight
    return acc / wsum


def cosine(a: np.ndarray, b: np.ndarray) -> float | None:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return None
    return max(-1.0, min(1.0, float(np.dot(a, b)) / (na * nb)))


def relevance(post_text, comment_text, embeddings: EmbeddingTable, reference_table: FrequencyTable) -> float | None:
    """Cosine of the rare-word centroids of two texts; None when either has no embeddable word."""
    if isinstance(post_text, str):
        post_text = tokenize(post_text).tokens
    if isinstance(comment_text, str):
        comment_text = tokenize(comment_text).tokens
    a = rare_word_centroid(post_text, embeddings, reference_table)
    b = rare_word_centroid(comment_text, embeddings, reference_table)
    if a is None or b is None:
        return None
    return cosine(a, b)


# -- user and time features --------------------------------------------------

def h_index(scores: Iterable[int]) -> int:
    """Largest h such that at least h scores are >= h."""
    h = 0
    for i, s in enumerate(sorted(scores, reverse=True), start=1):
        if s >= i:
            h = i
        else:
            break
    return h


@dataclass(frozen=True)
class UserStats:
    """Per-author history within one subreddit's training partition."""
    h_index: Mapping[str, int]
    activity: Mapping[str, int]

    @classmethod
    def from_threads(cls, threads: Iterable[Thread]) -> "UserStats":
        scores: dict[str, list[int]] = defaultdict(list)
        posts: dict[str, int] = defaultdict(int)
        for t in threads:
            posts[t.post.author] += 1
            for c in t.comments:
                scores[c.author].append(c.score)
        authors = sorted(set(scores) | set(posts))
        return cls(
            h_index={a: h_index(scores.get(a, ())) for a in authors},
            activity={a: len(scores.get(a, ())) + posts.get(a, 0) for a in authors},
        )

    @classmethod
    def empty(cls) -> "UserStats":
        return cls({}, {})


def user_features(comment: Comment, stats: UserStats) -> tuple[float, float, float]:
    return (
        float(stats.h_index.get(comment.author, 0)),
        float(stats.activity.get(comment.author, 0)),
        1.0 if comment.flair else 0.0,
    )


def time_feature(post: Post, comment: Comment) -> float:
    return float(comment.created_at - post.created_at)


# -- extraction --------------------------------------------------------------

@dataclass
class Resources:
    lexicon: Lexicon
    stopwords: frozenset[str]
    subjectivity: SubjectivityModel
    reference_table: FrequencyTable
    embeddings: EmbeddingTable
    subreddit_tables: dict[str, FrequencyTable] = field(default_factory=dict)
    user_stats: dict[str, UserStats] = field(default_factory=dict)


def text_features(text: str, resources: Resources, subreddit_table: FrequencyTable, post_centroid) -> tuple[dict, set]:
    """All features that depend only on the comment text (and its post)."""
    stream = tokenize(text)
    values, flags = content_features(stream, resources.lexicon, resources.stopwords)
    neg, pos, neu, comp = sentiment_scores(text, resources.lexicon, stream)
    values.update(vad_neg=neg, vad_pos=pos, vad_neu=neu, vad_comp=comp)
    values["psubj"], values["pobj"], values["subjcat"] = subjectivity_features(stream.tokens, resources.subjectivity)

    fl = fluency(stream.tokens, subreddit_table, resources.reference_table)
    if fl is None:
        values["self_fluency"] = values["coca_fluency"] = 0.0
        flags.add("fluency")
    else:
        values["self_fluency"], values["coca_fluency"] = fl

    centroid = rare_word_centroid(stream.tokens, resources.embeddings, resources.reference_table)
    rel = None
    if centroid is not None and post_centroid is not None:
        rel = cosine(post_centroid, centroid)
    if rel is None:
        rel = 0.0
        flags.add("relevance")
    values["relevance"] = rel
    return values, flags


def post_text(post: Post) -> str:
    return f"{post.title}\n{post.body}" if post.body else post.title


def extract_all(thread: Thread, resources: Resources) -> list[FeatureVector]:
    """One registry-complete feature vector per comment, in thread order."""
    sub = thread.subreddit
    sub_table = resources.subreddit_tables[sub]
    stats = resources.user_stats.get(sub, UserStats.empty())
    post_centroid = rare_word_centroid(
        tokenize(post_text(thread.post)).tokens, resources.embeddings, resources.reference_table
    )
    out = []
    for c in thread.comments:
        values, flags = text_features(c.body, resources, sub_table, post_centroid)
        values["h_index"], values["activity"], values["flair"] = user_features(c, stats)
        values["time_diff"] = time_feature(thread.post, c)
        out.append(FeatureVector({name: float(values[name]) for name in REGISTRY}, frozenset(flags)))
    return out


# -- feature dump ------------------------------------------------------------

META_COLUMNS = ("comment_id", "post_id", "subreddit", "partition", "score")


@dataclass
class FeatureDump:
    comment_ids: list[str]
    post_ids: list[str]
    subreddits: list[str]
    partitions: list[str]
    scores: np.ndarray
    X: np.ndarray
    flags: list[str]
    names: tuple[str, ...] = REGISTRY

    def __len__(self) -> int:
        return len(self.comment_ids)

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.names.index(name)]

    def select(self, mask) -> "FeatureDump":
        idx = np.flatnonzero(mask)
        pick = lambda seq: [seq[i] for i in idx]  # noqa: E731
        return FeatureDump(
            pick(self.comment_ids), pick(self.post_ids), pick(self.subreddits), pick(self.partitions),
            self.scores[idx], self.X[idx], pick(self.flags), self.names,
        )

    def where(self, subreddit: str | None = None, partition: str | None = None) -> "FeatureDump":
        mask = np.ones(len(self), dtype=bool)
        if subreddit is not None:
            mask &= np.array([s == subreddit for s in self.subreddits], dtype=bool)
        if partition is not None:
            mask &= np.array([p == partition for p in self.partitions], dtype=bool)
        return self.select(mask)


def format_float(x: float) -> str:
    return repr(float(x))


def write_feature_dump(path, rows: Iterable[tuple[Comment, str, str, FeatureVector]]) -> None:
    """Rows are ``(comment, subreddit, partition, vector)``.

    Columns: comment_id, post_id, subreddit, partition, score, the registry
    names in order, then flags (comma-separated, ``-`` when none). Floats use
    the shortest round-trip representation.
    """
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(META_COLUMNS + REGISTRY + ("flags",)) + "\n")
        for comment, sub, part, vec in rows:
            cells = [comment.id, comment.post_id, sub, part, str(comment.score)]
            cells += [format_float(vec.values[n]) for n in REGISTRY]
            cells.append(",".join(sorted(vec.flags)) or "-")
            fh.write("\t".join(cells) + "\n")


def read_feature_dump(path) -> FeatureDump:
    path = Path(path)
    ids, pids, subs, parts, scores, rows, flags = [], [], [], [], [], [], []
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        expected = list(META_COLUMNS + REGISTRY + ("flags",))
        if header != expected:
            raise ValueError(f"{path.name}: unexpected header")
        nmeta = len(META_COLUMNS)
        for line in fh:
            cells = line.rstrip("\n").split("\t")
            ids.append(cells[0])
            pids.append(cells[1])
            subs.append(cells[2])
            parts.append(cells[3])
            scores.append(int(cells[4]))
            rows.append([float(x) for x in cells[nmeta:nmeta + len(REGISTRY)]])
            flags.append(cells[-1])
    X = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(REGISTRY))
    return FeatureDump(ids, pids, subs, parts, np.asarray(scores, dtype=np.int64), X, flags)
