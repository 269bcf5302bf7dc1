"""Synthetic community generator with known ground truth.

Writes a complete input set for the pipeline into one directory:

    posts.jsonl, comments.jsonl   corpus in the Reddit dump format
    embeddings.txt                word vectors (word2vec text format)
    reference_freq.tsv            reference frequency table
    subjectivity.tsv              labeled subj/obj sentences
    truth.txt                     planted weights and generator settings
    run.cfg                       pipeline config pointing at the files above

Comment scores are ``round(scale * (signal + noise) / sd(signal))`` where
``signal`` is a weighted sum of standardized feature values. The features
are computed with the same code the pipeline uses, so the planted model is
exactly linear in what the pipeline extracts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import REGISTRY, Resources, rare_word_centroid, text_features
from .subjectivity import train_subjectivity
from .textstats import (
    EmbeddingTable,
    FrequencyTable,
    build_frequency_table,
    default_lexicon,
    default_stopwords,
    save_frequency_table,
    tokenize,
)

DEFAULT_WEIGHTS = {
    "time_diff": -1.0,
    "relevance": 0.8,
    "vad_comp": 0.6,
    "flair": 0.7,
    "WC": 0.4,
    "swear": -0.3,
}

# planted features that do not need the text pipeline
NON_TEXT_FEATURES = frozenset({"time_diff", "flair"})
BASE_TIME = 1_356_998_400  # 2013-01-01T00:00:00Z
EMBED_DIM = 16
N_TOPICS = 8
WORDS_PER_TOPIC = 40
N_USERS = 300
FLAIR_RATE = 0.12

_CONSONANTS = "bcdfghjklmnprstvwz"
_VOWELS = "aeiou"
_FILLER = (
    "the a of to in it is that this for on with as was at by from be are have"
    " but not or an they which one you were all we when there can what so"
).split()
_OPINION = "i think feel believe honestly really personally guess seems".split()
_FACT = "reported measured located published recorded according data percent year".split()
_NETSPEAK = "lol btw imo tbh idk omg lmao".split()
_SWEAR = "damn hell crap shit".split()
_BOOSTERS = "very really extremely totally quite".split()
_NEGATIONS = "not never no".split()


@dataclass
class SynthConfig:
    n_threads: int = 200
    comments_per_thread: int = 20
    weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    noise: float = 0.1
    seed: int = 42
    subreddit: str = "synthetic"
    score_scale: float = 100.0

    def validate(self) -> None:
        if self.n_threads < 2:
            raise ValueError("n_threads must be >= 2")
        if self.comments_per_thread < 5:
            raise ValueError("comments_per_thread must be >= 5")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        for name in self.weights:
            if name not in REGISTRY:
                raise ValueError(f"unknown feature {name!r} in planted weights")
            if name in ("h_index", "activity"):
                raise ValueError(f"{name} depends on the train split and cannot carry a planted weight")


@dataclass
class SynthResult:
    directory: Path
    scores: np.ndarray
    signal: np.ndarray
    features: np.ndarray
    planted: dict[str, float]


def _pseudo_words(rng: np.random.Generator, n: int, taken: set[str]) -> list[str]:
    out = []
    while len(out) < n:
        syl = int(rng.integers(1, 5))
        w = "".join(rng.choice(list(_CONSONANTS)) + rng.choice(list(_VOWELS)) for _ in range(syl))
        if rng.random() < 0.5:
            w += rng.choice(list(_CONSONANTS))
        if len(w) > 2 and w not in taken:
            taken.add(w)
            out.append(w)
    return out


class _Vocabulary:
    def __init__(self, rng: np.random.Generator):
        lex = default_lexicon()
        self.positive = sorted(w for w, v in lex.valence.items() if v >= 1.0 and w.isalpha())
        self.negative = sorted(w for w, v in lex.valence.items() if v <= -1.0 and w.isalpha()
                               and w not in _SWEAR and w != "no")
        taken = set(lex.valence) | set(_FILLER) | set(_OPINION) | set(_FACT) | set(_NETSPEAK)
        taken |= default_stopwords()
        for pats in lex.categories.values():
            taken |= {p.rstrip("*") for p in pats}
        self.topics = [_pseudo_words(rng, WORDS_PER_TOPIC, taken) for _ in range(N_TOPICS)]

    def all_words(self) -> list[str]:
        words = set(_FILLER) | set(_OPINION) | set(_FACT) | set(_NETSPEAK) | set(_SWEAR)
        words |= set(_BOOSTERS) | set(_NEGATIONS) | set(self.positive) | set(self.negative)
        for t in self.topics:
            words |= set(t)
        return sorted(words)


def _embeddings(rng: np.random.Generator, vocab: _Vocabulary) -> EmbeddingTable:
    centers = rng.normal(size=(N_TOPICS, EMBED_DIM))
    vectors = {}
    topic_of = {w: i for i, ws in enumerate(vocab.topics) for w in ws}
    for w in vocab.all_words():
        if w in topic_of:
            v = centers[topic_of[w]] + 0.6 * rng.normal(size=EMBED_DIM)
        else:
            v = rng.normal(size=EMBED_DIM)
        vectors[w] = np.round(v, 6)
    return EmbeddingTable(EMBED_DIM, vectors)


def _reference_table(rng: np.random.Generator, vocab: _Vocabulary) -> FrequencyTable:
    counts = {}
    topic_words = {w for ws in vocab.topics for w in ws}
    for w in vocab.all_words():
        if w in topic_words:
            counts[w] = int(rng.integers(1, 400))
        elif w in _FILLER:
            counts[w] = int(rng.integers(50_000, 200_000))
        else:
            counts[w] = int(rng.integers(2_000, 40_000))
    return FrequencyTable(counts, sum(counts.values()), "synthetic reference")


def _sentence(rng, words: list[str], end: str) -> str:
    text = " ".join(words)
    return text[:1].upper() + text[1:] + end


def _subjectivity_corpus(rng: np.random.Generator, vocab: _Vocabulary, n: int = 600) -> list[tuple[str, str]]:
    out = []
    for i in range(n):
        if i % 2 == 0:
            pool = _OPINION + vocab.positive + vocab.negative + _BOOSTERS
            label = "subj"
        else:
            pool = _FACT + [w for ws in vocab.topics for w in ws[:10]]
            label = "obj"
        k = int(rng.integers(5, 12))
        words = list(rng.choice(pool, size=k)) + list(rng.choice(_FILLER, size=3))
        rng.shuffle(words)
        out.append((_sentence(rng, words, "."), label))
    return out


def _pick(rng: np.random.Generator, seq):
    return str(seq[int(rng.integers(len(seq)))])


def _comment_body(rng: np.random.Generator, vocab: _Vocabulary, topic: int) -> str:
    n_sent = int(rng.integers(1, 5))
    on_topic = rng.random()
    p_pos = 1.0 / (1.0 + math.exp(-2.0 * rng.normal()))
    sentences = []
    for s in range(n_sent):
        length = int(rng.integers(3, 14))
        words = []
        for _ in range(length):
            r = rng.random()
            if r < 0.40:
                words.append(_pick(rng, _FILLER))
            elif r < 0.70:
                t = topic if rng.random() < on_topic else int(rng.integers(N_TOPICS))
                words.append(_pick(rng, vocab.topics[t]))
            elif r < 0.85:
                pool = vocab.positive if rng.random() < p_pos else vocab.negative
                if rng.random() < 0.15:
                    words.append(_pick(rng, _BOOSTERS))
                if rng.random() < 0.1:
                    words.append(_pick(rng, _NEGATIONS))
                words.append(_pick(rng, pool))
            elif r < 0.92:
                words.append(_pick(rng, _OPINION if rng.random() < 0.5 else _FACT))
            elif r < 0.96:
                words.append(_pick(rng, _NETSPEAK))
            else:
                words.append(_pick(rng, _SWEAR))
        if rng.random() < 0.1:
            words[0] = words[0].upper()
        end = _pick(rng, [".", ".", ".", "?", "!", "!!"])
        sentences.append(_sentence(rng, words, end))
    body = " ".join(sentences)
    if rng.random() < 0.1:
        body = f'"{body}"'
    return body


def generate(config: SynthConfig, out_dir) -> SynthResult:
    """Generate a synthetic community into ``out_dir`` (created if needed)."""
    config.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)
    vocab = _Vocabulary(rng)
    embeddings = _embeddings(rng, vocab)
    reference = _reference_table(rng, vocab)
    subj_examples = _subjectivity_corpus(rng, vocab)

    users = [f"user{i:04d}" for i in range(N_USERS)]
    flairs = {u: (f"flair-{i % 7}" if rng.random() < FLAIR_RATE else None) for i, u in enumerate(users)}

    posts, comments, topics = [], [], []
    for t in range(config.n_threads):
        topic = int(rng.integers(N_TOPICS))
        title_words = list(rng.choice(vocab.topics[topic], size=int(rng.integers(4, 9))))
        title_words += list(rng.choice(_FILLER, size=3))
        rng.shuffle(title_words)
        created = BASE_TIME + t * 3600
        posts.append({
            "id": f"p{t:05d}",
            "subreddit": config.subreddit,
            "title": _sentence(rng, [str(w) for w in title_words], "?"),
            "selftext": "",
            "created_utc": created,
            "author": str(rng.choice(users)),
        })
        topics.append(topic)
        offsets = np.sort(rng.integers(30, 2 * 86_400, size=config.comments_per_thread))
        for c in range(config.comments_per_thread):
            author = str(rng.choice(users))
            comments.append({
                "id": f"c{t:05d}_{c:03d}",
                "link_id": f"t3_p{t:05d}",
                "subreddit": config.subreddit,
                "author": author,
                "body": _comment_body(rng, vocab, topic),
                "created_utc": created + int(offsets[c]),
                "author_flair_text": flairs[author],
                "score": 0,
            })

    # features exactly as the pipeline will compute them
    resources = Resources(
        lexicon=default_lexicon(),
        stopwords=default_stopwords(),
        subjectivity=train_subjectivity(subj_examples),
        reference_table=reference,
        embeddings=embeddings,
    )
    sub_table = build_frequency_table(c["body"] for c in comments)
    post_by_id = {p["id"]: p for p in posts}
    names = list(config.weights)
    F = np.zeros((len(comments), len(names)))
    centroids = {}
    needs_text = any(n not in NON_TEXT_FEATURES for n in names)
    for i, c in enumerate(comments):
        pid = c["link_id"][3:]
        values = {}
        if needs_text:
            if pid not in centroids:
                p = post_by_id[pid]
                centroids[pid] = rare_word_centroid(tokenize(p["title"]).tokens, embeddings, reference)
            values, _ = text_features(c["body"], resources, sub_table, centroids[pid])
        values["time_diff"] = float(c["created_utc"] - post_by_id[pid]["created_utc"])
        values["flair"] = 1.0 if c["author_flair_text"] else 0.0
        F[i] = [values[n] for n in names]

    w = np.array([config.weights[n] for n in names])
    mean, std = F.mean(axis=0), F.std(axis=0)
    std[std == 0] = 1.0
    signal = ((F - mean) / std) @ w
    sig_sd = float(signal.std()) or 1.0
    noise = rng.normal(scale=config.noise * sig_sd, size=len(signal)) if config.noise > 0 else 0.0
    scores = np.rint(config.score_scale * (signal + noise) / sig_sd).astype(np.int64)
    for c, s in zip(comments, scores):
        c["score"] = int(s)

    _write_jsonl(out / "posts.jsonl", posts)
    _write_jsonl(out / "comments.jsonl", comments)
    _write_embeddings(out / "embeddings.txt", embeddings)
    save_frequency_table(reference, out / "reference_freq.tsv")
    with (out / "subjectivity.tsv").open("w", encoding="utf-8", newline="\n") as fh:
        for text, label in subj_examples:
            fh.write(f"{label}\t{text}\n")
    _write_truth(out / "truth.txt", config, names, mean, std, sig_sd)
    (out / "run.cfg").write_text(
        "# generated by commentrank synth\n"
        "posts = posts.jsonl\n"
        "comments = comments.jsonl\n"
        "embeddings = embeddings.txt\n"
        "reference_freq = reference_freq.tsv\n"
        "subjectivity_data = subjectivity.tsv\n"
        "output_dir = run\n",
        encoding="utf-8",
    )
    return SynthResult(out, scores, signal, F, dict(config.weights))


def _write_jsonl(path: Path, records: list[dict]) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _write_embeddings(path: Path, table: EmbeddingTable) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(table.vectors)} {table.dim}\n")
        for word in sorted(table.vectors):
            fh.write(word + " " + " ".join(repr(float(x)) for x in table.vectors[word]) + "\n")


def _write_truth(path: Path, config: SynthConfig, names, mean, std, sig_sd) -> None:
    lines = [
        f"seed\t{config.seed}",
        f"n_threads\t{config.n_threads}",
        f"comments_per_thread\t{config.comments_per_thread}",
        f"noise\t{config.noise!r}",
        f"score_scale\t{config.score_scale!r}",
        f"subreddit\t{config.subreddit}",
        f"signal_std\t{sig_sd!r}",
        "feature\tweight\tmean\tstd",
    ]
    for i, n in enumerate(names):
        lines.append(f"{n}\t{config.weights[n]!r}\t{float(mean[i])!r}\t{float(std[i])!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_truth(path) -> dict:
    """Parse truth.txt into settings plus a ``weights`` mapping."""
    settings: dict = {"weights": {}}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            key, _, rest = line.rstrip("\n").partition("\t")
            if key == "feature":
                break
            settings[key] = rest
        for line in fh:
            name, weight, _, _ = line.rstrip("\n").split("\t")
            settings["weights"][name] = float(weight)
    return settings
