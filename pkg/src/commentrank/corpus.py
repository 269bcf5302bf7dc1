"""Ingest Reddit-style dumps, rebuild threads, filter and split them.

Both input files are newline-delimited JSON using the field names of the
public Reddit dumps:

    posts:    id, subreddit, title, selftext, created_utc, author
    comments: id, link_id, author, body, created_utc, score, author_flair_text

``link_id`` may carry the ``t3_`` kind prefix; it is stripped. A comment may
use ``post_id`` instead of ``link_id``.
"""

from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .rng import shuffled

logger = logging.getLogger(__name__)

DELETED = "[deleted]"


@dataclass(frozen=True)
class Post:
    id: str
    subreddit: str
    title: str
    body: str
    created_at: int
    author: str


@dataclass(frozen=True)
class Comment:
    id: str
    post_id: str
    author: str
    body: str
    created_at: int
    score: int
    flair: str | None = None


@dataclass(frozen=True)
class Thread:
    post: Post
    comments: tuple[Comment, ...]

    @property
    def subreddit(self) -> str:
        return self.post.subreddit


@dataclass(frozen=True)
class ParseWarning:
    line: int
    message: str


@dataclass(frozen=True)
class DatasetSplit:
    train_posts: frozenset[str]
    test_posts: frozenset[str]
    seed: int
    fraction: float = 0.8

    def partition_of(self, post_id: str) -> str:
        if post_id in self.train_posts:
            return "train"
        if post_id in self.test_posts:
            return "test"
        raise KeyError(post_id)


class CorpusError(ValueError):
    pass


def _timestamp(value) -> int:
    ts = int(float(value))
    if ts <= 0:
        raise ValueError(f"non-positive timestamp {value!r}")
    return ts


def _strip_kind(ref: str) -> str:
    return ref.split("_", 1)[1] if ref[:3] in ("t1_", "t3_") else ref


def _text(value) -> str:
    return "" if value is None else str(value)


def post_from_record(rec: dict) -> Post:
    return Post(
        id=_strip_kind(str(rec["id"])),
        subreddit=_text(rec.get("subreddit")),
        title=_text(rec.get("title")),
        body=_text(rec.get("selftext", rec.get("body"))),
        created_at=_timestamp(rec.get("created_utc", rec.get("created_at"))),
        author=_text(rec.get("author")) or DELETED,
    )


def comment_from_record(rec: dict) -> Comment:
    post_ref = rec.get("link_id", rec.get("post_id"))
    if post_ref is None:
        raise KeyError("link_id")
    flair = rec.get("author_flair_text", rec.get("flair"))
    return Comment(
        id=_strip_kind(str(rec["id"])),
        post_id=_strip_kind(str(post_ref)),
        author=_text(rec.get("author")) or DELETED,
        body=_text(rec.get("body")),
        created_at=_timestamp(rec.get("created_utc", rec.get("created_at"))),
        score=int(rec["score"]),
        flair=flair if flair else None,
    )


def _read_records(path, parse) -> tuple[list, list[ParseWarning]]:
    path = Path(path)
    out, warnings = [], []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise ValueError("record is not an object")
                out.append(parse(rec))
            except (ValueError, KeyError, TypeError) as exc:
                msg = f"{type(exc).__name__}: {exc}"
                logger.warning("%s:%d skipped malformed record (%s)", path.name, lineno, msg)
                warnings.append(ParseWarning(lineno, msg))
    return out, warnings


def load_posts(path) -> tuple[list[Post], list[ParseWarning]]:
    """Parse a posts file. Malformed lines are skipped and reported."""
    return _read_records(path, post_from_record)


def load_comments(path) -> tuple[list[Comment], list[ParseWarning]]:
    return _read_records(path, comment_from_record)


def comment_order(c: Comment) -> tuple[int, str]:
    return (c.created_at, c.id)


def assemble_threads(posts: Iterable[Post], comments: Iterable[Comment]) -> tuple[list[Thread], int]:
    """Group comments under their posts.

    Returns the threads in post input order and the number of orphan
    comments (those whose post id is not among ``posts``).
    """
    posts = list(posts)
    by_post: dict[str, list[Comment]] = {p.id: [] for p in posts}
    orphans = 0
    for c in comments:
        bucket = by_post.get(c.post_id)
        if bucket is None:
            orphans += 1
        else:
            bucket.append(c)
    threads = [Thread(p, tuple(sorted(by_post[p.id], key=comment_order))) for p in posts]
    return threads, orphans


def filter_min_comments(threads: Iterable[Thread], min_comments: int = 5) -> list[Thread]:
    if min_comments < 1:
        raise ValueError("min_comments must be >= 1")
    return [t for t in threads if len(t.comments) >= min_comments]


def train_size(total: int, fraction: float) -> int:
    # round half up; both partitions kept non-empty
    n = math.floor(fraction * total + 0.5)
    return min(max(n, 1), total - 1)


def split_by_post(threads: Iterable[Thread], fraction: float = 0.8, seed: int = 0) -> DatasetSplit:
    """Random train/test partition of posts.

    Post ids are sorted, shuffled with the portable Fisher-Yates shuffle and
    the first ``round(fraction * n)`` become the training posts.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie strictly between 0 and 1")
    ids = sorted({t.post.id for t in threads})
    if len(ids) < 2:
        raise CorpusError("need at least 2 threads to form a train and a test partition")
    order = shuffled(ids, seed)
    n_train = train_size(len(order), fraction)
    return DatasetSplit(frozenset(order[:n_train]), frozenset(order[n_train:]), seed, fraction)


def by_subreddit(threads: Iterable[Thread]) -> dict[str, list[Thread]]:
    groups: dict[str, list[Thread]] = defaultdict(list)
    for t in threads:
        groups[t.subreddit].append(t)
    return dict(sorted(groups.items()))


# -- thread artifact ---------------------------------------------------------

def thread_to_record(thread: Thread) -> dict:
    return {"post": asdict(thread.post), "comments": [asdict(c) for c in thread.comments]}


def thread_from_record(rec: dict) -> Thread:
    return Thread(Post(**rec["post"]), tuple(Comment(**c) for c in rec["comments"]))


def write_threads(path, threads: Iterable[Thread]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for t in threads:
            fh.write(json.dumps(thread_to_record(t), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def read_threads(path) -> Iterator[Thread]:
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield thread_from_record(json.loads(line))


def write_split(path, splits: dict[str, DatasetSplit]) -> None:
    """Write ``subreddit<TAB>post_id<TAB>partition`` rows, sorted."""
    rows = []
    for sub, split in splits.items():
        rows += [(sub, pid, "train") for pid in split.train_posts]
        rows += [(sub, pid, "test") for pid in split.test_posts]
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("subreddit\tpost_id\tpartition\n")
        for row in sorted(rows):
            fh.write("\t".join(row) + "\n")


def read_split(path, seed: int = 0, fraction: float = 0.8) -> dict[str, DatasetSplit]:
    parts: dict[str, dict[str, set]] = defaultdict(lambda: {"train": set(), "test": set()})
    with Path(path).open("r", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            sub, pid, part = line.rstrip("\n").split("\t")
            parts[sub][part].add(pid)
    return {
        sub: DatasetSplit(frozenset(p["train"]), frozenset(p["test"]), seed, fraction)
        for sub, p in sorted(parts.items())
    }
