import json

import numpy as np
import pytest

from commentrank.corpus import Comment, Post, Thread
from commentrank.features import Resources, UserStats
from commentrank.subjectivity import train_subjectivity
from commentrank.textstats import (
    EmbeddingTable,
    FrequencyTable,
    build_frequency_table,
    default_lexicon,
    default_stopwords,
)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write((rec if isinstance(rec, str) else json.dumps(rec)) + "\n")
    return path


def make_post(pid="p1", sub="test", created=1000, author="op", title="A question about rockets"):
    return Post(pid, sub, title, "", created, author)


def make_comment(cid, pid="p1", score=0, created=1100, author="u", body="text", flair=None):
    return Comment(cid, pid, author, body, created, score, flair)


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def toy_resources(lexicon):
    rng = np.random.default_rng(0)
    words = "rocket engine fuel orbit launch cat dog happy sad the a is it great terrible".split()
    vectors = {w: rng.normal(size=4) for w in words}
    ref = FrequencyTable({w: i + 1 for i, w in enumerate(words)}, sum(range(1, len(words) + 1)), "toy")
    subj = train_subjectivity([
        ("i think it is great", "subj"),
        ("i feel so happy and sad", "subj"),
        ("the rocket engine burns fuel", "obj"),
        ("the orbit is reached after launch", "obj"),
    ])
    return Resources(
        lexicon=lexicon,
        stopwords=default_stopwords(),
        subjectivity=subj,
        reference_table=ref,
        embeddings=EmbeddingTable(4, vectors),
    )


@pytest.fixture
def toy_thread():
    post = make_post()
    bodies = [
        "The rocket engine is GREAT!!",
        "I think the fuel is terrible. Not great at all.",
        "lol what a launch",
        "Orbit? The orbit is fine, honestly.",
        "damn, the cat is happy",
    ]
    comments = tuple(
        make_comment(f"c{i}", score=10 - i, created=1000 + 60 * (i + 1), author=f"u{i % 3}", body=b,
                     flair="expert" if i == 1 else None)
        for i, b in enumerate(bodies)
    )
    return Thread(post, comments)


@pytest.fixture
def toy_resources_for(toy_resources):
    """Resources completed with subreddit tables and user stats for one thread."""
    def _build(thread):
        res = Resources(**{k: getattr(toy_resources, k) for k in
                           ("lexicon", "stopwords", "subjectivity", "reference_table", "embeddings")})
        res.subreddit_tables[thread.subreddit] = build_frequency_table(c.body for c in thread.comments)
        res.user_stats[thread.subreddit] = UserStats.from_threads([thread])
        return res
    return _build


# -- acceptance criteria summary ---------------------------------------------

_CRITERIA: dict = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "ran": False, "skipped": False})
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        if call.excinfo is None:
            entry["ran"] = True
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            entry["skipped"] = True
        else:
            entry["ran"] = True
            entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL" if not e["ok"] else "SKIP"
        terminalreporter.write_line(f"criterion {number}: {status}  {e['title']}")
