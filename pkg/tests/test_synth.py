import numpy as np
import pytest

from commentrank.corpus import assemble_threads, load_comments, load_posts
from commentrank.features import REGISTRY
from commentrank.synth import SynthConfig, generate, read_truth

SMALL = dict(n_threads=12, comments_per_thread=8)


def test_validate():
    for bad in (dict(n_threads=1), dict(comments_per_thread=4), dict(noise=-1.0),
                dict(weights={"nope": 1.0}), dict(weights={"h_index": 1.0})):
        with pytest.raises(ValueError):
            SynthConfig(**bad).validate()


def test_same_seed_byte_identical(tmp_path):
    generate(SynthConfig(**SMALL, seed=3), tmp_path / "a")
    generate(SynthConfig(**SMALL, seed=3), tmp_path / "b")
    for name in ("posts.jsonl", "comments.jsonl", "embeddings.txt", "reference_freq.tsv",
                 "subjectivity.tsv", "truth.txt", "run.cfg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_different_seed_differs(tmp_path):
    generate(SynthConfig(**SMALL, seed=3), tmp_path / "a")
    generate(SynthConfig(**SMALL, seed=4), tmp_path / "b")
    assert (tmp_path / "a" / "comments.jsonl").read_bytes() != (tmp_path / "b" / "comments.jsonl").read_bytes()


def test_time_only_noise_free_earliest_wins(tmp_path):
    res = generate(SynthConfig(**SMALL, weights={"time_diff": -1.0}, noise=0.0), tmp_path)
    posts, pw = load_posts(tmp_path / "posts.jsonl")
    comments, cw = load_comments(tmp_path / "comments.jsonl")
    threads, orphans = assemble_threads(posts, comments)
    assert pw == cw == [] and orphans == 0
    for t in threads:
        top = max(t.comments, key=lambda c: c.score)
        assert top.created_at == min(c.created_at for c in t.comments)
    assert res.planted == {"time_diff": -1.0}


def test_roundtrip_and_truth(tmp_path):
    cfg = SynthConfig(**SMALL)
    res = generate(cfg, tmp_path)
    posts, pw = load_posts(tmp_path / "posts.jsonl")
    comments, cw = load_comments(tmp_path / "comments.jsonl")
    assert pw == [] and cw == []
    assert len(posts) == 12 and len(comments) == 96
    truth = read_truth(tmp_path / "truth.txt")
    assert truth["weights"] == cfg.weights and truth["seed"] == "42"
    assert [c.score for c in comments] == res.scores.tolist()


def test_features_are_non_degenerate(tmp_path):
    weights = {n: 0.1 for n in ("time_diff", "relevance", "vad_comp", "vad_pos", "vad_neg", "psubj", "WC",
                                "WPS", "ttr", "self_fluency", "coca_fluency", "swear", "netspeak", "flair")}
    res = generate(SynthConfig(**SMALL, weights=weights), tmp_path)
    varying = [n for n, col in zip(weights, res.features.T) if np.std(col) > 0]
    assert len(varying) >= 10
    assert all(n in REGISTRY for n in varying)
