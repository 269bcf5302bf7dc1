"""Pipeline stages. Each reads earlier artifacts from the output directory.

Artifacts (all inside ``output_dir``):

    ingest    threads.jsonl, split.tsv, ingest.json
    extract   features.tsv, freq/<subreddit>.tsv
    train     models/<subreddit>/<family>.model
    evaluate  metrics.tsv, metrics.txt
    posthoc   posthoc.tsv, heatmap.tsv
    users     user_impact.tsv
    report    report.txt, report.tsv
    (all)     manifest.json
"""

from __future__ import annotations

import hashlib
import json
import logging
import platform
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, check_paths
from .corpus import (
    assemble_threads,
    by_subreddit,
    filter_min_comments,
    load_comments,
    load_posts,
    read_split,
    read_threads,
    split_by_post,
    write_split,
    write_threads,
)
from .features import REGISTRY, Resources, UserStats, extract_all, read_feature_dump, write_feature_dump
from .model import family_slug, load_model, predict, save_model, train_family
from .posthoc import (
    TOP_N,
    class_split,
    posthoc_report,
    read_posthoc_tsv,
    read_user_impact,
    user_impact,
    write_heatmap,
    write_posthoc_tsv,
    write_user_impact,
)
from .ranking import (
    evaluate_threads,
    format_table,
    group_threads,
    read_metrics_tsv,
    write_metrics_tsv,
)
from .subjectivity import load_labeled_sentences, train_subjectivity
from .textstats import (
    build_frequency_table,
    default_lexicon,
    default_stopwords,
    load_embeddings,
    load_frequency_table,
    load_lexicon,
    load_stopwords,
    save_frequency_table,
)

logger = logging.getLogger(__name__)

STAGES = ("ingest", "extract", "train", "evaluate", "posthoc", "users", "report")
PARALLEL_MIN_THREADS = 64


class MissingArtifact(RuntimeError):
    def __init__(self, path: Path, stage: str):
        self.stage = stage
        super().__init__(f"missing {path.name}: run the `{stage}` stage first")


class StageInputError(ValueError):
    pass


def _require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise MissingArtifact(path, stage)
    return path


def sha256(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _tree_digests(out: Path, paths) -> dict[str, str]:
    return {str(Path(p).relative_to(out)): sha256(p) for p in sorted(paths)}


def record_stage(cfg: RunConfig, stage: str, inputs: dict[str, str], outputs, extra: dict | None = None) -> None:
    """Add or replace a stage entry in manifest.json."""
    out = cfg.out
    path = out / "manifest.json"
    manifest = json.loads(path.read_text(encoding="utf-8")) if path.exists() else {}
    manifest["config"] = cfg.effective()
    manifest["versions"] = {
        "commentrank": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    manifest.setdefault("stages", {})[stage] = {
        "inputs": {k: sha256(v) for k, v in sorted(inputs.items())},
        "outputs": _tree_digests(out, outputs),
        "seeds": {"split_seed": cfg.split_seed, "cv_seed": cfg.cv_seed},
        **(extra or {}),
    }
    manifest["stages"] = {s: manifest["stages"][s] for s in STAGES if s in manifest["stages"]}
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- ingest ------------------------------------------------------------------

def run_ingest(cfg: RunConfig) -> dict:
    problems = check_paths(cfg, ("posts", "comments"))
    if problems:
        raise StageInputError("; ".join(problems))
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    posts, post_warn = load_posts(cfg.posts)
    comments, comment_warn = load_comments(cfg.comments)
    seen, dupes = set(), 0
    unique_posts = []
    for p in posts:
        if p.id in seen:
            dupes += 1
            continue
        seen.add(p.id)
        unique_posts.append(p)
    threads, orphans = assemble_threads(unique_posts, comments)
    kept = filter_min_comments(threads, cfg.min_comments)
    groups = by_subreddit(kept)
    splits = {}
    summary = {}
    for sub, ts in groups.items():
        if len(ts) < 2:
            logger.warning("subreddit %r has %d usable thread(s); skipped", sub, len(ts))
            continue
        splits[sub] = split_by_post(ts, cfg.split_fraction, cfg.split_seed)
        summary[sub] = {
            "threads": len(ts),
            "comments": sum(len(t.comments) for t in ts),
            "train_threads": len(splits[sub].train_posts),
            "test_threads": len(splits[sub].test_posts),
        }
    write_threads(out / "threads.jsonl", (t for sub in splits for t in groups[sub]))
    write_split(out / "split.tsv", splits)
    info = {
        "posts_read": len(posts),
        "comments_read": len(comments),
        "duplicate_posts": dupes,
        "malformed_post_lines": [w.line for w in post_warn],
        "malformed_comment_lines": [w.line for w in comment_warn],
        "orphan_comments": orphans,
        "threads_below_min_comments": len(threads) - len(kept),
        "subreddits": summary,
    }
    (out / "ingest.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    record_stage(
        cfg, "ingest", {"posts": cfg.posts, "comments": cfg.comments},
        [out / "threads.jsonl", out / "split.tsv", out / "ingest.json"],
        {"orphan_comments": orphans, "malformed_lines": len(post_warn) + len(comment_warn)},
    )
    return info


def load_corpus(cfg: RunConfig):
    out = cfg.out
    threads = list(read_threads(_require(out / "threads.jsonl", "ingest")))
    splits = read_split(_require(out / "split.tsv", "ingest"), cfg.split_seed, cfg.split_fraction)
    return by_subreddit(threads), splits


def user_stats_for(threads, split) -> UserStats:
    return UserStats.from_threads(t for t in threads if t.post.id in split.train_posts)


# -- extract -----------------------------------------------------------------

def load_resources(cfg: RunConfig) -> Resources:
    problems = check_paths(cfg, ("embeddings", "reference_freq", "subjectivity_data"))
    if problems:
        raise StageInputError("; ".join(problems))
    return Resources(
        lexicon=load_lexicon(cfg.lexicon) if cfg.lexicon else default_lexicon(),
        stopwords=load_stopwords(cfg.stopwords) if cfg.stopwords else default_stopwords(),
        subjectivity=train_subjectivity(load_labeled_sentences(cfg.subjectivity_data)),
        reference_table=load_frequency_table(cfg.reference_freq),
        embeddings=load_embeddings(cfg.embeddings),
    )


_WORKER_RESOURCES: Resources | None = None


def _init_worker(resources: Resources) -> None:
    global _WORKER_RESOURCES
    _WORKER_RESOURCES = resources


def _extract_chunk(threads):
    return [extract_all(t, _WORKER_RESOURCES) for t in threads]


def extract_threads(threads, resources: Resources, workers: int = 1):
    """Feature vectors per thread, in input order; the result does not depend on ``workers``."""
    threads = list(threads)
    if workers <= 1 or len(threads) < PARALLEL_MIN_THREADS:
        return [extract_all(t, resources) for t in threads]
    size = max(1, len(threads) // (workers * 4))
    chunks = [threads[i:i + size] for i in range(0, len(threads), size)]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(resources,)) as pool:
        return [vecs for chunk in pool.map(_extract_chunk, chunks) for vecs in chunk]


def run_extract(cfg: RunConfig) -> Path:
    groups, splits = load_corpus(cfg)
    resources = load_resources(cfg)
    out = cfg.out
    (out / "freq").mkdir(exist_ok=True)
    freq_files = []
    rows = []
    for sub, threads in groups.items():
        split = splits[sub]
        table = build_frequency_table((c.body for t in threads for c in t.comments), source=sub)
        resources.subreddit_tables[sub] = table
        resources.user_stats[sub] = user_stats_for(threads, split)
        fpath = out / "freq" / f"{_safe(sub)}.tsv"
        save_frequency_table(table, fpath)
        freq_files.append(fpath)
        vectors = extract_threads(threads, resources, cfg.threads)
        for t, vecs in zip(threads, vectors):
            part = split.partition_of(t.post.id)
            rows += [(c, sub, part, v) for c, v in zip(t.comments, vecs)]
    path = out / "features.tsv"
    write_feature_dump(path, rows)
    inputs = {k: getattr(cfg, k) for k in ("embeddings", "reference_freq", "subjectivity_data", "lexicon",
                                          "stopwords") if getattr(cfg, k)}
    inputs["threads.jsonl"] = str(out / "threads.jsonl")
    flagged = sum(1 for r in rows if r[3].flags)
    record_stage(cfg, "extract", inputs, [path] + freq_files, {"comments": len(rows), "flagged_comments": flagged})
    return path


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name) or "_"


# -- train / evaluate --------------------------------------------------------

def run_train(cfg: RunConfig) -> list[Path]:
    out = cfg.out
    dump = read_feature_dump(_require(out / "features.tsv", "extract"))
    written = []
    for sub in sorted(set(dump.subreddits)):
        train = dump.where(sub, "train")
        folds = cfg.cv_folds
        if len(train) < folds:
            raise StageInputError(f"subreddit {sub!r}: {len(train)} training comments < cv_folds={folds}")
        (out / "models" / _safe(sub)).mkdir(parents=True, exist_ok=True)
        for family in cfg.families:
            model = train_family(train.X, train.scores, family, cfg.lambda_grid, folds, cfg.cv_seed, cfg.target)
            path = out / "models" / _safe(sub) / f"{family_slug(family)}.model"
            save_model(model, path)
            written.append(path)
            logger.info("%s / %s: lambda=%g", sub, family, model.lam)
    record_stage(cfg, "train", {"features.tsv": str(out / "features.tsv")}, written)
    return written


def evaluate_models(models: dict, dump, cfg: RunConfig, subreddit: str = ""):
    """One ranking report per family over the test rows in ``dump``."""
    reports = []
    for family, model in models.items():
        pred = predict(model, dump.X, REGISTRY)
        threads = group_threads(dump.post_ids, dump.comment_ids, dump.scores, pred)
        reports.append(evaluate_threads(threads, family, cfg.precision_k, cfg.kt_k, subreddit))
    return reports


def run_evaluate(cfg: RunConfig):
    out = cfg.out
    dump = read_feature_dump(_require(out / "features.tsv", "extract"))
    reports = []
    used = []
    for sub in sorted(set(dump.subreddits)):
        test = dump.where(sub, "test")
        models = {}
        for family in cfg.families:
            path = _require(out / "models" / _safe(sub) / f"{family_slug(family)}.model", "train")
            models[family] = load_model(path)
            used.append(path)
        reports += evaluate_models(models, test, cfg, sub)
    write_metrics_tsv(out / "metrics.tsv", reports)
    (out / "metrics.txt").write_text(format_table(reports), encoding="utf-8")
    inputs = {"features.tsv": str(out / "features.tsv")}
    inputs.update({str(p.relative_to(out)): str(p) for p in used})
    record_stage(cfg, "evaluate", inputs, [out / "metrics.tsv", out / "metrics.txt"])
    return reports


# -- posthoc / users ---------------------------------------------------------

def run_posthoc(cfg: RunConfig):
    out = cfg.out
    dump = read_feature_dump(_require(out / "features.tsv", "extract"))
    reports = []
    for sub in sorted(set(dump.subreddits)):
        rows = dump.where(sub)
        if len(rows) < 10:
            logger.warning("subreddit %r: %d comments, too few for a class split", sub, len(rows))
            continue
        split = class_split(rows.scores, cfg.low_pct, cfg.high_pct)
        if split.degenerate:
            logger.warning("subreddit %r: degenerate class split (scores too uniform)", sub)
        reports.append(posthoc_report(rows.X, REGISTRY, split, sub, permutation=cfg.permutation, seed=cfg.cv_seed))
    write_posthoc_tsv(out / "posthoc.tsv", reports)
    write_heatmap(out / "heatmap.tsv", reports, REGISTRY)
    record_stage(cfg, "posthoc", {"features.tsv": str(out / "features.tsv")},
                 [out / "posthoc.tsv", out / "heatmap.tsv"])
    return reports


def run_users(cfg: RunConfig):
    out = cfg.out
    groups, splits = load_corpus(cfg)
    reports = [user_impact(threads, user_stats_for(threads, splits[sub]), sub) for sub, threads in groups.items()]
    write_user_impact(out / "user_impact.tsv", reports)
    record_stage(cfg, "users", {"threads.jsonl": str(out / "threads.jsonl"), "split.tsv": str(out / "split.tsv")},
                 [out / "user_impact.tsv"])
    return reports


# -- report ------------------------------------------------------------------

def run_report(cfg: RunConfig) -> Path:
    out = cfg.out
    metrics = read_metrics_tsv(_require(out / "metrics.tsv", "evaluate"))
    posthoc = read_posthoc_tsv(_require(out / "posthoc.tsv", "posthoc"))
    heatmap = _require(out / "heatmap.tsv", "posthoc").read_text(encoding="utf-8")
    users_path = out / "user_impact.tsv"
    users = read_user_impact(users_path) if users_path.exists() else []

    sections = ["Evaluation of models", "", format_table(metrics).rstrip("\n"), ""]
    sections.append(f"Top features by KS effect size (p < 0.05, at most {TOP_N})")
    for sub, rep in sorted(posthoc.items()):
        sections.append(f"  {sub}:")
        for i, r in enumerate(rep.top, start=1):
            sign = "+" if r.mean_diff > 0 else "-" if r.mean_diff < 0 else "0"
            sections.append(f"    {i:2d}. {r.feature:<14s} D={r.d:.3f}  p={r.p_value:.2e}  {sign}  "
                            f"intensity={rep.intensity.get(r.feature, 0.0):.3f}")
    sections.append("")
    if users:
        sections.append("Threads whose top comment is by: top h-index user / most active user / flaired user")
        for u in users:
            sections.append(f"  {u.subreddit}: {u.top_h_index:.3f} / {u.top_activity:.3f} / {u.flaired:.3f}"
                            f"  ({u.threads} threads)")
        sections.append("")
    sections += ["Heatmap data (feature x subreddit, signed normalized effect size)", "", heatmap.rstrip("\n")]
    (out / "report.txt").write_text("\n".join(sections) + "\n", encoding="utf-8")
    (out / "report.tsv").write_text((out / "metrics.tsv").read_text(encoding="utf-8"), encoding="utf-8")
    inputs = {name: str(out / name) for name in ("metrics.tsv", "posthoc.tsv", "heatmap.tsv")}
    if users:
        inputs["user_impact.tsv"] = str(users_path)
    record_stage(cfg, "report", inputs, [out / "report.txt", out / "report.tsv"])
    return out / "report.txt"


RUNNERS = {
    "ingest": run_ingest,
    "extract": run_extract,
    "train": run_train,
    "evaluate": run_evaluate,
    "posthoc": run_posthoc,
    "users": run_users,
    "report": run_report,
}


def run_all(cfg: RunConfig) -> None:
    for stage in STAGES:
        RUNNERS[stage](cfg)
