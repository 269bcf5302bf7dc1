"""Per-thread ranking metrics: precision@k and Kendall-tau distance@k.

Both metrics take the comment ids and the true and predicted scores of one
thread. Top-k sets order by score descending and break ties by comment id.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PRECISION_KS = (1, 3, 5, 10)
KT_KS = (5, 10, 20)


def top_k(ids: Sequence[str], scores: Sequence[float], k: int) -> list[int]:
    """Indices of the k best items, best first (score descending, id ascending)."""
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))
    return order[:k]


def precision_at_k(ids: Sequence[str], true: Sequence[float], pred: Sequence[float], k: int) -> float | None:
    """Share of the predicted top-k that is in the true top-k; None if the thread has fewer than k items."""
    if k < 1 or len(ids) < k:
        return None
    hits = set(top_k(ids, true, k)) & set(top_k(ids, pred, k))
    return len(hits) / k


def kt_distance_at_k(ids: Sequence[str], true: Sequence[float], pred: Sequence[float], k: int) -> float | None:
    """Discordant pairs among the true top-k when re-ordered by predicted score.

    A pair with distinct true scores is discordant when the predicted order
    contradicts it and counts 0.5 when the predicted scores tie. Pairs with
    equal true scores never count. None if the thread has fewer than k items.
    """
    if k < 1 or len(ids) < k:
        return None
    idx = np.asarray(top_k(ids, true, k))
    t = np.asarray(true, dtype=np.float64)[idx]
    p = np.asarray(pred, dtype=np.float64)[idx]
    dt = np.sign(t[:, None] - t[None, :])
    dp = np.sign(p[:, None] - p[None, :])
    iu = np.triu_indices(len(idx), 1)
    dt, dp = dt[iu], dp[iu]
    ordered = dt != 0
    discord = np.count_nonzero(ordered & (dt * dp < 0))
    ties = np.count_nonzero(ordered & (dp == 0))
    return discord + 0.5 * ties


@dataclass
class MetricSummary:
    mean: float
    eligible: int
    ineligible: int


@dataclass
class RankingMetricsReport:
    family: str
    precision_at: dict[int, MetricSummary] = field(default_factory=dict)
    kt_at: dict[int, MetricSummary] = field(default_factory=dict)
    subreddit: str = ""


@dataclass(frozen=True)
class RankedThread:
    post_id: str
    comment_ids: tuple[str, ...]
    true_scores: tuple[float, ...]
    predicted: tuple[float, ...]

    @property
    def order(self) -> list[int]:
        return top_k(self.comment_ids, self.predicted, len(self.comment_ids))


def _summarize(values: list[float | None]) -> MetricSummary:
    got = [v for v in values if v is not None]
    mean = float(np.mean(got)) if got else float("nan")
    return MetricSummary(mean, len(got), len(values) - len(got))


def evaluate_threads(threads: Iterable[RankedThread], family: str, precision_ks: Sequence[int] = PRECISION_KS,
                     kt_ks: Sequence[int] = KT_KS, subreddit: str = "") -> RankingMetricsReport:
    """Mean metrics over threads; threads smaller than k are excluded from that k."""
    threads = sorted(threads, key=lambda t: t.post_id)
    report = RankingMetricsReport(family, subreddit=subreddit)
    for k in precision_ks:
        report.precision_at[k] = _summarize(
            [precision_at_k(t.comment_ids, t.true_scores, t.predicted, k) for t in threads]
        )
    for k in kt_ks:
        report.kt_at[k] = _summarize([kt_distance_at_k(t.comment_ids, t.true_scores, t.predicted, k) for t in threads])
    return report


def group_threads(post_ids: Sequence[str], comment_ids: Sequence[str], true: Sequence[float],
                  pred: Sequence[float]) -> list[RankedThread]:
    """Collect flat per-comment rows into per-post ranked threads."""
    rows: dict[str, list[int]] = defaultdict(list)
    for i, pid in enumerate(post_ids):
        rows[pid].append(i)
    out = []
    for pid in sorted(rows):
        idx = rows[pid]
        out.append(RankedThread(
            pid,
            tuple(comment_ids[i] for i in idx),
            tuple(float(true[i]) for i in idx),
            tuple(float(pred[i]) for i in idx),
        ))
    return out


# -- report files ------------------------------------------------------------

def _cell(x: float) -> str:
    return "nan" if x != x else f"{x:.6g}"


def metrics_header(precision_ks: Sequence[int] = PRECISION_KS, kt_ks: Sequence[int] = KT_KS) -> list[str]:
    cols = ["subreddit", "family"]
    cols += [f"P@{k}" for k in precision_ks] + [f"KT@{k}" for k in kt_ks]
    cols += [f"n_P@{k}" for k in precision_ks] + [f"n_KT@{k}" for k in kt_ks]
    return cols


def write_metrics_tsv(path, reports: Sequence[RankingMetricsReport]) -> None:
    if not reports:
        Path(path).write_text("\t".join(metrics_header()) + "\n", encoding="utf-8")
        return
    pks = list(reports[0].precision_at)
    kks = list(reports[0].kt_at)
    lines = ["\t".join(metrics_header(pks, kks))]
    for r in reports:
        cells = [r.subreddit, r.family]
        cells += [repr(r.precision_at[k].mean) for k in pks] + [repr(r.kt_at[k].mean) for k in kks]
        cells += [str(r.precision_at[k].eligible) for k in pks] + [str(r.kt_at[k].eligible) for k in kks]
        lines.append("\t".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_metrics_tsv(path) -> list[RankingMetricsReport]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split("\t")
    pks = [int(c[2:]) for c in header if c.startswith("P@")]
    kks = [int(c[3:]) for c in header if c.startswith("KT@")]
    out = []
    for line in lines[1:]:
        row = dict(zip(header, line.split("\t")))
        r = RankingMetricsReport(row["family"], subreddit=row["subreddit"])
        for k in pks:
            r.precision_at[k] = MetricSummary(float(row[f"P@{k}"]), int(row[f"n_P@{k}"]), 0)
        for k in kks:
            r.kt_at[k] = MetricSummary(float(row[f"KT@{k}"]), int(row[f"n_KT@{k}"]), 0)
        out.append(r)
    return out


def format_table(reports: Sequence[RankingMetricsReport]) -> str:
    """Text table laid out like the evaluation table: dataset, model, P@k..., KT@k..."""
    if not reports:
        return "(no results)\n"
    pks = list(reports[0].precision_at)
    kks = list(reports[0].kt_at)
    head = ["Dataset", "Model"] + [f"P@{k}" for k in pks] + [f"KT@{k}" for k in kks]
    body = []
    last = None
    for r in reports:
        name = r.subreddit if r.subreddit != last else ""
        last = r.subreddit
        body.append([name, r.family] + [_cell(r.precision_at[k].mean) for k in pks]
                    + [_cell(r.kt_at[k].mean) for k in kks])
    widths = [max(len(row[i]) for row in [head] + body) for i in range(len(head))]
    fmt = lambda row: "  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths)))  # noqa: E731
    rule = "-" * len(fmt(head))
    lines = [fmt(head), rule] + [fmt(row) for row in body]
    counts = []
    for r in reports:
        if r.family == reports[0].family:
            elig = ", ".join(f"P@{k}:{r.precision_at[k].eligible}" for k in pks)
            elig += ", " + ", ".join(f"KT@{k}:{r.kt_at[k].eligible}" for k in kks)
            counts.append(f"{r.subreddit or '-'} eligible threads: {elig}")
    return "\n".join(lines + [rule] + counts) + "\n"

