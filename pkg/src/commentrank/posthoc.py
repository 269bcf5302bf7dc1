"""Which features separate high- from low-scoring comments.

Comments are split at the nearest-rank 50th and 90th score percentiles of
their subreddit. Each feature is then compared across the two classes with
the two-sample Kolmogorov-Smirnov statistic.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Thread
from .features import UserStats
from .rng import SplitMix64

TOP_N = 15
ALPHA = 0.05
SERIES_TERMS = 100
# below this the 100-term series has not converged; Q(0.2) = 1 - 5e-13
SMALL_LAMBDA = 0.2


def nearest_rank(sorted_values: Sequence[float], pct: float) -> float:
    """Nearest-rank percentile: the value at 1-based rank ceil(pct/100 * n)."""
    n = len(sorted_values)
    rank = max(1, math.ceil(pct / 100.0 * n))
    return sorted_values[min(rank, n) - 1]


@dataclass(frozen=True)
class ClassSplit:
    low: np.ndarray
    high: np.ndarray
    low_cut: float
    high_cut: float
    n: int
    degenerate: bool = False

    @property
    def excluded(self) -> int:
        return self.n - len(self.low) - len(self.high)


def class_split(scores: Sequence[float], low_pct: float = 50, high_pct: float = 90) -> ClassSplit:
    """Index sets of comments scoring below P_low and above P_high."""
    s = np.asarray(scores, dtype=np.float64)
    if len(s) < 10:
        raise ValueError("class split needs at least 10 comments")
    ordered = np.sort(s)
    lo = nearest_rank(ordered, low_pct)
    hi = nearest_rank(ordered, high_pct)
    low = np.flatnonzero(s < lo)
    high = np.flatnonzero(s > hi)
    return ClassSplit(low, high, float(lo), float(hi), len(s), degenerate=len(low) == 0 or len(high) == 0)


def ks_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    """sup |ECDF_a - ECDF_b| over the pooled sample."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("KS statistic needs two non-empty samples")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / len(a)
    fb = np.searchsorted(b, pooled, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def ks_pvalue(d: float, n_a: int, n_b: int) -> float:
    """Asymptotic two-sided p-value with the small-sample effective-n correction."""
    ne = n_a * n_b / (n_a + n_b)
    sq = math.sqrt(ne)
    lam = (sq + 0.12 + 0.11 / sq) * d
    if lam < SMALL_LAMBDA:
        return 1.0
    total = 0.0
    for j in range(1, SERIES_TERMS + 1):
        total += (-1) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
    return min(1.0, max(0.0, 2.0 * total))


def ks_permutation_pvalue(a: Sequence[float], b: Sequence[float], n_perm: int = 2000, seed: int = 0) -> float:
    """Monte Carlo permutation p-value for small samples, ``(hits + 1) / (n_perm + 1)``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    observed = ks_statistic(a, b)
    pooled = np.concatenate([a, b])
    gen = SplitMix64(seed)
    hits = 0
    for _ in range(n_perm):
        perm = pooled.copy()
        for i in range(len(perm) - 1, 0, -1):
            j = gen.next() % (i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        if ks_statistic(perm[:len(a)], perm[len(a):]) >= observed - 1e-12:
            hits += 1
    return (hits + 1) / (n_perm + 1)


@dataclass(frozen=True)
class KSResult:
    feature: str
    d: float
    p_value: float
    mean_diff: float
    n_low: int
    n_high: int

    @property
    def significant(self) -> bool:
        return self.p_value < ALPHA


@dataclass
class PosthocReport:
    subreddit: str
    results: list[KSResult] = field(default_factory=list)
    top: list[KSResult] = field(default_factory=list)
    intensity: dict[str, float] = field(default_factory=dict)
    degenerate: bool = False
    low_cut: float = float("nan")
    high_cut: float = float("nan")

    def signed_intensity(self, feature: str) -> float | None:
        """sign(mean_diff) * normalized D for top features, else None."""
        for r in self.top:
            if r.feature == feature:
                return math.copysign(self.intensity[feature], r.mean_diff) if r.mean_diff else 0.0
        return None


def posthoc_report(X: np.ndarray, names: Sequence[str], split: ClassSplit, subreddit: str = "",
                   top_n: int = TOP_N, permutation: int = 0, seed: int = 0) -> PosthocReport:
    """KS effect size of every feature between the high and low classes.

    ``permutation > 0`` replaces the asymptotic p-value by a permutation test
    with that many shuffles.
    """
    report = PosthocReport(subreddit, low_cut=split.low_cut, high_cut=split.high_cut)
    if split.degenerate:
        report.degenerate = True
        return report
    X = np.asarray(X, dtype=np.float64)
    lo_rows, hi_rows = X[split.low], X[split.high]
    for j, name in enumerate(names):
        lo, hi = lo_rows[:, j], hi_rows[:, j]
        d = ks_statistic(hi, lo)
        p = ks_permutation_pvalue(hi, lo, permutation, seed) if permutation else ks_pvalue(d, len(lo), len(hi))
        report.results.append(KSResult(name, d, p, float(hi.mean() - lo.mean()), len(lo), len(hi)))
    sig = sorted((r for r in report.results if r.significant), key=lambda r: (-r.d, r.feature))
    report.top = sig[:top_n]
    if sig:
        dmax = sig[0].d
        report.intensity = {r.feature: r.d / dmax for r in sig}
    return report


# -- user impact -------------------------------------------------------------

@dataclass(frozen=True)
class UserImpactReport:
    subreddit: str
    threads: int
    top_h_index: float
    top_activity: float
    flaired: float


def user_impact(threads: Iterable[Thread], stats: UserStats, subreddit: str = "") -> UserImpactReport:
    """Share of threads whose top comment comes from the max-h-index participant,
    the most active participant, or a flaired author.

    The top comment has the highest score (ties: smallest id). Ties among
    participants count as a hit when the top comment's author reaches the max.
    """
    n = hits_h = hits_a = hits_f = 0
    for t in threads:
        if not t.comments:
            continue
        n += 1
        top = min(t.comments, key=lambda c: (-c.score, c.id))
        authors = {c.author for c in t.comments}
        h = {a: stats.h_index.get(a, 0) for a in authors}
        act = {a: stats.activity.get(a, 0) for a in authors}
        hits_h += h[top.author] == max(h.values())
        hits_a += act[top.author] == max(act.values())
        hits_f += bool(top.flair)
    frac = (lambda x: x / n) if n else (lambda x: 0.0)
    return UserImpactReport(subreddit, n, frac(hits_h), frac(hits_a), frac(hits_f))


# -- files -------------------------------------------------------------------

def write_posthoc_tsv(path, reports: Sequence[PosthocReport]) -> None:
    lines = ["subreddit\tfeature\tD\tp_value\tmean_diff\tn_low\tn_high\tsignificant\trank\tintensity"]
    for rep in reports:
        ranks = {r.feature: i + 1 for i, r in enumerate(rep.top)}
        for r in sorted(rep.results, key=lambda r: (-r.d, r.feature)):
            inten = rep.intensity.get(r.feature)
            lines.append("\t".join([
                rep.subreddit, r.feature, repr(r.d), repr(r.p_value), repr(r.mean_diff),
                str(r.n_low), str(r.n_high), "1" if r.significant else "0",
                str(ranks.get(r.feature, "")), "" if inten is None else repr(inten),
            ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_posthoc_tsv(path) -> dict[str, PosthocReport]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split("\t")
    reports: dict[str, PosthocReport] = {}
    ranked: dict[str, list[tuple[int, KSResult]]] = defaultdict(list)
    for line in lines[1:]:
        row = dict(zip(header, line.split("\t")))
        rep = reports.setdefault(row["subreddit"], PosthocReport(row["subreddit"]))
        r = KSResult(row["feature"], float(row["D"]), float(row["p_value"]), float(row["mean_diff"]),
                     int(row["n_low"]), int(row["n_high"]))
        rep.results.append(r)
        if row["rank"]:
            ranked[rep.subreddit].append((int(row["rank"]), r))
        if row["intensity"]:
            rep.intensity[r.feature] = float(row["intensity"])
    for sub, items in ranked.items():
        reports[sub].top = [r for _, r in sorted(items, key=lambda x: x[0])]
    return reports


def write_heatmap(path, reports: Sequence[PosthocReport], features: Sequence[str]) -> None:
    """Rows = features, columns = subreddits, cells = signed normalized effect size.

    Empty cells mark features outside a subreddit's significant top list.
    """
    subs = [r.subreddit for r in reports]
    lines = ["\t".join(["feature"] + subs)]
    for f in features:
        cells = []
        for rep in reports:
            v = rep.signed_intensity(f)
            cells.append("" if v is None else repr(v))
        lines.append("\t".join([f] + cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_user_impact(path, reports: Sequence[UserImpactReport]) -> None:
    lines = ["subreddit\tthreads\ttop_h_index\ttop_activity\tflaired"]
    for r in reports:
        lines.append(f"{r.subreddit}\t{r.threads}\t{r.top_h_index!r}\t{r.top_activity!r}\t{r.flaired!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_user_impact(path) -> list[UserImpactReport]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    out = []
    for line in lines[1:]:
        sub, n, h, a, f = line.split("\t")
        out.append(UserImpactReport(sub, int(n), float(h), float(a), float(f)))
    return out
