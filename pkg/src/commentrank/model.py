"""Standardized ridge regression with cross-validated regularization.

Model file (UTF-8, tab separated, one key per line then a feature table)::

    family<TAB>All
    lambda<TAB>0.1
    intercept<TAB>12.5
    seed<TAB>7
    target<TAB>raw
    standardized<TAB>1
    feature<TAB>mean<TAB>std<TAB>weight
    time_diff<TAB>...

Floats are written with ``repr`` so a save/load round trip is bit exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from .features import (
    CONTENT_FEATURES,
    REGISTRY,
    RELEVANCE_FEATURES,
    SENTIMENT_FEATURES,
    TIME_FEATURES,
)
from .rng import fold_slices, shuffled

DEFAULT_LAMBDAS = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0)

FAMILIES: dict[str, tuple[str, ...]] = {
    "Time": TIME_FEATURES,
    "Time+Sentiment": TIME_FEATURES + SENTIMENT_FEATURES,
    "Time+Relevance": TIME_FEATURES + RELEVANCE_FEATURES,
    "Time+Content": TIME_FEATURES + CONTENT_FEATURES,
    "All": tuple(n for n in REGISTRY),
}
FAMILY_ORDER = tuple(FAMILIES)


class SingularSystemError(np.linalg.LinAlgError):
    pass


def family_features(name: str) -> tuple[str, ...]:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown feature family {name!r}; choose from {', '.join(FAMILIES)}") from None


def signed_log(y):
    y = np.asarray(y, dtype=np.float64)
    return np.sign(y) * np.log1p(np.abs(y))


@dataclass(frozen=True)
class StandardizationStats:
    names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray

    @property
    def zero_variance(self) -> np.ndarray:
        return self.std == 0.0

    def transform(self, X: np.ndarray) -> np.ndarray:
        scale = np.where(self.std == 0.0, 1.0, self.std)
        return (X - self.mean) / scale


def standardize_fit(X: np.ndarray, names: Sequence[str]) -> StandardizationStats:
    """Column means and population standard deviations."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("standardization needs at least 2 training rows")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    # exactly constant columns can leave rounding residue in std
    std[np.all(X == X[0], axis=0)] = 0.0
    return StandardizationStats(tuple(names), mean, std)


@dataclass(frozen=True)
class RidgeModel:
    names: tuple[str, ...]
    weights: np.ndarray
    intercept: float
    lam: float
    stats: StandardizationStats | None = None
    family: str = ""
    seed: int = 0
    target: str = "raw"

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.stats is not None:
            X = self.stats.transform(X)
        return X @ self.weights + self.intercept


def ridge_fit(X: np.ndarray, y: np.ndarray, lam: float) -> tuple[np.ndarray, float]:
    """Solve ``(Xc'Xc + lam I) w = Xc'yc`` on centered data; returns ``(w, intercept)``.

    The intercept is not penalized. Zero-variance columns get weight 0. The
    system is solved directly (Cholesky for lam > 0, LU for lam = 0).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if X.shape[0] < 1:
        raise ValueError("need at least one row")
    xm = X.mean(axis=0)
    ym = float(y.mean())
    Xc = X - xm
    yc = y - ym
    live = ~np.all(X == X[0], axis=0)
    w = np.zeros(X.shape[1])
    if live.any():
        A = Xc[:, live]
        G = A.T @ A
        b = A.T @ yc
        if lam > 0:
            G[np.diag_indices_from(G)] += lam
            w[live] = scipy.linalg.solve(G, b, assume_a="pos")
        else:
            if np.linalg.matrix_rank(G) < G.shape[0]:
                raise SingularSystemError("X'X is singular at lambda=0; use lambda > 0")
            w[live] = scipy.linalg.solve(G, b, assume_a="sym")
    return w, ym - float(xm @ w)


def fit(X: np.ndarray, y: np.ndarray, names: Sequence[str], lam: float, *,
        standardize: bool = True, family: str = "", seed: int = 0, target: str = "raw") -> RidgeModel:
    X = np.asarray(X, dtype=np.float64)
    stats = standardize_fit(X, names) if standardize else None
    Z = stats.transform(X) if stats is not None else X
    yt = signed_log(y) if target == "signed_log" else np.asarray(y, dtype=np.float64)
    w, b = ridge_fit(Z, yt, lam)
    return RidgeModel(tuple(names), w, b, float(lam), stats, family, seed, target)


def predict(model: RidgeModel, X: np.ndarray, names: Sequence[str] = REGISTRY) -> np.ndarray:
    """Predict from a matrix whose columns are ``names`` (default: the full registry)."""
    names = list(names)
    missing = [n for n in model.names if n not in names]
    if missing:
        raise KeyError(f"feature(s) missing for prediction: {', '.join(missing)}")
    cols = [names.index(n) for n in model.names]
    X = np.asarray(X, dtype=np.float64)
    return model.predict_matrix(X[:, cols])


def cv_fold_mse(X: np.ndarray, y: np.ndarray, lambdas: Sequence[float], folds: int = 10, seed: int = 0,
                standardize: bool = True) -> np.ndarray:
    """Mean held-out squared error for each lambda (folds over a seeded row shuffle)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    order = np.asarray(shuffled(range(n), seed), dtype=np.int64)
    errs = np.zeros((len(lambdas), folds))
    for f, sl in enumerate(fold_slices(n, folds)):
        held = order[sl]
        train = np.concatenate([order[:sl.start], order[sl.stop:]])
        Xtr, Xte = X[train], X[held]
        if standardize:
            stats = standardize_fit(Xtr, [str(i) for i in range(X.shape[1])])
            Xtr, Xte = stats.transform(Xtr), stats.transform(Xte)
        for li, lam in enumerate(lambdas):
            w, b = ridge_fit(Xtr, y[train], lam)
            resid = Xte @ w + b - y[held]
            errs[li, f] = float(np.mean(resid * resid))
    return errs.mean(axis=1)


def cv_select_lambda(X: np.ndarray, y: np.ndarray, lambdas: Sequence[float] = DEFAULT_LAMBDAS,
                     folds: int = 10, seed: int = 0, standardize: bool = True) -> float:
    """Grid value with the smallest mean held-out MSE; ties go to the smaller lambda."""
    if len(lambdas) == 0:
        raise ValueError("lambda grid is empty")
    if np.asarray(X).shape[0] < max(folds, 2):
        raise ValueError(f"need at least {folds} rows for {folds}-fold cross validation")
    grid = sorted(float(l) for l in lambdas)
    if len(grid) == 1:
        return grid[0]
    mse = cv_fold_mse(X, y, grid, folds, seed, standardize)
    best = 0
    for i in range(1, len(grid)):
        if mse[i] < mse[best]:
            best = i
    return grid[best]


def train_family(X: np.ndarray, y: np.ndarray, family: str, lambdas: Sequence[float] = DEFAULT_LAMBDAS,
                 folds: int = 10, seed: int = 0, target: str = "raw") -> RidgeModel:
    """Select lambda by CV and refit on all rows, for one feature family.

    ``X`` holds the full registry in column order.
    """
    names = family_features(family)
    cols = [REGISTRY.index(n) for n in names]
    Xf = np.asarray(X, dtype=np.float64)[:, cols]
    yt = signed_log(y) if target == "signed_log" else np.asarray(y, dtype=np.float64)
    lam = cv_select_lambda(Xf, yt, lambdas, folds, seed)
    return fit(Xf, y, names, lam, family=family, seed=seed, target=target)


# -- persistence -------------------------------------------------------------

def _f(x: float) -> str:
    return repr(float(x))


def save_model(model: RidgeModel, path) -> None:
    lines = [
        f"family\t{model.family}",
        f"lambda\t{_f(model.lam)}",
        f"intercept\t{_f(model.intercept)}",
        f"seed\t{model.seed}",
        f"target\t{model.target}",
        f"standardized\t{1 if model.stats is not None else 0}",
        "feature\tmean\tstd\tweight",
    ]
    for i, name in enumerate(model.names):
        mean = model.stats.mean[i] if model.stats is not None else 0.0
        std = model.stats.std[i] if model.stats is not None else 1.0
        lines.append(f"{name}\t{_f(mean)}\t{_f(std)}\t{_f(model.weights[i])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> RidgeModel:
    header: dict[str, str] = {}
    names, means, stds, weights = [], [], [], []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            key, _, rest = line.rstrip("\n").partition("\t")
            if key == "feature":
                break
            header[key] = rest
        for line in fh:
            if not line.strip():
                continue
            name, mean, std, weight = line.rstrip("\n").split("\t")
            names.append(name)
            means.append(float(mean))
            stds.append(float(std))
            weights.append(float(weight))
    stats = None
    if header.get("standardized", "1") == "1":
        stats = StandardizationStats(tuple(names), np.array(means), np.array(stds))
    return RidgeModel(
        names=tuple(names),
        weights=np.array(weights),
        intercept=float(header["intercept"]),
        lam=float(header["lambda"]),
        stats=stats,
        family=header.get("family", ""),
        seed=int(header.get("seed", 0)),
        target=header.get("target", "raw"),
    )


def family_slug(family: str) -> str:
    return family.lower().replace("+", "_")

