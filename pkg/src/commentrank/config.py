"""Run configuration: a flat ``key = value`` file plus command-line overrides.

Keys (defaults in brackets)::

    posts, comments              input dumps (required for ingest)
    embeddings, reference_freq   word vectors and reference frequency table
    subjectivity_data            labeled subj/obj TSV
    lexicon, stopwords           [bundled starter resources]
    output_dir                   [run]
    split_seed [0], split_fraction [0.8], min_comments [5]
    cv_seed [0], cv_folds [10], lambda_grid [0.001,0.01,0.1,1,10,100,1000]
    target [raw | signed_log]
    families [Time,Time+Sentiment,Time+Relevance,Time+Content,All]
    precision_k [1,3,5,10], kt_k [5,10,20]
    low_pct [50], high_pct [90], permutation [0]
    threads [number of CPUs]

Relative paths are resolved against the directory of the config file.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .model import DEFAULT_LAMBDAS, FAMILIES, FAMILY_ORDER
from .ranking import KT_KS, PRECISION_KS

PATH_KEYS = ("posts", "comments", "embeddings", "reference_freq", "subjectivity_data", "lexicon", "stopwords")


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid configuration:\n  " + "\n  ".join(problems))


@dataclass
class RunConfig:
    posts: str = ""
    comments: str = ""
    embeddings: str = ""
    reference_freq: str = ""
    subjectivity_data: str = ""
    lexicon: str = ""
    stopwords: str = ""
    output_dir: str = "run"
    split_seed: int = 0
    split_fraction: float = 0.8
    min_comments: int = 5
    cv_seed: int = 0
    cv_folds: int = 10
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDAS
    target: str = "raw"
    families: tuple[str, ...] = FAMILY_ORDER
    precision_k: tuple[int, ...] = PRECISION_KS
    kt_k: tuple[int, ...] = KT_KS
    low_pct: float = 50.0
    high_pct: float = 90.0
    permutation: int = 0
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)

    @property
    def out(self) -> Path:
        return Path(self.output_dir)

    def effective(self) -> dict:
        """Config as written to the manifest (thread count excluded: it never changes results)."""
        d = asdict(self)
        d.pop("threads")
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


_CASTS = {
    "split_seed": int, "min_comments": int, "cv_seed": int, "cv_folds": int, "permutation": int, "threads": int,
    "split_fraction": float, "low_pct": float, "high_pct": float,
    "lambda_grid": lambda v: tuple(float(x) for x in _split_list(v)),
    "families": lambda v: tuple(_split_list(v)),
    "precision_k": lambda v: tuple(int(x) for x in _split_list(v)),
    "kt_k": lambda v: tuple(int(x) for x in _split_list(v)),
}
KNOWN_KEYS = {f.name for f in fields(RunConfig)}


def parse_pairs(lines, base: Path | None = None, source: str = "config") -> tuple[dict, list[str]]:
    values, problems = {}, []
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            problems.append(f"{source}:{lineno}: expected 'key = value'")
            continue
        if key not in KNOWN_KEYS:
            problems.append(f"{source}:{lineno}: unknown key {key!r}")
            continue
        if key in PATH_KEYS or key == "output_dir":
            if value and base is not None and not Path(value).is_absolute():
                value = str(base / value)
        values[key] = value
    return values, problems


def build_config(path=None, overrides: list[str] = ()) -> RunConfig:
    """Read the config file, apply ``key=value`` overrides and validate everything at once."""
    raw, problems = {}, []
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError([f"config file {path} not found"])
        vals, probs = parse_pairs(path.read_text(encoding="utf-8").splitlines(), path.parent, path.name)
        raw.update(vals)
        problems += probs
    vals, probs = parse_pairs(overrides, Path.cwd(), "command line")
    raw.update(vals)
    problems += probs

    kwargs = {}
    for key, value in raw.items():
        try:
            kwargs[key] = _CASTS.get(key, str)(value)
        except ValueError:
            problems.append(f"{key}: cannot parse {value!r}")
    cfg = RunConfig(**kwargs)
    problems += check_values(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def check_values(cfg: RunConfig) -> list[str]:
    problems = []
    if not 0.0 < cfg.split_fraction < 1.0:
        problems.append("split_fraction must lie strictly between 0 and 1")
    if cfg.min_comments < 1:
        problems.append("min_comments must be >= 1")
    if cfg.cv_folds < 2:
        problems.append("cv_folds must be >= 2")
    if not cfg.lambda_grid or any(l < 0 for l in cfg.lambda_grid):
        problems.append("lambda_grid must be a non-empty list of values >= 0")
    if not cfg.precision_k or any(k < 1 for k in cfg.precision_k):
        problems.append("precision_k must be a non-empty list of positive integers")
    if not cfg.kt_k or any(k < 1 for k in cfg.kt_k):
        problems.append("kt_k must be a non-empty list of positive integers")
    unknown = [f for f in cfg.families if f not in FAMILIES]
    if unknown or not cfg.families:
        problems.append(f"families: unknown {unknown}; choose from {', '.join(FAMILY_ORDER)}")
    if not 0 <= cfg.low_pct <= cfg.high_pct <= 100:
        problems.append("need 0 <= low_pct <= high_pct <= 100")
    if cfg.target not in ("raw", "signed_log"):
        problems.append("target must be 'raw' or 'signed_log'")
    if cfg.threads < 1:
        problems.append("threads must be >= 1")
    return problems


def check_paths(cfg: RunConfig, keys) -> list[str]:
    problems = []
    for key in keys:
        value = getattr(cfg, key)
        if not value:
            problems.append(f"{key} is not set")
        elif not Path(value).is_file():
            problems.append(f"{key}: file {value} does not exist")
    for key in ("lexicon", "stopwords"):
        value = getattr(cfg, key)
        if key in keys or not value:
            continue
        if not Path(value).is_file():
            problems.append(f"{key}: file {value} does not exist")
    return problems
