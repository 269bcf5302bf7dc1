"""Generate a synthetic corpus with planted weights and run the full pipeline on it.

    python scripts/run_synthetic_benchmark.py /tmp/bench --seed 42 --noise 0.1
"""
import argparse
import time
from pathlib import Path

from commentrank.config import build_config
from commentrank.pipeline import run_all
from commentrank.ranking import read_metrics_tsv
from commentrank.synth import SynthConfig, generate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    ap.add_argument("--threads", type=int, default=200)
    ap.add_argument("--comments", type=int, default=20)
    ap.add_argument("--noise", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    generate(SynthConfig(n_threads=args.threads, comments_per_thread=args.comments,
                         noise=args.noise, seed=args.seed), args.out)
    cfg = build_config(args.out / "run.cfg", [f"output_dir={args.out / 'run'}"])
    run_all(cfg)
    elapsed = time.perf_counter() - t0

    for r in read_metrics_tsv(cfg.out / "metrics.tsv"):
        p = "  ".join(f"P@{k}={v.mean:.3f}" for k, v in r.precision_at.items())
        kt = "  ".join(f"KT@{k}={v.mean:.3f}" for k, v in r.kt_at.items())
        print(f"{r.family:<15} {p}  {kt}")
    print(f"total {elapsed:.1f} s, artifacts in {cfg.out}")


if __name__ == "__main__":
    main()
