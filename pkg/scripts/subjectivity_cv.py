"""5-fold accuracy of the naive Bayes subjectivity classifier.

With a directory argument, reads the Pang & Lee subjectivity v1.0 files
(quote.tok.gt9.5000 = subjective, plot.tok.gt9.5000 = objective).
Without one, uses the synthetic corpus the generator ships.
"""
import argparse
import tempfile
from pathlib import Path

from commentrank.subjectivity import cross_validate, load_labeled_sentences, load_pang_lee
from commentrank.synth import SynthConfig, generate


def synthetic_examples():
    with tempfile.TemporaryDirectory() as tmp:
        generate(SynthConfig(n_threads=2, comments_per_thread=5, weights={"time_diff": -1.0}), tmp)
        return load_labeled_sentences(Path(tmp) / "subjectivity.tsv")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("data_dir", nargs="?", type=Path)
    ap.add_argument("--folds", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if args.data_dir:
        examples = load_pang_lee(args.data_dir / "quote.tok.gt9.5000", args.data_dir / "plot.tok.gt9.5000")
    else:
        examples = synthetic_examples()
    acc = cross_validate(examples, folds=args.folds, seed=args.seed)
    print(f"{len(examples)} examples, {args.folds}-fold accuracy {acc:.4f}")


if __name__ == "__main__":
    main()
