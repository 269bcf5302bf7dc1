import json

import pytest

from commentrank.cli import main
from commentrank.config import ConfigError, RunConfig, build_config
from commentrank.pipeline import (
    STAGES,
    extract_threads,
    load_corpus,
    load_resources,
    user_stats_for,
)
from commentrank.textstats import build_frequency_table

ARTIFACTS = ("threads.jsonl", "split.tsv", "ingest.json", "features.tsv", "metrics.tsv", "metrics.txt",
             "posthoc.tsv", "heatmap.tsv", "user_impact.tsv", "report.txt", "report.tsv", "manifest.json")


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    assert main(["synth", str(d), "--threads", "30", "--comments", "10", "--seed", "7"]) == 0
    return d


def run_cli(cfg, out, *stages, extra=()):
    codes = []
    for stage in stages:
        codes.append(main([stage, "-c", str(cfg), "--set", f"output_dir={out}", *extra]))
    return codes


def test_full_pipeline(synth_dir, tmp_path):
    out = tmp_path / "run"
    assert run_cli(synth_dir / "run.cfg", out, "all") == [0]
    for name in ARTIFACTS:
        assert (out / name).exists(), name
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["stages"]) == set(STAGES)
    for stage, entry in manifest["stages"].items():
        assert entry["inputs"] and entry["outputs"], stage
        assert entry["seeds"] == {"split_seed": 0, "cv_seed": 0}
    assert manifest["config"]["output_dir"] == str(out)
    assert "threads" not in manifest["config"]
    models = list((out / "models").rglob("*.model"))
    assert len(models) == 5


def test_stages_one_by_one_match_all(synth_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(synth_dir / "run.cfg", a, "all") == [0]
    assert run_cli(synth_dir / "run.cfg", b, *STAGES) == [0] * len(STAGES)
    for name in ARTIFACTS[:-1]:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_stage_rerun_is_idempotent(synth_dir, tmp_path):
    out = tmp_path / "run"
    run_cli(synth_dir / "run.cfg", out, "all")
    before = (out / "metrics.tsv").read_bytes()
    assert run_cli(synth_dir / "run.cfg", out, "evaluate") == [0]
    assert (out / "metrics.tsv").read_bytes() == before


def test_evaluate_before_train_names_train(synth_dir, tmp_path, capsys):
    out = tmp_path / "run"
    assert run_cli(synth_dir / "run.cfg", out, "ingest", "extract") == [0, 0]
    capsys.readouterr()
    assert run_cli(synth_dir / "run.cfg", out, "evaluate") == [1]
    assert "`train`" in capsys.readouterr().err


def test_extract_before_ingest_names_ingest(synth_dir, tmp_path, capsys):
    assert run_cli(synth_dir / "run.cfg", tmp_path / "run", "extract") == [1]
    assert "`ingest`" in capsys.readouterr().err


def test_config_errors_enumerated(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("posts = missing.jsonl\nsplit_fraction = 2\nprecision_k =\nbogus = 1\n")
    assert main(["ingest", "-c", str(cfg)]) == 1
    err = capsys.readouterr().err
    for word in ("split_fraction", "precision_k", "bogus"):
        assert word in err


def test_build_config_problems_all_at_once(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("cv_folds = one\nlow_pct = 95\nhigh_pct = 90\nfamilies = Time,Nope\n")
    with pytest.raises(ConfigError) as exc:
        build_config(cfg)
    assert len(exc.value.problems) >= 3


def test_overrides_and_relative_paths(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("posts = data/p.jsonl\nsplit_seed = 3\n")
    rc = build_config(cfg, ["split_seed=9", "kt_k=5,10"])
    assert rc.split_seed == 9 and rc.kt_k == (5, 10)
    assert rc.posts == str(tmp_path / "data" / "p.jsonl")


def test_missing_input_file_is_validation_error(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("posts = nope.jsonl\ncomments = nope2.jsonl\n")
    assert main(["ingest", "-c", str(cfg), "--set", f"output_dir={tmp_path / 'o'}"]) == 1


def test_runtime_failure_exit_code(synth_dir, tmp_path):
    out = tmp_path / "run"
    run_cli(synth_dir / "run.cfg", out, "ingest", "extract")
    (out / "features.tsv").write_text("garbage\n")
    assert run_cli(synth_dir / "run.cfg", out, "train") == [2]


def test_synth_invalid_args(tmp_path):
    assert main(["synth", str(tmp_path), "--threads", "1"]) == 1
    assert main(["synth", str(tmp_path), "--weight", "activity=1"]) == 1


def test_extraction_independent_of_workers(tmp_path):
    d = tmp_path / "s"
    assert main(["synth", str(d), "--threads", "70", "--comments", "5"]) == 0
    cfg = build_config(d / "run.cfg", [f"output_dir={tmp_path / 'run'}"])
    assert main(["ingest", "-c", str(d / "run.cfg"), "--set", f"output_dir={tmp_path / 'run'}"]) == 0
    groups, splits = load_corpus(cfg)
    (sub, threads), = groups.items()
    res = load_resources(cfg)
    res.subreddit_tables[sub] = build_frequency_table(c.body for t in threads for c in t.comments)
    res.user_stats[sub] = user_stats_for(threads, splits[sub])
    serial = extract_threads(threads, res, 1)
    parallel = extract_threads(threads, res, 2)
    assert serial == parallel


def test_thread_count_does_not_change_artifacts(synth_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli(synth_dir / "run.cfg", a, "all", extra=("--set", "threads=1"))
    run_cli(synth_dir / "run.cfg", b, "all", extra=("--set", "threads=3"))
    assert (a / "features.tsv").read_bytes() == (b / "features.tsv").read_bytes()


def test_runconfig_defaults():
    rc = RunConfig()
    assert rc.cv_folds == 10 and rc.precision_k == (1, 3, 5, 10) and rc.kt_k == (5, 10, 20)
