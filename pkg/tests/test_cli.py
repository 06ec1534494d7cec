import json

import pytest

from nlgnn.cli import build_parser, main, parse_int_list, parse_models
from nlgnn.reports import read_csv

SMALL = ["--n", "100", "--classes", "2", "--features", "4", "--degree", "3", "--homophily", "0.3",
         "--noise", "0.1"]
FAST = ["--preset", "fast", "--epochs", "5"]


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


# ==================== 解析 ====================

def test_parse_helpers():
    assert parse_int_list("1024,2048, 4096") == [1024, 2048, 4096]
    assert parse_models("gcn, nlgcn") == ["GCN", "NLGCN"]


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["bench", "--models", "gcn,sage"],
                                  ["train", "--model", "sage"], ["scaling", "--sizes", "1,x"]])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_categorize_defaults_to_ten_repeats():
    args = build_parser().parse_args(["categorize"])
    assert args.repeats == 10
    assert build_parser().parse_args(["train"]).repeats == 1


def test_epilog_generate_example_feeds_analyze_example(tmp_path):
    lines = [line.strip().replace("%(prog)s ", "") for line in build_parser().epilog.splitlines()]
    generate = next(line for line in lines if line.startswith("generate "))
    analyze = next(line for line in lines if line.startswith("analyze --manifest"))
    assert "--name synthetic" in generate and "--out data" in generate
    assert analyze.endswith("data/synthetic.manifest")

    argv = [a for a in generate.split() if a not in ("--n", "2000")]
    argv[argv.index("data")] = str(tmp_path / "data")
    assert main([*argv, "--n", "100", "--features", "10", "--degree", "3"]) == 0
    assert (tmp_path / "data" / "synthetic.manifest").exists()


# ==================== 子命令 ====================

def test_generate_then_analyze(tmp_path):
    assert run(tmp_path, "generate", *SMALL, "--name", "toy") == 0
    manifest = tmp_path / "toy.manifest"
    assert manifest.exists()
    sidecar = json.loads((tmp_path / "toy.json").read_text(encoding="utf-8"))
    assert sidecar["command"] == "generate"

    stats_dir = tmp_path / "stats"
    assert run(stats_dir, "analyze", "--manifest", str(manifest)) == 0
    rows = read_csv(stats_dir / "stats.csv")
    assert rows[0]["name"] == "toy"
    assert rows[0]["nodes"] == "100"
    assert (stats_dir / "stats.json").exists()


def test_analyze_is_byte_identical(tmp_path):
    assert run(tmp_path / "a", "analyze", *SMALL) == 0
    assert run(tmp_path / "b", "analyze", *SMALL) == 0
    assert (tmp_path / "a" / "stats.csv").read_bytes() == (tmp_path / "b" / "stats.csv").read_bytes()


def test_missing_manifest_returns_1(tmp_path):
    assert run(tmp_path, "analyze", "--manifest", str(tmp_path / "nope.manifest")) == 1


def test_train_single_run(tmp_path):
    assert run(tmp_path, "train", *SMALL, *FAST, "--model", "nlgcn") == 0
    rows = read_csv(tmp_path / "train.csv")
    assert len(rows) == 1 and rows[0]["variant"] == "NLGCN"
    assert not (tmp_path / "evaluate.csv").exists()


def test_train_is_reproducible(tmp_path):
    for out in ("a", "b"):
        assert run(tmp_path / out, "train", *SMALL, *FAST, "--repeats", "2") == 0

    def without_timing(path):
        return [{k: v for k, v in row.items() if k != "wall_ms_per_epoch"} for row in read_csv(path)]

    assert without_timing(tmp_path / "a" / "train.csv") == without_timing(tmp_path / "b" / "train.csv")
    assert (tmp_path / "a" / "evaluate.csv").read_bytes() == (tmp_path / "b" / "evaluate.csv").read_bytes()


def test_off_grid_hyperparameter_returns_1(tmp_path):
    assert run(tmp_path, "train", *SMALL, *FAST, "--hidden", "32") == 1


def test_save_params_needs_single_run(tmp_path):
    assert run(tmp_path, "train", *SMALL, *FAST, "--repeats", "2", "--save-params",
               str(tmp_path / "p.npz")) == 1


def test_train_then_export_sorted(tmp_path):
    params = tmp_path / "nlmlp.npz"
    assert run(tmp_path, "train", *SMALL, *FAST, "--model", "nlmlp", "--save-params", str(params)) == 0
    assert params.exists()
    assert run(tmp_path, "export-sorted", *SMALL, "--params", str(params), "--window", "1") == 0
    rows = read_csv(tmp_path / "sorted.csv")
    assert len(rows) == 100
    summary = json.loads((tmp_path / "sorted.json").read_text(encoding="utf-8"))
    assert summary["config"]["window"] == 1


def test_export_sorted_without_params_returns_1(tmp_path):
    assert run(tmp_path, "export-sorted", *SMALL) == 1


def test_categorize(tmp_path):
    assert run(tmp_path, "categorize", *SMALL, *FAST, "--repeats", "2") == 0
    assert [r["model"] for r in read_csv(tmp_path / "category.csv")] == ["MLP", "GCN", "GAT"]
    sidecar = json.loads((tmp_path / "category.json").read_text(encoding="utf-8"))
    assert sidecar["results"]["category"] in ("Category1", "Category2")


def test_grid(tmp_path):
    assert run(tmp_path, "grid", *SMALL, "--preset", "fast", "--epochs", "2", "--model", "mlp",
               "--workers", "2") == 0
    rows = read_csv(tmp_path / "leaderboard.csv")
    assert len(rows) == 72
    assert [int(r["rank"]) for r in rows] == list(range(1, 73))


def test_bench(tmp_path):
    assert run(tmp_path, "bench", *SMALL, *FAST, "--models", "gcn,nlgcn", "--warmup", "1",
               "--threads", "1") == 0
    rows = read_csv(tmp_path / "bench.csv")
    assert [r["model"] for r in rows] == ["GCN", "NLGCN"]
    assert float(rows[0]["slowdown"]) == 1.0
    sidecar = json.loads((tmp_path / "bench.json").read_text(encoding="utf-8"))
    assert sidecar["environment"]["threads"] == 1


def test_scaling(tmp_path):
    assert run(tmp_path, "scaling", "--sizes", "32,64", "--dim", "4", "--timing-repeats", "1") == 0
    assert [r["n"] for r in read_csv(tmp_path / "scaling.csv")] == ["32", "64"]
    sidecar = json.loads((tmp_path / "scaling.json").read_text(encoding="utf-8"))
    assert sidecar["results"]["sorted_slope"] is not None
