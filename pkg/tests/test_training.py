import numpy as np
import pytest

import nlgnn.training as training
from nlgnn.config import TrainConfig
from nlgnn.errors import ConfigError, TrainingError
from nlgnn.graph_data import Graph
from nlgnn.splits import split_nodes
from nlgnn.synthetic import generate_synthetic
from nlgnn.training import (
    categorize_dataset, evaluate_mean, grid_configs, grid_search, train,
)

FAST = TrainConfig(variant="NLMLP", hidden=16, dropout=0.0, weight_decay=0.0, lr=0.05, max_epochs=30)


@pytest.fixture(scope="module")
def separable_graph():
    return generate_synthetic(n=150, num_classes=3, target_h=0.3, d=3, mean_degree=3.0,
                              feature_noise=0.0, seed=1, name="separable")


# ==================== 配置 ====================

@pytest.mark.parametrize("changes", [
    dict(hidden=32), dict(dropout=0.3), dict(weight_decay=1e-3), dict(lr=0.1), dict(kernel_size=4),
    dict(variant="SAGE"), dict(max_epochs=0),
])
def test_off_grid_config_rejected(changes):
    with pytest.raises(ConfigError):
        FAST.with_(**changes).validate()


def test_presets():
    assert TrainConfig.preset("full", "nlgcn").variant == "NLGCN"
    assert TrainConfig.preset("fast").max_epochs < TrainConfig.preset("full").max_epochs
    with pytest.raises(ConfigError):
        TrainConfig.preset("huge")


def test_train_rejects_zero_epochs(separable_graph):
    with pytest.raises(ConfigError):
        train(separable_graph, split_nodes(separable_graph), FAST.with_(max_epochs=0))


# ==================== 训练 ====================

def test_separable_features_mlp_perfect(separable_graph):
    run, _ = train(separable_graph, split_nodes(separable_graph, seed=0), FAST.with_(variant="MLP"))
    assert run.test_accuracy == 1.0


def test_separable_features_nlmlp(separable_graph):
    run, params = train(separable_graph, split_nodes(separable_graph, seed=0), FAST.with_(max_epochs=60))
    assert run.best_val_accuracy == 1.0
    assert run.test_accuracy >= 0.95
    assert params.nonlocal_ is not None


def test_run_result_invariants(disassortative_graph):
    run, _ = train(disassortative_graph, split_nodes(disassortative_graph), FAST)
    assert 1 <= run.best_epoch <= FAST.max_epochs
    assert 0.0 <= run.test_accuracy <= 1.0
    assert 0.0 <= run.best_val_accuracy <= 1.0
    assert len(run.losses) == len(run.epoch_ms) == FAST.max_epochs
    assert run.wall_ms_per_epoch > 0.0


@pytest.mark.parametrize("variant", ["MLP", "GCN", "GAT", "NLMLP", "NLGCN", "NLGAT"])
def test_train_is_deterministic(disassortative_graph, variant):
    cfg = FAST.with_(variant=variant, dropout=0.5, max_epochs=8, seed=3)
    split = split_nodes(disassortative_graph, seed=3)
    a, pa = train(disassortative_graph, split, cfg)
    b, pb = train(disassortative_graph, split, cfg)
    assert a.losses == b.losses
    assert (a.test_accuracy, a.best_val_accuracy, a.best_epoch) == (b.test_accuracy, b.best_val_accuracy,
                                                                    b.best_epoch)
    for name, t in pa.named_parameters().items():
        np.testing.assert_array_equal(t.data, pb.named_parameters()[name].data)


def test_test_labels_read_once(disassortative_graph, monkeypatch):
    split = split_nodes(disassortative_graph, seed=0)
    calls = {"test": 0, "val": 0}
    original = training.accuracy

    def counting(pred, labels, nodes):
        if nodes is split.test:
            calls["test"] += 1
        if nodes is split.val:
            calls["val"] += 1
        return original(pred, labels, nodes)

    monkeypatch.setattr(training, "accuracy", counting)
    train(disassortative_graph, split, FAST.with_(max_epochs=12))
    assert calls == {"test": 1, "val": 12}


def test_ties_keep_earliest_epoch(disassortative_graph, monkeypatch):
    split = split_nodes(disassortative_graph, seed=0)
    original = training.accuracy

    def flat_validation(pred, labels, nodes):
        return 0.5 if nodes is split.val else original(pred, labels, nodes)

    monkeypatch.setattr(training, "accuracy", flat_validation)
    run, _ = train(disassortative_graph, split, FAST.with_(max_epochs=10))
    assert run.best_epoch == 1
    assert run.best_val_accuracy == 0.5


def test_divergence_reports_epoch():
    n = 30
    features = np.ones((n, 3))
    features[:, 1] = np.nan
    g = Graph.from_edges(n, [[i, (i + 1) % n] for i in range(n)], features, np.arange(n) % 3, 3)
    with pytest.raises(TrainingError) as exc:
        train(g, split_nodes(g), FAST.with_(variant="MLP"))
    assert exc.value.epoch == 1


# ==================== 多次重复与分类 ====================

def test_zero_features_give_chance_accuracy():
    n = 100
    g = Graph.from_edges(n, [[i, (i + 7) % n] for i in range(n)], np.zeros((n, 4)), np.arange(n) % 5, 5)
    result = evaluate_mean(g, FAST.with_(variant="MLP", max_epochs=5), n_repeats=3)
    assert result.mean == pytest.approx(0.2)
    assert result.std == pytest.approx(0.0)
    assert result.seeds == [0, 1, 2]


def test_duplicate_seeds_rejected(disassortative_graph):
    with pytest.raises(ConfigError):
        evaluate_mean(disassortative_graph, FAST, seeds=[1, 1])


def test_evaluate_mean_uses_distinct_splits(disassortative_graph):
    result = evaluate_mean(disassortative_graph, FAST.with_(max_epochs=5), seeds=[4, 9])
    assert [r.seed for r in result.runs] == [4, 9]
    assert result.mean == pytest.approx(np.mean([r.test_accuracy for r in result.runs]))


def test_assortative_graph_is_category2():
    g = generate_synthetic(n=300, num_classes=3, target_h=0.9, d=12, mean_degree=6.0,
                           feature_noise=0.4, seed=5, name="assortative")
    report = categorize_dataset(g, seeds=[0, 1, 2], base=FAST.with_(max_epochs=60))
    assert report.category == 2
    assert set(report.evidence) == {"MLP", "GCN", "GAT"}
    assert [row["model"] for row in report.rows()] == ["MLP", "GCN", "GAT"]


# ==================== 网格搜索 ====================

def test_full_grid_sizes():
    assert len(grid_configs("NLGCN")) == 144
    assert len(grid_configs("GCN")) == 72
    assert len(set(grid_configs("NLMLP"))) == 144


def test_singleton_grid(disassortative_graph):
    grid = {"hidden": (16,), "dropout": (0.0,), "weight_decay": (0.0,), "lr": (0.05,)}
    result = grid_search(disassortative_graph, [0], "MLP", grid=grid, base=FAST.with_(max_epochs=5))
    assert len(result.leaderboard) == 1
    assert result.best == FAST.with_(variant="MLP", max_epochs=5)


def test_leaderboard_sorted_and_schedule_independent(disassortative_graph):
    grid = {"hidden": (16,), "dropout": (0.0,), "weight_decay": (0.0, 5e-4), "lr": (0.01, 0.05)}
    base = FAST.with_(max_epochs=6)
    serial = grid_search(disassortative_graph, [0, 1], "NLMLP", grid=grid, base=base)
    parallel = grid_search(disassortative_graph, [0, 1], "NLMLP", grid=grid, base=base, workers=3)
    vals = [e.mean_val_accuracy for e in serial.leaderboard]
    assert vals == sorted(vals, reverse=True)
    assert serial.rows() == parallel.rows()
    assert [row["rank"] for row in serial.rows()] == [1, 2, 3, 4]


def test_unknown_grid_axis(disassortative_graph):
    with pytest.raises(ConfigError):
        grid_configs("MLP", grid={"momentum": (0.9,)})


# ==================== 验收 ====================

@pytest.mark.slow
def test_nonlocal_helps_on_disassortative_synthetic():
    g = generate_synthetic(n=2000, num_classes=5, target_h=0.1, d=50, mean_degree=5.0,
                           feature_noise=0.35, seed=0)
    seeds = list(range(10))
    means = {v: evaluate_mean(g, TrainConfig(variant=v), seeds=seeds).mean for v in ("NLMLP", "MLP", "GCN")}
    assert means["NLMLP"] >= means["MLP"] > means["GCN"]


@pytest.mark.slow
def test_nonlocal_does_not_hurt_on_assortative_synthetic():
    g = generate_synthetic(n=2000, num_classes=5, target_h=0.8, d=50, mean_degree=5.0,
                           feature_noise=0.35, seed=0)
    seeds = list(range(10))
    nlgcn = evaluate_mean(g, TrainConfig(variant="NLGCN"), seeds=seeds).mean
    gcn = evaluate_mean(g, TrainConfig(variant="GCN"), seeds=seeds).mean
    assert nlgcn >= gcn - 0.01
