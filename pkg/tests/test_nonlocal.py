import numpy as np
import pytest

from nlgnn.config import set_debug
from nlgnn.errors import ConfigError, ContractError, ShapeError
from nlgnn.graph_data import Permutation
from nlgnn.nonlocal_agg import (
    NonLocalParams, attention_scores, full_attention_baseline, init_nonlocal, nonlocal_aggregate,
    predict, sort_permutation,
)
from nlgnn.tensor import Tensor


def single_layer(kernel, bias, f, num_classes=2):
    return NonLocalParams(
        c=Tensor(np.ones(f)), conv1=Tensor(kernel), b1=Tensor(bias), conv2=None, b2=None,
        classifier_W=Tensor(np.zeros((2 * f, num_classes))), classifier_b=Tensor(np.zeros(num_classes)),
    )


def brute_full_attention(z):
    n = z.shape[0]
    out = np.zeros_like(z)
    for v in range(n):
        logits = [float(z[v] @ z[u]) for u in range(n)]
        peak = max(logits)
        weights = [np.exp(s - peak) for s in logits]
        total = sum(weights)
        for u in range(n):
            out[v] += weights[u] / total * z[u]
    return out


# ==================== 分数与排序 ====================

def test_zero_calibration_gives_zero_scores():
    z = Tensor(np.random.default_rng(0).normal(size=(4, 3)))
    np.testing.assert_array_equal(attention_scores(z, Tensor(np.zeros(3))).data, 0.0)


def test_basis_calibration_selects_column():
    z = np.random.default_rng(1).normal(size=(4, 3))
    np.testing.assert_array_equal(attention_scores(Tensor(z), Tensor([1.0, 0.0, 0.0])).data, z[:, 0])


def test_hand_scores():
    scores = attention_scores(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([1.0, -1.0]))
    np.testing.assert_array_equal(scores.data, [-1.0, -1.0])


def test_calibration_must_be_vector():
    with pytest.raises(ShapeError):
        attention_scores(Tensor(np.ones((2, 2))), Tensor(np.ones((2, 1))))


@pytest.mark.parametrize("scores, order", [
    ([0.1, 0.5, 2.0], [0, 1, 2]),
    ([1.0, 1.0, 1.0, 1.0], [0, 1, 2, 3]),
    ([3.0, 1.0, 2.0], [1, 2, 0]),
    ([2.0, 1.0, 2.0, 1.0], [1, 3, 0, 2]),
])
def test_sort_permutation(scores, order):
    np.testing.assert_array_equal(sort_permutation(Tensor(scores)).order, order)


def test_nan_score_names_node():
    with pytest.raises(ContractError) as exc:
        sort_permutation(Tensor([0.0, 1.0, np.nan]))
    assert "2" in str(exc.value)


# ==================== 聚合 ====================

def test_identity_pipeline():
    z = np.random.default_rng(2).normal(size=(5, 3))
    p = single_layer(np.eye(3)[None, :, :], np.zeros(3), 3)
    scores = Tensor(np.ones(5))
    perm = Permutation.from_order(np.array([4, 2, 0, 1, 3]))
    np.testing.assert_allclose(nonlocal_aggregate(Tensor(z), scores, perm, p).data, z)


def test_hand_convolution():
    p = single_layer(np.ones((3, 1, 1)), np.zeros(1), 1)
    out = nonlocal_aggregate(Tensor([[1.0], [2.0], [3.0]]), Tensor(np.ones(3)), Permutation.identity(3), p)
    np.testing.assert_array_equal(out.data.ravel(), [3.0, 6.0, 5.0])


def test_scores_scale_the_sequence():
    p = single_layer(np.ones((3, 1, 1)), np.zeros(1), 1)
    z = Tensor([[1.0], [1.0], [1.0]])
    scores = Tensor([3.0, 1.0, 2.0])
    perm = sort_permutation(scores)
    # 排序后的序列为 [1, 2, 3]，卷积结果 [3, 6, 5] 再散射回节点 1, 2, 0
    out = nonlocal_aggregate(z, scores, perm, p).data.ravel()
    np.testing.assert_array_equal(out, [5.0, 3.0, 6.0])


@pytest.mark.parametrize("seed", range(5))
def test_aggregate_equivariant_under_relabel(seed):
    rng = np.random.default_rng(seed)
    n, f = 9, 4
    p = init_nonlocal(f, 3, 3, rng)
    z = rng.normal(size=(n, f))
    pi = rng.permutation(n)
    inverse = np.argsort(pi)

    def run(z_data):
        zt = Tensor(z_data)
        scores = attention_scores(zt, p.c)
        return nonlocal_aggregate(zt, scores, sort_permutation(scores), p).data

    base = run(z)
    moved = run(z[inverse])
    np.testing.assert_allclose(moved[pi], base, rtol=1e-10, atol=1e-12)


def test_perm_length_mismatch():
    p = single_layer(np.ones((1, 1, 1)), np.zeros(1), 1)
    with pytest.raises(ContractError):
        nonlocal_aggregate(Tensor(np.ones((3, 1))), Tensor(np.ones(3)), Permutation.identity(2), p)


def test_debug_mode_checks_order():
    p = single_layer(np.ones((1, 1, 1)), np.zeros(1), 1)
    scores = Tensor([2.0, 1.0])
    set_debug(True)
    try:
        with pytest.raises(ContractError):
            nonlocal_aggregate(Tensor(np.ones((2, 1))), scores, Permutation.identity(2), p)
        nonlocal_aggregate(Tensor(np.ones((2, 1))), scores, sort_permutation(scores), p)
    finally:
        set_debug(False)


def test_even_kernel_rejected_at_init():
    with pytest.raises(ConfigError):
        init_nonlocal(4, 2, 4, np.random.default_rng(0))


# ==================== 分类头 ====================

def test_predict_zero_weights_gives_bias():
    p = single_layer(np.ones((1, 2, 2)), np.zeros(2), 2, num_classes=3)
    p.classifier_b = Tensor([0.1, 0.2, 0.3])
    logits = predict(Tensor(np.ones((4, 2))), Tensor(np.ones((4, 2))), p).data
    np.testing.assert_array_equal(logits, np.tile([0.1, 0.2, 0.3], (4, 1)))


def test_predict_dense_oracle():
    rng = np.random.default_rng(4)
    p = init_nonlocal(3, 2, 3, rng)
    p.classifier_b.data = rng.normal(size=2)
    z, z_hat = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
    expected = np.hstack([z_hat, z]) @ p.classifier_W.data + p.classifier_b.data
    np.testing.assert_allclose(predict(Tensor(z), Tensor(z_hat), p).data, expected, atol=1e-12)


def test_predict_local_only_ablation():
    rng = np.random.default_rng(5)
    p = init_nonlocal(3, 2, 3, rng)
    z = rng.normal(size=(4, 3))
    expected = z @ p.classifier_W.data[3:] + p.classifier_b.data
    np.testing.assert_allclose(predict(Tensor(z), Tensor(np.zeros((4, 3))), p).data, expected, atol=1e-12)


def test_predict_shape_mismatch():
    p = init_nonlocal(3, 2, 3, np.random.default_rng(0))
    with pytest.raises(ShapeError):
        predict(Tensor(np.ones((4, 3))), Tensor(np.ones((3, 3))), p)


# ==================== 全注意力 ====================

def test_full_attention_single_node():
    z = Tensor([[1.5, -2.0]])
    np.testing.assert_array_equal(full_attention_baseline(z).data, z.data)


def test_full_attention_identical_rows():
    z = np.tile([0.2, 0.4, -1.0], (6, 1))
    np.testing.assert_allclose(full_attention_baseline(Tensor(z)).data, z, atol=1e-14)


def test_full_attention_matches_double_loop():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        f = int(rng.integers(1, 4))
        z = rng.normal(size=(n, f))
        np.testing.assert_allclose(full_attention_baseline(Tensor(z)).data, brute_full_attention(z),
                                   rtol=0, atol=1e-12)
