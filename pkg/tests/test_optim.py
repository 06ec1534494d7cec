import numpy as np
import pytest

from nlgnn.errors import TrainingError
from nlgnn.functional import mul, sum_all
from nlgnn.optim import Adam, AdamState, adam_step
from nlgnn.tensor import backward, parameter


def test_first_step_moves_by_learning_rate():
    params = {"w": np.array([1.0, -1.0, 0.5])}
    grads = {"w": np.array([0.3, -2.0, 10.0])}
    updated, state = adam_step(params, grads, AdamState(), lr=0.01)
    np.testing.assert_allclose(updated["w"], params["w"] - 0.01 * np.sign(grads["w"]), atol=1e-9)
    assert state.t == 1


def test_weight_decay_pulls_toward_zero():
    params = {"w": np.array([2.0, -3.0])}
    grads = {"w": np.zeros(2)}
    updated, _ = adam_step(params, grads, AdamState(), lr=0.1, weight_decay=5e-4)
    np.testing.assert_allclose(updated["w"], [1.9, -2.9], atol=1e-5)


def test_non_finite_gradient_names_parameter():
    with pytest.raises(TrainingError) as exc:
        adam_step({"a": np.ones(2)}, {"a": np.array([1.0, np.nan])}, AdamState(), lr=0.01)
    assert exc.value.param == "a"


def test_adam_minimizes_quadratic():
    x = parameter(np.full(4, 3.0), "x")
    opt = Adam({"x": x}, lr=0.05)
    initial = float((x.data ** 2).sum())
    for _ in range(1000):
        opt.zero_grad()
        backward(sum_all(mul(x, x)))
        opt.step()
    assert float((x.data ** 2).sum()) < 0.01 * initial


def test_missing_gradient_treated_as_zero():
    used = parameter([1.0])
    unused = parameter([4.0])
    opt = Adam({"used": used, "unused": unused}, lr=0.1)
    backward(sum_all(mul(used, used)))
    opt.step()
    assert unused.data[0] == 4.0
    assert used.data[0] < 1.0
