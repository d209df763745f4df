import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcgad import autograd as ag
from arcgad.autograd import Adam, Parameter, Tensor
from arcgad.errors import DimensionError, NonFiniteError

from gradcheck import check_grads


def test_matmul_identity_and_projector():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(ag.matmul(Tensor(np.eye(2)), Tensor(a)).data, a)
    out = ag.matmul(Tensor([[1.0, 0.0], [0.0, 0.0]]), Tensor([[5.0], [7.0]]))
    assert np.array_equal(out.data, [[5.0], [0.0]])


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionError):
        ag.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_matmul_grad_matches_finite_differences(rng):
    a, b = rng.uniform(-1, 1, (3, 4)), rng.uniform(-1, 1, (4, 2))
    assert check_grads(lambda t: ag.sum_all(ag.matmul(t[0], t[1])), [a, b]) <= 1e-6


def test_row_softmax_values():
    assert np.allclose(ag.row_softmax(Tensor([[0.0, 0.0]]), 1.0).data, [[0.5, 0.5]])
    big = ag.row_softmax(Tensor([[1000.0, 0.0]]), 1.0).data
    assert np.isfinite(big).all()
    assert big[0, 0] == pytest.approx(1.0) and big[0, 1] < 1e-300 + 1e-12


def test_row_softmax_rejects_bad_scale():
    with pytest.raises(ValueError):
        ag.row_softmax(Tensor([[1.0]]), 0.0)


def test_row_softmax_grad(rng):
    x = rng.uniform(-1, 1, (2, 5))
    w = rng.uniform(-1, 1, (2, 5))
    err = check_grads(lambda t: ag.sum_all(ag.mul(ag.row_softmax(t[0], 1.7), Tensor(w))), [x])
    assert err <= 1e-6


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 6),
    st.integers(1, 8),
    st.floats(0.1, 10.0),
    st.integers(0, 2**31 - 1),
)
def test_row_softmax_rows_are_distributions(rows, cols, scale, seed):
    x = np.random.default_rng(seed).uniform(-5, 5, (rows, cols))
    y = ag.row_softmax(Tensor(x), scale).data
    assert np.all(np.abs(y.sum(axis=1) - 1.0) <= 1e-12)
    assert np.all((y >= 0) & (y <= 1))
    # strictly inside (0, 1) whenever no logit gap can underflow exp
    gap = (x.max(axis=1) - x.min(axis=1)) / scale
    tame = (gap < 30) & (cols > 1)
    assert np.all((y[tame] > 0) & (y[tame] < 1))


def test_elementwise_basics():
    assert np.array_equal(ag.relu(Tensor([[-1.0, 0.0, 2.0]])).data, [[0.0, 0.0, 2.0]])
    x = Tensor(np.arange(6.0).reshape(2, 3))
    assert ag.dropout(x, 0.0, rng=3, train=True) is x
    out = ag.concat_cols([Tensor(np.ones((2, 2))), Tensor(np.zeros((2, 3)))])
    assert out.shape == (2, 5)
    assert np.array_equal(out.data[:, :2], np.ones((2, 2)))
    assert np.array_equal(out.data[:, 2:], np.zeros((2, 3)))


def test_dropout_modes(rng):
    x = Tensor(rng.normal(size=(20, 10)))
    assert ag.dropout(x, 0.5, rng=1, train=False) is x
    a = ag.dropout(x, 0.5, rng=7).data
    b = ag.dropout(x, 0.5, rng=7).data
    assert np.array_equal(a, b)
    kept = a != 0
    assert np.allclose(a[kept], 2.0 * x.data[kept])
    with pytest.raises(ValueError):
        ag.dropout(x, 1.0)


def test_add_and_sub_shape_errors():
    with pytest.raises(DimensionError):
        ag.add(Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2))))
    with pytest.raises(DimensionError):
        ag.concat_cols([Tensor(np.ones((2, 1))), Tensor(np.ones((3, 1)))])


def test_cosine_rows_values():
    a = Tensor([[1.0, 2.0, 3.0], [1.0, 0.0, 0.0]])
    b = Tensor([[1.0, 2.0, 3.0], [0.0, 1.0, 0.0]])
    cos = ag.cosine_rows(a, b).data.ravel()
    assert cos[0] == pytest.approx(1.0, abs=1e-15)
    assert cos[1] == 0.0


def test_cosine_rows_zero_row_is_finite():
    a = Tensor([[0.0, 0.0], [1.0, 2.0]], requires_grad=True)
    b = Tensor([[1.0, 1.0], [0.0, 0.0]], requires_grad=True)
    out = ag.cosine_rows(a, b)
    assert out.data.ravel().tolist() == [0.0, 0.0]
    ag.sum_all(out).backward()
    # no 1/eps spike at a zero row
    assert np.array_equal(a.grad[0], [0.0, 0.0]) and np.array_equal(b.grad[1], [0.0, 0.0])
    assert np.abs(a.grad).max() <= 1.0 and np.abs(b.grad).max() <= 1.0


def test_cosine_rows_grad(rng):
    a, b = rng.uniform(-1, 1, (3, 4)), rng.uniform(-1, 1, (3, 4))
    assert check_grads(lambda t: ag.sum_all(ag.cosine_rows(t[0], t[1])), [a, b]) <= 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_composite_grad(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, (4, 3))
    w = rng.uniform(-1, 1, (3, 5))
    b = rng.uniform(-1, 1, (1, 5))

    def build(t):
        h = ag.relu(ag.add(ag.matmul(t[0], t[1]), t[2]))
        h2 = ag.concat_cols([h, ag.sub(h, ag.take_rows(h, [1, 1, 0, 3]))])
        att = ag.row_softmax(ag.matmul(h2, ag.transpose(h2)), 2.0)
        rec = ag.matmul(att, h2)
        return ag.mean_all(ag.add_scalar(ag.scale(ag.cosine_rows(h2, rec), -1.0), 1.0))

    assert check_grads(build, [x, w, b]) <= 1e-4


@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_non_finite_is_rejected():
    with pytest.raises(NonFiniteError):
        Tensor([[np.nan]])
    with pytest.raises(NonFiniteError):
        ag.scale(Tensor([[1e308]]), 10.0)


def test_backward_releases_graph(rng):
    p = Parameter(rng.normal(size=(3, 2)), "w")
    x = Tensor(rng.normal(size=(4, 3)))
    y = ag.matmul(x, p)
    loss = ag.sum_all(y)
    loss.backward()
    assert y._parents == () and loss._parents == ()
    assert np.allclose(p.grad, x.data.sum(axis=0)[:, None] * np.ones((1, 2)))


def test_no_grad_records_nothing(rng):
    p = Parameter(rng.normal(size=(2, 2)), "w")
    with ag.no_grad():
        y = ag.matmul(Tensor(np.eye(2)), p)
    assert not y.requires_grad


def test_adam_zero_gradient_keeps_params():
    p = Parameter([[1.0, -2.0]], "w")
    opt = Adam([p], lr=0.1, weight_decay=0.0)
    opt.step()
    assert np.array_equal(p.data, [[1.0, -2.0]])
    assert np.array_equal(p.grad, np.zeros((1, 2)))


def test_adam_descends_on_square():
    p = Parameter([[1.0]], "w")
    opt = Adam([p], lr=0.1, weight_decay=0.0)
    ag.sum_all(ag.mul(p, p)).backward()
    opt.step()
    assert p.data[0, 0] < 1.0
    assert p.grad[0, 0] == 0.0
    assert opt.step_count == 1


def _scalar_adamw(w, grad_fn, steps, lr, wd=0.0, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    for t in range(1, steps + 1):
        g = grad_fn(w)
        w *= 1.0 - lr * wd
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        w -= lr * (m / (1 - b1**t)) / (math.sqrt(v / (1 - b2**t)) + eps)
    return w


def test_adam_converges_and_matches_scalar_recurrence():
    p = Parameter([[0.0]], "w")
    opt = Adam([p], lr=0.1, weight_decay=0.0)
    for _ in range(500):
        d = ag.add_scalar(p, -3.0)
        ag.sum_all(ag.mul(d, d)).backward()
        opt.step()
    expected = _scalar_adamw(0.0, lambda w: 2 * (w - 3.0), 500, 0.1)
    assert abs(p.data[0, 0] - 3.0) < 1e-2
    assert p.data[0, 0] == pytest.approx(expected, abs=1e-12)


def test_adam_weight_decay_is_decoupled():
    p = Parameter([[2.0]], "w")
    opt = Adam([p], lr=0.1, weight_decay=0.5)
    opt.step()  # zero gradient: only the decay acts
    assert p.data[0, 0] == pytest.approx(2.0 * (1 - 0.1 * 0.5), abs=1e-15)
