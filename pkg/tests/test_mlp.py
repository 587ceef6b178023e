import numpy as np
import pytest

from modules.losses.softmax_ce import log_softmax, softmax, softmax_cross_entropy
from modules.nn.layers import DenseLayer, dropout_mask, relu, relu_grad
from modules.nn.mlp import (
    EVAL, TRAIN, MlpModel, backward, forward, init_model, predict_labels, predict_proba, predict_proba_batch,
    zero_model
)
from utils.errors import DimensionError, InvalidInputError


def toy_model(rng, dims=(8, 4, 4, 2), dropout_ratio=0.) -> MlpModel:
    layers = [
        DenseLayer(rng.normal(size=(dims[i + 1], dims[i])), rng.normal(size=dims[i + 1]))
        for i in range(3)
    ]
    return MlpModel(*layers, dropout_ratio=dropout_ratio)


def loss_of(model, x, y):
    return softmax_cross_entropy(forward(model, x, mode=EVAL).logits, y)[0]


def test_init_model_shapes_and_scale():
    model = init_model(1234)
    assert model.dims == (512, 256, 256, 2)
    assert [p.shape for p in model.parameters()] == [(256, 512), (256,), (256, 256), (256,), (2, 256), (2,)]
    assert np.all(model.l1.bias == 0.) and np.all(model.l3.bias == 0.)
    assert np.std(model.l1.weights) == pytest.approx(1. / np.sqrt(512), rel=0.05)
    assert np.std(model.l2.weights) == pytest.approx(1. / np.sqrt(256), rel=0.05)


def test_init_model_is_seeded():
    a, b, c = init_model(7), init_model(7), init_model(8)
    assert all(np.array_equal(p, q) for p, q in zip(a.parameters(), b.parameters()))
    assert not np.array_equal(a.l1.weights, c.l1.weights)


def test_model_rejects_bad_chain_and_ratio():
    with pytest.raises(DimensionError):
        MlpModel(DenseLayer.zeros(4, 8), DenseLayer.zeros(4, 5), DenseLayer.zeros(2, 4))
    with pytest.raises(InvalidInputError):
        MlpModel(DenseLayer.zeros(4, 8), DenseLayer.zeros(4, 4), DenseLayer.zeros(2, 4), dropout_ratio=1.)


def test_forward_checks_input():
    model = init_model(0)
    with pytest.raises(DimensionError):
        forward(model, np.zeros((3, 511)))
    with pytest.raises(InvalidInputError):
        forward(model, np.zeros((3, 512)), mode='test')
    with pytest.raises(InvalidInputError):
        forward(model, np.zeros((3, 512)), mode=TRAIN)


def test_zero_model_predicts_half():
    p_benign, p_malicious = predict_proba(zero_model(), np.zeros(512))
    assert p_benign == 0.5 and p_malicious == 0.5
    assert predict_labels(np.zeros((1, 2))).tolist() == [0]


def test_relu_and_subgradient():
    z = np.array([-1., 0., 2.])
    assert relu(z).tolist() == [0., 0., 2.]
    assert relu_grad(z).tolist() == [0., 0., 1.]


def test_softmax_examples():
    p = softmax(np.array([[2., 0.]]))[0]
    assert p[0] == pytest.approx(0.880797, abs=1e-6)
    assert p[1] == pytest.approx(0.119203, abs=1e-6)
    big = softmax(np.array([[1000., 0.]]))
    assert np.all(np.isfinite(big))
    assert big[0, 0] == 1.
    assert np.all(np.isfinite(log_softmax(np.array([[-1000., 1000.]]))))


def test_predict_proba_saturates_in_closed_interval():
    model = zero_model(input_size=4, hidden_size=3)
    model.l3.bias[:] = [40., 0.]
    p_benign, p_malicious = predict_proba(model, np.zeros(4))
    assert p_benign == 1. and 0. < p_malicious < 1e-17
    model.l3.bias[:] = [0., 800.]
    probs = predict_proba_batch(model, np.zeros((2, 4)))
    assert probs.tolist() == [[0., 1.], [0., 1.]]
    assert np.all(probs.sum(axis=1) == 1.)


def test_loss_is_invariant_to_logit_translation(rng):
    logits = rng.normal(size=(16, 2))
    y = rng.integers(0, 2, size=16)
    loss, grad = softmax_cross_entropy(logits, y)
    for shift in (-30., 0.5, 7., 100.):
        shifted_loss, shifted_grad = softmax_cross_entropy(logits + shift, y)
        assert abs(shifted_loss - loss) <= 1e-12
        assert np.allclose(shifted_grad, grad, rtol=0., atol=1e-12)


def test_cross_entropy_value_and_gradient():
    loss, grad = softmax_cross_entropy(np.zeros((2, 2)), [0, 1])
    assert loss == pytest.approx(np.log(2.))
    assert np.allclose(grad, [[-0.25, 0.25], [0.25, -0.25]])
    with pytest.raises(InvalidInputError):
        softmax_cross_entropy(np.zeros((1, 2)), [2])


def test_train_mode_without_dropout_equals_eval(rng):
    model = toy_model(rng, dropout_ratio=0.)
    x = rng.normal(size=(5, 8))
    train = forward(model, x, mode=TRAIN, rng=np.random.default_rng(1)).logits
    assert np.array_equal(train, forward(model, x, mode=EVAL).logits)


@pytest.mark.parametrize('trial', range(20))
def test_gradients_match_finite_differences(trial):
    rng = np.random.default_rng(trial)
    model = toy_model(rng)
    x = rng.normal(size=(6, 8))
    y = rng.integers(0, 2, size=6)
    trace = forward(model, x, mode=EVAL)
    _, dlogits = softmax_cross_entropy(trace.logits, y)
    grads = backward(model, trace, dlogits).arrays()

    h = 1e-6
    for param, grad in zip(model.parameters(), grads):
        for idx in np.ndindex(param.shape):
            original = param[idx]
            param[idx] = original + h
            plus = loss_of(model, x, y)
            param[idx] = original - h
            minus = loss_of(model, x, y)
            param[idx] = original
            numeric = (plus - minus) / (2. * h)
            assert abs(numeric - grad[idx]) <= 1e-4 * max(1., abs(numeric), abs(grad[idx]))


def test_duplicated_sample_gives_same_gradients(rng):
    model = toy_model(rng)
    x = rng.normal(size=(1, 8))
    y = np.array([1])

    def gradients(batch, labels):
        trace = forward(model, batch, mode=EVAL)
        _, dlogits = softmax_cross_entropy(trace.logits, labels)
        return backward(model, trace, dlogits).arrays()

    single = gradients(x, y)
    double = gradients(np.concatenate([x, x]), np.concatenate([y, y]))
    for a, b in zip(single, double):
        assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


def test_backward_reuses_dropout_masks(rng):
    model = toy_model(rng, dropout_ratio=0.5)
    x = rng.normal(size=(4, 8))
    y = np.array([0, 1, 1, 0])
    trace = forward(model, x, mode=TRAIN, rng=np.random.default_rng(3))
    _, dlogits = softmax_cross_entropy(trace.logits, y)
    grads = backward(model, trace, dlogits)
    # a hidden unit dropped for every sample gets no gradient into its incoming weights
    dropped = np.all(trace.mask1 == 0., axis=0)
    assert np.all(grads.dW1[dropped] == 0.)
    assert np.allclose(grads.dW3, dlogits.T @ trace.h2)


def test_backward_rejects_foreign_trace(rng):
    model = toy_model(rng)
    other = toy_model(rng, dims=(8, 5, 4, 2))
    trace = forward(other, rng.normal(size=(2, 8)))
    with pytest.raises(DimensionError):
        backward(model, trace, np.zeros((2, 2)))


def test_dropout_mask_statistics():
    mask = dropout_mask((200, 200), 0.75, np.random.default_rng(0))
    assert set(np.unique(mask).tolist()) == {0., 4.}
    assert mask.mean() == pytest.approx(1., abs=0.05)
    zero_fraction = float(np.mean(dropout_mask((400, 400), 0.75, np.random.default_rng(0)) == 0.))
    assert zero_fraction == pytest.approx(0.75, rel=0.01)
    zero_fraction = float(np.mean(dropout_mask((1000, 1000), 0.3, np.random.default_rng(1)) == 0.))
    assert zero_fraction == pytest.approx(0.3, rel=0.01)
    assert np.all(dropout_mask((3, 3), 0.75, None) == 1.)


def test_inverted_dropout_expectation(rng):
    model = toy_model(rng, dims=(8, 256, 16, 2), dropout_ratio=0.75)
    x = rng.normal(size=(1, 8))
    a1 = forward(model, x, mode=EVAL).a1
    drop_rng = np.random.default_rng(5)
    total = 0.
    for _ in range(10000):
        total += float(np.sum(a1 * dropout_mask(a1.shape, model.dropout_ratio, drop_rng)))
    assert float(np.sum(a1)) > 0.
    assert total / 10000 == pytest.approx(float(np.sum(a1)), rel=0.02)
