import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from enginepdm.recurrent import (
    Dense, Dropout, LayerSpec, Network, NetworkSpec, Recurrent, ShapeMismatch, TrainConfig,
    adam_step, bce_loss, count_params, fit, init_moments, network_spec, train_config,
)
from enginepdm.recurrent.layers import LSTMCell, relu, sigmoid, softmax
from enginepdm.recurrent.training import split_validation

from gradcheck import CASES, max_rel_error, random_spec


def lstm_spec(n_in=15):
    return NetworkSpec((LayerSpec("lstm", 100, return_sequences=True), LayerSpec("lstm", 50),
                        LayerSpec("dense", 1, "sigmoid")), n_in)


def test_param_counts():
    assert count_params(lstm_spec()) == 76651
    rnn = NetworkSpec((LayerSpec("rnn", 16, "tanh"), LayerSpec("dense", 8, "relu"),
                       LayerSpec("dense", 1, "sigmoid")), 15)
    assert count_params(rnn) == 657
    assert count_params(network_spec("lstm", 15)) == 76651
    assert count_params(network_spec("rnn", 15)) == 657


@pytest.mark.parametrize("family", ["lstm", "bilstm", "rnn", "birnn", "gru"])
def test_count_matches_enumeration(family):
    spec = network_spec(family, 15, 10)
    net = Network(spec, 0)
    assert count_params(spec) == net.count_params()
    assert net.count_params() == sum(w.size for w in net.parameters().values())


def test_dense_only_count():
    layer = Dense(1, 15, np.random.default_rng(0))
    assert layer.n_params() == 16


def test_zero_weights_give_half():
    net = Network(network_spec("lstm", 4, 6), 0)
    for w in net.parameters().values():
        w[...] = 0
    p = net.predict_proba(np.random.default_rng(0).normal(size=(3, 6, 4)))
    assert np.all(p == 0.5)


def test_lstm_cell_zero_weights():
    cell = LSTMCell()
    p = {"W_in": np.zeros((8, 3)), "W_rec": np.zeros((8, 2)), "b": np.zeros(8)}
    hs, _ = cell.run(p, np.ones((1, 1, 3)))
    assert np.all(hs == 0)


def test_activation_properties(rng):
    a = rng.normal(scale=50, size=(100, 7))
    assert np.allclose(softmax(a).sum(axis=1), 1.0, atol=1e-12, rtol=0)
    s = sigmoid(rng.normal(scale=5, size=1000))
    assert np.all((s > 0) & (s < 1))
    assert np.array_equal(relu(a), np.maximum(a, 0))


def test_bce_examples():
    assert math.isclose(bce_loss([0.5], [1]), math.log(2), rel_tol=1e-12)
    assert bce_loss([1.0], [1]) < 1e-6
    assert math.isclose(bce_loss([0.9, 0.1], [1, 0]), -math.log(0.9), rel_tol=1e-12)


def test_infer_mode_deterministic(rng):
    net = Network(network_spec("gru", 3, 5), 1)
    x = rng.normal(size=(2, 5, 3))
    a, b = net.predict_proba(x), net.predict_proba(x)
    assert np.array_equal(a, b)
    assert np.array_equal(a, net.forward(x))
    assert np.all((a > 0) & (a < 1))


def test_shape_mismatch():
    net = Network(network_spec("rnn", 3, 5), 0)
    with pytest.raises(ShapeMismatch):
        net.forward(np.zeros((2, 5, 4)))


def test_spec_validation():
    with pytest.raises(ValueError):
        NetworkSpec((LayerSpec("lstm", 4),), 3)
    with pytest.raises(ValueError):
        NetworkSpec((LayerSpec("dense", 1, "sigmoid"),), 3)
    with pytest.raises(ValueError):
        NetworkSpec((LayerSpec("lstm", 4), LayerSpec("lstm", 4), LayerSpec("dense", 1, "sigmoid")), 3)
    spec = network_spec("bilstm", 15)
    assert NetworkSpec.from_json(spec.to_json()) == spec


@pytest.mark.parametrize("case", CASES, ids=lambda c: "-".join(f"{k}={v}" for k, v in c.items()))
def test_gradients_match_finite_differences(case):
    for seed in range(3):
        worst = max_rel_error(random_spec(seed=seed, **case), seed)
        assert max(worst.values()) < 1e-4, worst


def test_doubled_batch_doubles_summed_gradient(rng):
    # the network reports mean-loss gradients; n * g is the gradient of the summed loss
    spec = random_spec("lstm", 4)
    net = Network(spec, 4)
    x = rng.normal(size=(3, spec.seq_len, spec.n_features))
    y = np.array([1.0, 0.0, 1.0])
    g1 = {k: v.copy() for k, v in net.loss_and_grad(x, y, train=False)[1].items()}
    g2 = net.loss_and_grad(np.concatenate([x, x]), np.concatenate([y, y]), train=False)[1]
    for k in g1:
        assert np.allclose(6 * g2[k], 2 * (3 * g1[k]), rtol=1e-10, atol=1e-15)


def test_dense_bias_gradient_zero_at_mean_label():
    net = Network(NetworkSpec((LayerSpec("rnn", 2), LayerSpec("dense", 1, "sigmoid")), 1, 2), 0)
    for w in net.parameters().values():
        w[...] = 0  # constant model: p = 0.5 everywhere
    x = np.ones((4, 2, 1))
    _, g = net.loss_and_grad(x, np.array([1.0, 0.0, 1.0, 0.0]), train=False)
    assert g["1.b"][0] == 0.0
    _, g = net.loss_and_grad(x, np.array([1.0, 1.0, 1.0, 0.0]), train=False)
    assert g["1.b"][0] != 0.0


def test_bidirectional_palindrome_symmetry(rng):
    layer = Recurrent("gru", 4, 3, rng, bidirectional=True, return_sequences=True)
    for k in ("W_in", "W_rec", "b"):
        layer.params["bw." + k][...] = layer.params["fw." + k]
    half = rng.normal(size=(2, 3, 3))
    x = np.concatenate([half, half[:, ::-1]], axis=1)
    h = layer.forward(x)
    fw, bw = h[:, :, :4], h[:, :, 4:]
    assert np.allclose(fw, bw[:, ::-1], atol=1e-14)


def test_dropout():
    d = Dropout(0.5, 4)
    x = np.ones((2000, 4))
    assert d.forward(x, train=False) is x
    out = d.forward(x, train=True, rng=np.random.default_rng(0))
    assert set(np.unique(out)) <= {0.0, 2.0}
    assert abs(out.mean() - 1.0) < 0.05
    with pytest.raises(ValueError):
        Dropout(1.0, 4)


def test_adam_examples():
    w = {"w": np.zeros(1)}
    m = init_moments(w)
    adam_step(w, {"w": np.ones(1)}, m, 1, lr=0.001)
    assert math.isclose(w["w"][0], -0.001, rel_tol=1e-6)

    w = {"a": np.array([1.0, -2.0])}
    m = init_moments(w)
    adam_step(w, {"a": np.zeros(2)}, m, 1)
    assert w["a"].tolist() == [1.0, -2.0]
    assert not m["m"]["a"].any() and not m["v"]["a"].any()

    def run():
        ww = {"a": np.array([0.3, 0.1])}
        mm = init_moments(ww)
        for t in range(1, 6):
            adam_step(ww, {"a": np.array([0.5, -1.5]) * t}, mm, t)
        return ww["a"]

    assert np.array_equal(run(), run())
    with pytest.raises(ValueError):
        adam_step(w, {"a": np.zeros(2)}, m, 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10), st.floats(1e-3, 1e3))
def test_adam_first_step_is_lr_times_sign(w0, g):
    w = {"w": np.array([w0])}
    adam_step(w, {"w": np.array([g])}, init_moments(w), 1, lr=0.01)
    assert math.isclose(w0 - w["w"][0], 0.01 * g / (g + 1e-8), rel_tol=1e-9, abs_tol=1e-12)


def test_split_validation():
    tr, va = split_validation(10, 0.2)
    assert tr.tolist() == list(range(8)) and va.tolist() == [8, 9]
    tr, va = split_validation(2, 0.9)
    assert len(tr) == 1 and len(va) == 1


def toy_sequences(n=200, T=6, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    x = rng.normal(scale=0.3, size=(n, T, 2))
    x[:, :, 0] += np.where(y == 1, 1.0, -1.0)[:, None]
    return x, y


def test_toy_problem_converges():
    x, y = toy_sequences()
    spec = NetworkSpec((LayerSpec("gru", 8), LayerSpec("dense", 1, "sigmoid")), 2, 6)
    cfg = TrainConfig(batch_size=32, epochs=50, learning_rate=0.01, patience=50, seed=0)
    model, hist = fit(spec, x, y, cfg)
    assert len(hist) <= cfg.epochs
    assert max(r.train_acc for r in hist.records) == 1.0
    assert np.mean(model.predict(x) == y) == 1.0


def test_early_stopping_contract():
    # validation labels contradict training labels, so validation loss rises after epoch 1
    x, y = toy_sequences(120)
    y = y.astype(float)
    y[-24:] = 1 - y[-24:]
    spec = NetworkSpec((LayerSpec("rnn", 6), LayerSpec("dense", 1, "sigmoid")), 2, 6)
    cfg = TrainConfig(batch_size=16, epochs=10, learning_rate=0.05, patience=1, seed=0,
                      dtype="float64")
    model, hist = fit(spec, x, y, cfg)
    assert [r.epoch for r in hist.records] == [1, 2]
    assert hist.records[1].val_loss >= hist.records[0].val_loss
    assert hist.best_epoch == 1 and hist.stopped_early
    # restored weights reproduce the epoch-1 validation loss
    assert math.isclose(bce_loss(model.predict_proba(x[-24:]), y[-24:]),
                        hist.records[0].val_loss, rel_tol=1e-12)


def test_training_bitwise_reproducible():
    x, y = toy_sequences(80)
    spec = network_spec("lstm", 2, 6)
    cfg = train_config("lstm", seed=3, epochs=2)
    a, ha = fit(spec, x, y, cfg)
    b, hb = fit(spec, x, y, cfg)
    for k, w in a.network.parameters().items():
        assert np.array_equal(w, b.network.parameters()[k])
    assert ha.to_csv() == hb.to_csv()


def test_history_csv_header():
    x, y = toy_sequences(40)
    _, hist = fit(network_spec("rnn", 2, 6), x, y, train_config("rnn", epochs=1))
    assert hist.to_csv().splitlines()[0] == "epoch,train_loss,val_loss,train_acc,val_acc"


def test_softmax_head_matches_sigmoid_shape():
    spec = network_spec("lstm", 3, 4, softmax_head=True)
    net = Network(spec, 0)
    p = net.predict_proba(np.zeros((2, 4, 3)))
    assert p.shape == (2,)
    assert count_params(spec) == count_params(network_spec("lstm", 3, 4)) + 51


def test_train_config_defaults():
    assert (train_config("gru").batch_size, train_config("gru").epochs) == (200, 20)
    assert (train_config("lstm").batch_size, train_config("lstm").epochs) == (64, 15)
    with pytest.raises(ValueError):
        train_config("cnn")
    with pytest.raises(ValueError):
        TrainConfig(validation_split=0.0)
