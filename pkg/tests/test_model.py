import numpy as np
import pytest
from oracles import central_difference, relu_signs

from diagnet import model
from diagnet.model import MlpSpec


def test_init_shapes_and_biases():
    spec = MlpSpec(2, (64, 32), 2)
    p = model.init(spec, seed=1)
    assert [W.shape for W in p.weights] == [(2, 64), (64, 32), (32, 2)]
    assert all(not b.any() for b in p.biases)
    assert p.equals(model.init(spec, seed=1))
    assert not p.equals(model.init(spec, seed=2))


def test_zero_weights_uniform_output():
    spec = MlpSpec(3, (5,), 4)
    p = model.init(spec).zeros_like()
    probs = model.forward(p, np.random.default_rng(0).normal(size=(6, 3))).probabilities
    np.testing.assert_array_equal(probs, np.full((6, 4), 0.25))


def test_eval_deterministic_and_normalized():
    spec = MlpSpec(3, (8, 4), 3)
    p = model.init(spec, 4)
    X = np.random.default_rng(1).normal(size=(10, 3))
    a, b = model.forward(p, X), model.forward(p, X)
    assert a.logits.tobytes() == b.logits.tobytes()
    np.testing.assert_allclose(a.probabilities.sum(axis=1), 1.0, atol=1e-9)


def test_train_mode_dropout():
    spec = MlpSpec(2, (200,), 2, dropout_rate=0.5)
    p = model.init(spec, 0)
    X = np.ones((1, 2))
    t1 = model.forward(p, X, "train", seed=3, spec=spec)
    t2 = model.forward(p, X, "train", seed=3, spec=spec)
    assert t1.logits.tobytes() == t2.logits.tobytes()
    kept = t1.masks[0] > 0
    assert 0.3 < kept.mean() < 0.7
    assert set(np.unique(t1.masks[0])) <= {0.0, 2.0}
    with pytest.raises(ValueError):
        model.forward(p, X, "train")


def test_input_checks():
    p = model.init(MlpSpec(2, (3,), 2))
    with pytest.raises(ValueError):
        model.forward(p, np.ones((1, 3)))
    with pytest.raises(ValueError):
        model.forward(p, np.array([[np.nan, 0.0]]))


def test_zero_upstream_is_weight_decay():
    spec = MlpSpec(2, (6, 3), 2)
    p = model.init(spec, 2)
    trace = model.forward(p, np.ones((4, 2)))
    g = model.backward(p, trace, weight_decay=0.05)
    for ga, pa in zip(g.arrays(), p.arrays()):
        np.testing.assert_array_equal(ga, 2 * 0.05 * pa)


@pytest.mark.parametrize("activation", ["linear", "relu"])
def test_backward_finite_difference(activation):
    rng = np.random.default_rng(7)
    spec = MlpSpec(3, (6, 4), 3, embedding_activation=activation)
    p = model.init(spec, 5)
    for b in p.biases:
        b += rng.normal(size=b.shape) * 0.1
    X = rng.normal(size=(5, 3))
    Ge, Gp = rng.normal(size=(5, 4)), rng.normal(size=(5, 3))

    def loss():
        t = model.forward(p, X)
        return float((t.embedding * Ge).sum() + (t.probabilities * Gp).sum())

    g = model.backward(p, model.forward(p, X), grad_embedding=Ge, grad_probabilities=Gp)
    arrays, garrays = p.arrays(), g.arrays()
    h, checked = 1e-3, 0
    while checked < 20:
        a = int(rng.integers(len(arrays)))
        k = int(rng.integers(arrays[a].size))
        old = arrays[a].flat[k]
        signs = []
        for v in (old - h, old + h):
            arrays[a].flat[k] = v
            signs.append(relu_signs(p, X))
        arrays[a].flat[k] = old
        if not np.array_equal(signs[0], signs[1]):
            continue
        num = central_difference(loss, arrays, (a, k), h)
        ana = garrays[a].flat[k]
        assert abs(num - ana) / max(abs(num), abs(ana), 1e-8) <= 1e-4
        checked += 1


def test_backward_additive_over_rows():
    spec = MlpSpec(2, (5, 3), 2)
    p = model.init(spec, 1)
    rng = np.random.default_rng(2)
    X, Ge, Gl = rng.normal(size=(6, 2)), rng.normal(size=(6, 3)), rng.normal(size=(6, 2))
    whole = model.backward(p, model.forward(p, X), Ge, Gl)
    parts = model.backward(p, model.forward(p, X[:2]), Ge[:2], Gl[:2])
    parts.add_(model.backward(p, model.forward(p, X[2:]), Ge[2:], Gl[2:]))
    for a, b in zip(whole.arrays(), parts.arrays()):
        np.testing.assert_allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("activation", ["linear", "relu"])
def test_params_roundtrip(tmp_path, activation):
    p = model.init(MlpSpec(3, (7, 2), 4, embedding_activation=activation), 9)
    model.save_params(p, tmp_path / "p.bin")
    back = model.load_params(tmp_path / "p.bin")
    assert back.equals(p) and back.embedding_activation == activation
    assert model.spec_from_params(back).hidden_dims == (7, 2)
    (tmp_path / "bad.bin").write_bytes(b"XXXX" + (tmp_path / "p.bin").read_bytes()[4:])
    with pytest.raises(ValueError):
        model.load_params(tmp_path / "bad.bin")


def test_spec_validation():
    with pytest.raises(ValueError):
        MlpSpec(2, (), 2)
    with pytest.raises(ValueError):
        MlpSpec(2, (4,), 2, dropout_rate=1.0)
