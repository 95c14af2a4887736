import numpy as np
import pytest

from fgmpinn.autodiff import dual_lift
from fgmpinn.network import (
    ConfigError,
    MlpConfig,
    MlpParams,
    evaluate,
    forward,
    init_params,
    load_checkpoint,
    save_checkpoint,
)


def test_glorot_bounds_and_zero_biases():
    cfg = MlpConfig(2, 3, [100, 50], "tanh2", seed=4)
    p = init_params(cfg)
    for w, (fi, fo) in zip(p.weights, [(2, 100), (100, 50), (50, 3)]):
        assert w.shape == (fi, fo)
        assert np.abs(w).max() <= np.sqrt(6 / (fi + fo))
    assert all(np.all(b == 0) for b in p.biases)
    assert p.count == 2 * 100 + 100 + 100 * 50 + 50 + 50 * 3 + 3


def test_seeded_init_is_reproducible():
    cfg = MlpConfig(1, 1, [5, 5], seed=7)
    a, b = init_params(cfg), init_params(cfg)
    assert all(np.array_equal(x, y) for x, y in zip(a.flat(), b.flat()))


def test_config_validation():
    with pytest.raises(ConfigError):
        MlpConfig(1, 1, [0])
    with pytest.raises(ConfigError):
        MlpConfig(1, 1, [5], activation="relu")


def test_forward_matches_plain_numpy():
    cfg = MlpConfig(2, 2, [6, 4], "tanh", seed=1)
    p = init_params(cfg)
    p.biases = [np.full_like(b, 0.1) for b in p.biases]
    x = np.random.default_rng(0).uniform(size=(7, 2))
    h = np.tanh(x @ p.weights[0] + p.biases[0])
    h = np.tanh(h @ p.weights[1] + p.biases[1])
    np.testing.assert_allclose(evaluate(cfg, p, x), h @ p.weights[2] + p.biases[2])


@pytest.mark.parametrize("act", ["tanh", "tanh2", "elu2"])
def test_input_tangents_match_finite_differences(act):
    cfg = MlpConfig(2, 3, [8, 8], act, seed=2)
    p = init_params(cfg)
    x = np.random.default_rng(1).uniform(size=(5, 2))
    out = forward(cfg, p.flat(), dual_lift(x))
    h = 1e-6
    for j in range(2):
        dx = np.zeros(2)
        dx[j] = h
        fd = (evaluate(cfg, p, x + dx) - evaluate(cfg, p, x - dx)) / (2 * h)
        np.testing.assert_allclose(out.tangents[j], fd, rtol=1e-6, atol=1e-8)


def test_forward_records_hidden_activations():
    cfg = MlpConfig(1, 1, [5, 5])
    rec = []
    forward(cfg, init_params(cfg).flat(), dual_lift(np.linspace(0, 1, 4)[:, None]), record=rec)
    assert [r.shape for r in rec] == [(4, 5), (4, 5)]


def test_forward_checks_shapes():
    cfg = MlpConfig(2, 1, [3])
    with pytest.raises(ConfigError):
        forward(cfg, init_params(cfg).flat(), dual_lift(np.zeros((3, 1))))
    with pytest.raises(ConfigError):
        forward(cfg, init_params(cfg).flat()[:2], dual_lift(np.zeros((3, 2))))


def test_checkpoint_round_trip_is_exact(tmp_path):
    cfg = MlpConfig(2, 3, [4, 5], "elu2", seed=3)
    p = init_params(cfg)
    p.biases[0] += 1 / 3
    path = tmp_path / "m.json"
    save_checkpoint(path, [(cfg, p)], {"code": "X"})
    nets, meta = load_checkpoint(path)
    assert meta == {"code": "X"}
    cfg2, p2 = nets[0]
    assert cfg2 == cfg
    assert all(np.array_equal(a, b) for a, b in zip(p.flat(), p2.flat()))


def test_checkpoint_rejects_foreign_files(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "other"}')
    with pytest.raises(ConfigError):
        load_checkpoint(path)


def test_params_flat_round_trip():
    p = init_params(MlpConfig(1, 1, [3, 2]))
    q = MlpParams.from_flat(p.flat())
    assert all(np.array_equal(a, b) for a, b in zip(p.flat(), q.flat()))
