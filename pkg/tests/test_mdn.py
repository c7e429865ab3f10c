"""Mixture density network: forward-pass anchors, finite-difference
gradient oracles, training on a synthetic mixture and serialization."""

import numpy as np
import pytest

from selfdist import mdn
from selfdist.mdn import (
    LOG_2PI,
    MDNConfig,
    MixtureOutput,
    TrainBatch,
    batch_gradients,
    batch_nll,
    init_params,
    likelihood_gradient,
    load_params,
    mdn_forward,
    mean_jacobian,
    nll,
    predict,
    save_params,
    train,
)
from selfdist.optim import AdamConfig


def _random_setup(seed, cfg=None):
    rng = np.random.default_rng(seed)
    cfg = cfg or MDNConfig()
    params = init_params(cfg, rng)
    mu = rng.uniform(-1.0, 1.0, cfg.input_dim)
    return rng, cfg, params, mu


# -- forward pass ----------------------------------------------------------


def test_forward_outputs_valid_mixture():
    _, cfg, params, mu = _random_setup(0)
    mix = mdn_forward(params, mu)
    assert mix.pi.shape == (cfg.mixtures,)
    assert mix.pi.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(mix.pi > 0)
    assert mix.means.shape == (cfg.mixtures, cfg.output_dim)
    assert np.all(mix.sigmas > 0)


def test_forward_rejects_non_finite_input():
    _, _, params, mu = _random_setup(0)
    mu[0] = np.nan
    with pytest.raises(ValueError):
        mdn_forward(params, mu)


def test_predict_returns_top_kernel():
    mix = MixtureOutput(
        pi=np.array([0.1, 0.6, 0.3]),
        means=np.array([[0.0, 0.0], [0.2, 0.8], [1.0, 1.0]]),
        sigmas=np.array([1.0, 0.5, 2.0]),
    )
    mean, sigma, k = predict(mix)
    assert k == 1
    assert np.allclose(mean, [0.2, 0.8])
    assert sigma == 0.5


# -- exact value anchors ---------------------------------------------------


def test_nll_unit_gaussian_at_mean_is_log_2pi():
    # single kernel, sigma 1, observation at the mean: nll = (o/2) ln 2pi
    mix = MixtureOutput(pi=np.array([1.0]), means=np.array([[0.3, 0.7]]),
                        sigmas=np.array([1.0]))
    assert nll(mix, np.array([0.3, 0.7])) == pytest.approx(LOG_2PI, abs=1e-9)
    assert LOG_2PI == pytest.approx(1.8378770664093453, abs=1e-12)


def test_nll_translation_invariance():
    mix = MixtureOutput(pi=np.array([0.4, 0.6]),
                        means=np.array([[0.1, 0.2], [0.5, 0.9]]),
                        sigmas=np.array([0.3, 0.8]))
    shift = np.array([1.7, -2.2])
    shifted = MixtureOutput(pi=mix.pi, means=mix.means + shift, sigmas=mix.sigmas)
    s = np.array([0.25, 0.4])
    assert nll(mix, s) == pytest.approx(nll(shifted, s + shift), abs=1e-10)


def test_batch_nll_matches_single_sample_nll():
    _, _, params, mu = _random_setup(4)
    s = np.array([0.4, 0.6])
    batch = TrainBatch(mu[None, :], s[None, :])
    assert batch_nll(params, batch) == pytest.approx(nll(mdn_forward(params, mu), s), abs=1e-10)


# -- finite-difference oracles --------------------------------------------


def test_mean_jacobian_matches_central_differences():
    eps = 1e-6
    worst = 0.0
    for seed in range(100):
        _, cfg, params, mu = _random_setup(seed)
        mix = mdn_forward(params, mu)
        k = int(np.argmax(mix.pi))
        jac = mean_jacobian(params, mu, kernel=k)
        fd = np.zeros_like(jac)
        for j in range(cfg.input_dim):
            d = np.zeros(cfg.input_dim)
            d[j] = eps
            hi = mdn_forward(params, mu + d).means[k]
            lo = mdn_forward(params, mu - d).means[k]
            fd[:, j] = (hi - lo) / (2 * eps)
        rel = np.linalg.norm(jac - fd) / max(np.linalg.norm(fd), 1e-12)
        worst = max(worst, rel)
    assert worst < 1e-4


def test_likelihood_gradient_matches_central_differences():
    # oracle: d/dmu of P* . (-|s - mean_k(mu)|^2 / (2 sigma*^2)) with the
    # kernel choice, responsibility and sigma frozen at the base point
    eps = 1e-6
    worst = 0.0
    for seed in range(100):
        rng, cfg, params, mu = _random_setup(seed)
        s_v = rng.uniform(0.0, 1.0, cfg.output_dim)
        mix = mdn_forward(params, mu)
        k = int(np.argmax(mix.pi))
        p_star = float(mdn.responsibilities(mix, s_v)[k])
        sigma = float(mix.sigmas[k])
        grad = likelihood_gradient(params, mu, s_v, mix)

        def frozen_obj(m):
            mean_k = mdn_forward(params, m).means[k]
            return -p_star * float((s_v - mean_k) @ (s_v - mean_k)) / (2 * sigma**2)

        fd = np.zeros(cfg.input_dim)
        for j in range(cfg.input_dim):
            d = np.zeros(cfg.input_dim)
            d[j] = eps
            fd[j] = (frozen_obj(mu + d) - frozen_obj(mu - d)) / (2 * eps)
        rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12)
        worst = max(worst, rel)
    assert worst < 1e-4


def test_batch_gradients_match_central_differences():
    rng, cfg, params, _ = _random_setup(11, MDNConfig(input_dim=3, hidden_units=5, mixtures=2))
    X = rng.uniform(-1, 1, (8, cfg.input_dim))
    Y = rng.uniform(0, 1, (8, cfg.output_dim))
    batch = TrainBatch(X, Y)
    grads = batch_gradients(params, batch)
    eps = 1e-6
    for key, g in grads.items():
        flat = params[key].ravel()
        # probe a handful of coordinates per array
        for idx in rng.choice(flat.size, size=min(5, flat.size), replace=False):
            orig = flat[idx]
            flat[idx] = orig + eps
            hi = batch_nll(params, batch)
            flat[idx] = orig - eps
            lo = batch_nll(params, batch)
            flat[idx] = orig
            fd = (hi - lo) / (2 * eps)
            assert g.ravel()[idx] == pytest.approx(fd, rel=1e-4, abs=1e-7), key


# -- training --------------------------------------------------------------


def test_training_recovers_synthetic_gaussian_centers():
    # data from two well-separated clusters selected by the input sign
    rng = np.random.default_rng(5)
    n = 200
    x = rng.uniform(-1, 1, (n, 7))
    centers = np.where(x[:, :1] > 0, 0.8, 0.2)
    y = np.hstack([centers, centers]) + rng.normal(0, 0.01, (n, 2))
    params = init_params(MDNConfig(), rng)
    params, losses = train(params, TrainBatch(x, y), epochs=600,
                           adam_config=AdamConfig(lr=0.01))
    assert losses[-1] < losses[0]
    for sign, c in ((1.0, 0.8), (-1.0, 0.2)):
        probe = np.zeros(7)
        probe[0] = 0.5 * sign
        mean, _, _ = predict(mdn_forward(params, probe))
        assert np.allclose(mean, [c, c], atol=0.05)


def test_training_returns_lowest_loss_parameters():
    rng = np.random.default_rng(9)
    x = rng.uniform(-1, 1, (50, 7))
    y = rng.uniform(0, 1, (50, 2))
    params = init_params(MDNConfig(hidden_units=8, mixtures=2), rng)
    trained, losses = train(params, TrainBatch(x, y), epochs=200)
    assert batch_nll(trained, TrainBatch(x, y)) <= losses.min() + 1e-9


def test_train_rejects_empty_batch():
    rng = np.random.default_rng(0)
    params = init_params(MDNConfig(), rng)
    with pytest.raises(ValueError):
        train(params, TrainBatch(np.zeros((0, 7)), np.zeros((0, 2))), epochs=1)


# -- serialization ---------------------------------------------------------


def test_save_load_roundtrip_is_exact(tmp_path):
    _, _, params, _ = _random_setup(2)
    path = tmp_path / "weights.txt"
    save_params(params, path)
    loaded = load_params(path)
    assert set(loaded) == set(params)
    for key in params:
        assert np.array_equal(loaded[key], params[key])


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("something-else 1\n")
    with pytest.raises(ValueError):
        load_params(path)
