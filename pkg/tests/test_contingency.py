"""Contingency classifier: dataset construction, gradient oracle and
basic probability behavior."""

import numpy as np
import pytest

from selfdist import contingency, simworld
from selfdist.contingency import (
    bce_gradients,
    bce_loss,
    build_dataset,
    contingency_prob,
    init_classifier,
    train_classifier,
)


def _waving_pairs(n=300, seed=0):
    rng = np.random.default_rng(seed)
    pairs = []
    pattern = simworld.default_wave_pattern()
    for _ in range(n):
        sign = 1.0 if rng.random() < 0.5 else -1.0
        a = sign * 0.25 * pattern
        # self-generated flow has a tight direction distribution
        angle = 0.0 if sign > 0 else np.pi
        h = simworld.direction_histogram(angle, rng, jitter_std=0.2)
        pairs.append((a, h))
    return pairs


def test_dataset_is_balanced_and_shaped():
    rng = np.random.default_rng(1)
    X, y = build_dataset(_waving_pairs(), rng)
    assert X.shape[1] == contingency.INPUT_DIM
    assert set(np.unique(y)) == {0.0, 1.0}
    assert abs(y.mean() - 0.5) < 0.01  # balanced positives/negatives


def test_dataset_rejects_empty_traces():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        build_dataset([(np.zeros(7), np.zeros(10))], rng)


def test_probability_is_sigmoid_of_logit():
    model = init_classifier(np.random.default_rng(0))
    a = np.full(7, 0.1)
    h = np.full(10, 0.1)
    z = contingency.logit(model, a, h)
    p = contingency_prob(model, a, h)
    assert p == pytest.approx(1.0 / (1.0 + np.exp(-z)), abs=1e-12)
    assert 0.0 < p < 1.0


def test_bce_gradients_match_central_differences():
    rng = np.random.default_rng(2)
    model = init_classifier(rng)
    X = rng.normal(size=(16, contingency.INPUT_DIM))
    y = (rng.random(16) < 0.5).astype(float)
    grads = bce_gradients(model, X, y)
    eps = 1e-6
    for key, g in grads.items():
        flat = model[key].ravel()
        for idx in rng.choice(flat.size, size=min(4, flat.size), replace=False):
            orig = flat[idx]
            flat[idx] = orig + eps
            hi = bce_loss(model, X, y)
            flat[idx] = orig - eps
            lo = bce_loss(model, X, y)
            flat[idx] = orig
            fd = (hi - lo) / (2 * eps)
            assert g.ravel()[idx] == pytest.approx(fd, rel=1e-4, abs=1e-8), key


def test_training_separates_contingent_from_noise():
    rng = np.random.default_rng(3)
    X, y = build_dataset(_waving_pairs(seed=3), rng)
    n_train = int(0.8 * len(X))
    model, losses = train_classifier(X[:n_train], y[:n_train], epochs=300, rng=rng)
    assert losses[-1] < losses[0]
    probs = np.array([contingency_prob(model, row[:7], row[7:]) for row in X[n_train:]])
    acc = np.mean((probs > 0.5) == (y[n_train:] > 0.5))
    assert acc >= 0.9


def test_training_rejects_single_class():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(10, contingency.INPUT_DIM))
    with pytest.raises(ValueError):
        train_classifier(X, np.ones(10), epochs=1, rng=rng)


def test_trained_classifier_end_to_end(classifier):
    # the session-wide classifier (trained on simulated waving) must call
    # real waving contingent and pure noise not
    rng = np.random.default_rng(9)
    pattern = simworld.default_wave_pattern()
    a = 0.25 * pattern
    h_self = simworld.direction_histogram(np.pi, rng, jitter_std=0.2)
    h_noise = simworld.direction_histogram(rng.uniform(-np.pi, np.pi), rng, jitter_std=1.5)
    assert contingency_prob(classifier, a, h_self) > 0.5
    noise_probs = [
        contingency_prob(
            classifier, a,
            simworld.direction_histogram(rng.uniform(-np.pi, np.pi), rng, jitter_std=1.5),
        )
        for _ in range(50)
    ]
    assert np.mean(noise_probs) < 0.5
    # no commanded motion but a moving scene: not self-generated
    assert contingency_prob(classifier, np.zeros(7), h_self) < 0.5
