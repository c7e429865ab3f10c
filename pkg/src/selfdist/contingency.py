"""Binary contingency classifier: is this flow histogram an effect of the
robot's own action?  Input is the commanded joint velocity (7) plus the
10-bin direction histogram; output a single logit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import simworld
from .optim import Adam, AdamConfig

INPUT_DIM = 7 + simworld.HIST_BINS
HIDDEN_UNITS = 32

CLS_PARAM_KEYS = ("W1", "b1", "W2", "b2")


@dataclass
class ContingencySample:
    action: np.ndarray  # (7,) rad/s
    histogram: np.ndarray  # (10,) sums to 1 or all zero
    label: int  # 1 contingent, 0 not


def init_classifier(rng: np.random.Generator) -> dict[str, np.ndarray]:
    def uni(shape, fan_in):
        s = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-s, s, size=shape)

    return {
        "W1": uni((HIDDEN_UNITS, INPUT_DIM), INPUT_DIM),
        "b1": uni((HIDDEN_UNITS,), INPUT_DIM),
        "W2": uni((HIDDEN_UNITS,), HIDDEN_UNITS),
        "b2": uni((1,), HIDDEN_UNITS),
    }


def logit(model: dict[str, np.ndarray], a: np.ndarray, h: np.ndarray) -> float:
    x = np.concatenate([np.asarray(a, float), np.asarray(h, float)])
    hidden = np.tanh(model["W1"] @ x + model["b1"])
    return float(model["W2"] @ hidden + model["b2"][0])


def contingency_prob(model: dict[str, np.ndarray], a: np.ndarray, h: np.ndarray) -> float:
    z = logit(model, a, h)
    # numerically safe sigmoid
    if z >= 0:
        return float(1.0 / (1.0 + np.exp(-z)))
    e = np.exp(z)
    return float(e / (1.0 + e))


def build_dataset(
    traces: list[tuple[np.ndarray, np.ndarray]],
    rng: np.random.Generator,
    include_negatives: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Balanced dataset from recorded (action, histogram) waving pairs.

    Positives: recorded pairs with both action and blob motion present.
    Negatives, one third each: real action with a random-direction noise
    histogram; zero action with a real moving histogram; real action with
    the all-zero (non-movement) histogram.  Returns shuffled (X, y).
    """
    positives = [
        (a, h)
        for a, h in traces
        if np.linalg.norm(a) > 1e-9 and h.sum() > 0.5
    ]
    if not positives:
        raise ValueError("no usable action/histogram pairs in traces")
    n_pos = len(positives)
    actions = np.array([a for a, _ in positives])
    hists = np.array([h for _, h in positives])

    X_pos = np.hstack([actions, hists])
    if not include_negatives:
        order = rng.permutation(n_pos)
        return X_pos[order], np.ones(n_pos)

    counts = [n_pos // 3 + (1 if i < n_pos % 3 else 0) for i in range(3)]
    neg_rows = []
    # (a, noise histogram)
    for _ in range(counts[0]):
        a = actions[rng.integers(n_pos)]
        noise_h = simworld.direction_histogram(
            rng.uniform(-np.pi, np.pi), rng, jitter_std=1.5
        )
        neg_rows.append(np.concatenate([a, noise_h]))
    # (0, moving-scene histogram)
    for _ in range(counts[1]):
        h = hists[rng.integers(n_pos)]
        neg_rows.append(np.concatenate([np.zeros(actions.shape[1]), h]))
    # (a, all-zero histogram)
    for _ in range(counts[2]):
        a = actions[rng.integers(n_pos)]
        neg_rows.append(np.concatenate([a, np.zeros(simworld.HIST_BINS)]))
    X_neg = np.array(neg_rows)

    X = np.vstack([X_pos, X_neg])
    y = np.concatenate([np.ones(n_pos), np.zeros(len(X_neg))])
    order = rng.permutation(len(X))
    return X[order], y[order]


def _forward_batch(model, X):
    H = np.tanh(X @ model["W1"].T + model["b1"])
    Z = H @ model["W2"] + model["b2"][0]
    return H, Z


def bce_loss(model: dict[str, np.ndarray], X: np.ndarray, y: np.ndarray) -> float:
    _, Z = _forward_batch(model, X)
    # log(1+e^z) - y z, computed stably
    loss = np.maximum(Z, 0) - y * Z + np.log1p(np.exp(-np.abs(Z)))
    return float(loss.mean())


def bce_gradients(model, X, y) -> dict[str, np.ndarray]:
    n = len(X)
    H, Z = _forward_batch(model, X)
    p = 1.0 / (1.0 + np.exp(-Z))
    dZ = (p - y) / n
    dH = np.outer(dZ, model["W2"])
    d_pre = dH * (1.0 - H * H)
    return {
        "W1": d_pre.T @ X,
        "b1": d_pre.sum(axis=0),
        "W2": H.T @ dZ,
        "b2": np.array([dZ.sum()]),
    }


def train_classifier(
    X: np.ndarray,
    y: np.ndarray,
    epochs: int = 500,
    lr: float = 0.01,
    rng: np.random.Generator | None = None,
    model: dict[str, np.ndarray] | None = None,
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Full-batch Adam on binary cross-entropy with logits."""
    if y.min() == y.max():
        raise ValueError("dataset must contain both classes")
    if model is None:
        model = init_classifier(rng if rng is not None else np.random.default_rng(0))
    else:
        model = {k: v.copy() for k, v in model.items()}
    opt = Adam(AdamConfig(lr=lr))
    losses = np.empty(epochs)
    for epoch in range(epochs):
        losses[epoch] = bce_loss(model, X, y)
        opt.step(model, bce_gradients(model, X, y))
    return model, losses


def dataset_to_csv(X: np.ndarray, y: np.ndarray, path) -> None:
    header = (
        [f"a{i + 1}" for i in range(7)]
        + [f"h{i + 1}" for i in range(simworld.HIST_BINS)]
        + ["label"]
    )
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for row, label in zip(X, y):
            f.write(",".join(f"{v:.9g}" for v in row) + f",{int(label)}\n")
