"""Mixture density network mapping inferred joint angles to the expected
visual centroid: forward pass, max-kernel prediction, analytic derivatives
and full negative log-likelihood training with Adam."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .optim import Adam, AdamConfig

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class MDNConfig:
    input_dim: int = 7
    hidden_units: int = 20
    mixtures: int = 4
    output_dim: int = 2

    def __post_init__(self):
        if min(self.input_dim, self.hidden_units, self.mixtures, self.output_dim) <= 0:
            raise ValueError("all MDNConfig fields must be positive")


@dataclass
class MixtureOutput:
    pi: np.ndarray  # (m,) mixing coefficients on the simplex
    means: np.ndarray  # (m, output_dim)
    sigmas: np.ndarray  # (m,) isotropic std per kernel


# Parameter dict keys, in serialization order.
PARAM_KEYS = ("W1", "b1", "W_pi", "b_pi", "W_mu", "b_mu", "W_sig", "b_sig")


def init_params(config: MDNConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Uniform +-1/sqrt(fan_in) initialization."""
    d, h, m, o = config.input_dim, config.hidden_units, config.mixtures, config.output_dim

    def uni(shape, fan_in):
        s = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-s, s, size=shape)

    return {
        "W1": uni((h, d), d),
        "b1": uni((h,), d),
        "W_pi": uni((m, h), h),
        "b_pi": uni((m,), h),
        "W_mu": uni((m * o, h), h),
        "b_mu": uni((m * o,), h),
        "W_sig": uni((m, h), h),
        "b_sig": uni((m,), h),
    }


def config_of(params: dict[str, np.ndarray]) -> MDNConfig:
    h, d = params["W1"].shape
    m = params["W_pi"].shape[0]
    o = params["W_mu"].shape[0] // m
    return MDNConfig(input_dim=d, hidden_units=h, mixtures=m, output_dim=o)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def mdn_forward(params: dict[str, np.ndarray], mu: np.ndarray) -> MixtureOutput:
    mu = np.asarray(mu, dtype=float)
    if not np.all(np.isfinite(mu)):
        raise ValueError("non-finite input to MDN")
    cfg = config_of(params)
    h = np.tanh(params["W1"] @ mu + params["b1"])
    pi = _softmax(params["W_pi"] @ h + params["b_pi"])
    means = (params["W_mu"] @ h + params["b_mu"]).reshape(cfg.mixtures, cfg.output_dim)
    sigmas = np.exp(params["W_sig"] @ h + params["b_sig"])
    return MixtureOutput(pi=pi, means=means, sigmas=sigmas)


def predict(mix: MixtureOutput) -> tuple[np.ndarray, float, int]:
    """Most probable kernel: (mean, sigma, kernel index); ties -> lowest index."""
    i_star = int(np.argmax(mix.pi))
    return mix.means[i_star].copy(), float(mix.sigmas[i_star]), i_star


def mean_jacobian(params: dict[str, np.ndarray], mu: np.ndarray, kernel: int | None = None) -> np.ndarray:
    """Exact Jacobian of the selected kernel's mean w.r.t. the input."""
    cfg = config_of(params)
    mu = np.asarray(mu, dtype=float)
    h = np.tanh(params["W1"] @ mu + params["b1"])
    if kernel is None:
        pi = _softmax(params["W_pi"] @ h + params["b_pi"])
        kernel = int(np.argmax(pi))
    o = cfg.output_dim
    w_mean = params["W_mu"][kernel * o:(kernel + 1) * o]  # (o, h)
    return (w_mean * (1.0 - h * h)) @ params["W1"]


def responsibilities(mix: MixtureOutput, s: np.ndarray) -> np.ndarray:
    """Posterior kernel probabilities for an observation."""
    log_comp = np.log(np.maximum(mix.pi, 1e-300)) + _log_gauss(mix, np.asarray(s, float))
    return _softmax(log_comp)


def _log_gauss(mix: MixtureOutput, s: np.ndarray) -> np.ndarray:
    o = mix.means.shape[1]
    sq = np.sum((s - mix.means) ** 2, axis=1)
    return -sq / (2.0 * mix.sigmas ** 2) - o * np.log(mix.sigmas) - 0.5 * o * LOG_2PI


def likelihood_gradient(
    params: dict[str, np.ndarray],
    mu: np.ndarray,
    s_v: np.ndarray,
    mix: MixtureOutput | None = None,
) -> np.ndarray:
    """Gradient in the input of the mixture log-likelihood of s_v,
    restricted to the most probable kernel: P* J^T (s_v - mean*) / sigma*^2.

    The responsibility P*, sigma* and the kernel choice are treated as
    constants of the current input.
    """
    mu = np.asarray(mu, dtype=float)
    s_v = np.asarray(s_v, dtype=float)
    if mix is None:
        mix = mdn_forward(params, mu)
    i_star = int(np.argmax(mix.pi))
    p_star = float(responsibilities(mix, s_v)[i_star])
    jac = mean_jacobian(params, mu, kernel=i_star)
    return p_star * jac.T @ (s_v - mix.means[i_star]) / mix.sigmas[i_star] ** 2


def nll(mix: MixtureOutput, s: np.ndarray) -> float:
    """Negative log-likelihood of one observation, log-sum-exp stabilized."""
    log_comp = np.log(np.maximum(mix.pi, 1e-300)) + _log_gauss(mix, np.asarray(s, float))
    peak = log_comp.max()
    return float(-(peak + np.log(np.exp(log_comp - peak).sum())))


@dataclass
class TrainBatch:
    inputs: np.ndarray  # (n, input_dim) joint-angle samples
    targets: np.ndarray  # (n, output_dim) centroids in [0,1]^2

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.targets = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if len(self.inputs) != len(self.targets):
            raise ValueError("inputs and targets must have equal length")

    def __len__(self) -> int:
        return len(self.inputs)


def _batch_forward(params, X):
    cfg = config_of(params)
    H = np.tanh(X @ params["W1"].T + params["b1"])
    logits = H @ params["W_pi"].T + params["b_pi"]
    Pi = _softmax(logits)
    means = (H @ params["W_mu"].T + params["b_mu"]).reshape(len(X), cfg.mixtures, cfg.output_dim)
    R = H @ params["W_sig"].T + params["b_sig"]  # log-sigma
    return H, Pi, means, R


def batch_nll(params: dict[str, np.ndarray], batch: TrainBatch) -> float:
    X, Y = batch.inputs, batch.targets
    _, Pi, means, R = _batch_forward(params, X)
    o = means.shape[2]
    sq = np.sum((Y[:, None, :] - means) ** 2, axis=2)
    log_comp = np.log(np.maximum(Pi, 1e-300)) - sq / (2.0 * np.exp(2 * R)) - o * R - 0.5 * o * LOG_2PI
    peak = log_comp.max(axis=1, keepdims=True)
    ll = peak[:, 0] + np.log(np.exp(log_comp - peak).sum(axis=1))
    return float(-ll.mean())


def batch_gradients(params: dict[str, np.ndarray], batch: TrainBatch) -> dict[str, np.ndarray]:
    """Analytic gradient of the mean NLL over the batch."""
    X, Y = batch.inputs, batch.targets
    n = len(X)
    H, Pi, means, R = _batch_forward(params, X)
    o = means.shape[2]
    sigma2 = np.exp(2 * R)
    err = Y[:, None, :] - means  # (n, m, o)
    sq = np.sum(err ** 2, axis=2)
    log_comp = np.log(np.maximum(Pi, 1e-300)) - sq / (2.0 * sigma2) - o * R - 0.5 * o * LOG_2PI
    P = _softmax(log_comp)  # posterior responsibilities

    d_logits = -(P - Pi) / n
    d_means = -(P / sigma2)[:, :, None] * err / n
    d_R = -(P * (sq / sigma2 - o)) / n

    m = Pi.shape[1]
    d_means_flat = d_means.reshape(n, m * o)
    dH = d_logits @ params["W_pi"] + d_means_flat @ params["W_mu"] + d_R @ params["W_sig"]
    d_pre = dH * (1.0 - H * H)
    return {
        "W1": d_pre.T @ X,
        "b1": d_pre.sum(axis=0),
        "W_pi": d_logits.T @ H,
        "b_pi": d_logits.sum(axis=0),
        "W_mu": d_means_flat.T @ H,
        "b_mu": d_means_flat.sum(axis=0),
        "W_sig": d_R.T @ H,
        "b_sig": d_R.sum(axis=0),
    }


def train(
    params: dict[str, np.ndarray],
    batch: TrainBatch,
    epochs: int = 1000,
    adam_config: AdamConfig | None = None,
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Full-batch Adam on the mean NLL; returns (params, per-epoch loss).

    The returned parameters are the ones with the lowest recorded loss:
    at this scale the optimizer occasionally spikes out of a good optimum
    late in the run, and the spike must not decide what gets deployed.
    """
    if len(batch) == 0:
        raise ValueError("empty training batch")
    params = {k: v.copy() for k, v in params.items()}
    opt = Adam(adam_config or AdamConfig())
    losses = np.empty(epochs)
    best = params
    best_loss = np.inf
    for epoch in range(epochs):
        losses[epoch] = batch_nll(params, batch)
        if losses[epoch] < best_loss:
            best_loss = losses[epoch]
            best = {k: v.copy() for k, v in params.items()}
        opt.step(params, batch_gradients(params, batch))
    if batch_nll(params, batch) < best_loss:
        best = params
    return best, losses


FORMAT_VERSION = 1


def save_params(params: dict[str, np.ndarray], path, keys=PARAM_KEYS) -> None:
    """Textual weight file: version, then one 'name shape values...' line
    per array, in the fixed key order."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"selfdist-weights {FORMAT_VERSION}\n")
        for key in keys:
            arr = params[key]
            shape = ",".join(str(s) for s in arr.shape)
            values = " ".join(f"{v:.17g}" for v in arr.ravel())
            f.write(f"{key} {shape} {values}\n")


def load_params(path) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2 or header[0] != "selfdist-weights" or int(header[1]) != FORMAT_VERSION:
            raise ValueError(f"unsupported weight file header: {' '.join(header)!r}")
        params = {}
        for line in f:
            name, shape, *values = line.split()
            dims = tuple(int(s) for s in shape.split(","))
            params[name] = np.array([float(v) for v in values]).reshape(dims)
    return params
