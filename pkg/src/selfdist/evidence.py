"""Self-recognition evidence: instantaneous surprise, contingency-weighted
accumulation with forgetting, normalization/smoothing into p_self,
outlier-triggered learning bookkeeping and the final self/other decision."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))


class Status(str, Enum):
    UNKNOWN = "unknown"
    LEARNING = "learning"
    SELF = "self"
    OTHER = "other"


@dataclass
class RecognitionConfig:
    log_min: float = 0.0  # lower anchor on exp(L)
    log_max: float = 1.0  # upper anchor on exp(L)
    smoothing_gain: float = 0.2  # K
    forgetting: float = 0.85  # lambda; 1 recovers the unbounded sum
    p_floor: float = 1e-3  # clamp for ln p(contingent)
    theta_outlier: float = 0.5  # mean Mahalanobis threshold
    outlier_window: int = 10
    n_samples: int = 200  # N_s: buffer size that triggers training
    n_min: int = 50  # minimum buffer for training on timeout
    learn_timeout_s: float = 20.0
    p_hi: float = 0.8
    p_lo: float = 0.2
    decide_dwell_s: float = 3.0

    def __post_init__(self):
        if self.log_max <= self.log_min:
            raise ValueError("log_max must exceed log_min")
        if not (0.0 < self.smoothing_gain <= 1.0):
            raise ValueError("smoothing gain must be in (0, 1]")
        if not (0.0 <= self.forgetting <= 1.0):
            raise ValueError("forgetting factor must be in [0, 1]")
        if self.p_lo >= self.p_hi:
            raise ValueError("thresholds must satisfy p_lo < p_hi")


def calibrate_log_bounds(cfg: RecognitionConfig, sigma_v: float, n: int = 2) -> RecognitionConfig:
    """Anchor the normalization to this configuration: the upper bound is
    exp of the steady-state accumulated value at zero residual with
    p(contingent)=1; the lower at a 3-sigma residual with the clamped
    contingency floor."""
    li_zero = instant_loglik(np.zeros(n), sigma_v, n)
    scale = 1.0 / (1.0 - cfg.forgetting) if cfg.forgetting < 1.0 else 1.0
    log_max = float(np.exp(li_zero * scale))
    e3 = np.full(n, 3.0 * np.sqrt(sigma_v))
    li_3s = instant_loglik(e3, sigma_v, n) + np.log(cfg.p_floor)
    log_min = float(np.exp(li_3s * scale))
    cfg.log_max = log_max
    cfg.log_min = min(log_min, log_max / 1e6)
    return cfg


@dataclass
class EvidenceState:
    L: float = 0.0  # accumulated log-evidence
    p_self: float = 0.0
    status: Status = Status.UNKNOWN
    above_since: float | None = None  # dwell timers, trial time
    below_since: float | None = None


def instant_loglik(e_v: np.ndarray, sigma_v: float, n: int = 2) -> float:
    """Log-likelihood that the current model generated the observed cue:
    -1/2 (e^T S^-1 e + ln det S + n ln 2pi) with S = sigma_v * I_n."""
    if sigma_v <= 0:
        raise ValueError("sigma_v must be positive")
    e_v = np.asarray(e_v, dtype=float)
    quad = float(e_v @ e_v) / sigma_v
    return -0.5 * (quad + n * np.log(sigma_v) + n * LOG_2PI)


def accumulate(L: float, L_i: float, p_cont: float, forgetting: float, p_floor: float = 1e-3) -> float:
    """L <- lambda*L + L_i + ln p(contingent), contingency clamped so the
    accumulator stays finite."""
    p = min(max(p_cont, p_floor), 1.0)
    return forgetting * L + L_i + float(np.log(p))


def normalize_and_smooth(L: float, cfg: RecognitionConfig, p_self: float) -> float:
    p_norm = (np.exp(L) - cfg.log_min) / (cfg.log_max - cfg.log_min)
    p_norm = min(max(float(p_norm), 0.0), 1.0)
    return p_self + cfg.smoothing_gain * (p_norm - p_self)


def detect_outlier(
    recent_e_v: list[np.ndarray],
    sigma_v: float,
    theta_outlier: float,
    model_trained: bool,
    window: int = 10,
) -> bool:
    """Flag when the windowed mean Mahalanobis distance strictly exceeds
    the threshold, or unconditionally while no trained model exists."""
    if not model_trained:
        return True
    if len(recent_e_v) < window:
        return False
    tail = recent_e_v[-window:]
    dists = [float(np.asarray(e) @ np.asarray(e)) / sigma_v for e in tail]
    return float(np.mean(dists)) > theta_outlier


@dataclass
class LearningBuffer:
    """Contingency-gated (s_p, s_v) sample buffer for MDN retraining."""

    gate: float = 0.5  # delta: admit when p(contingent) > gate
    inputs: list = field(default_factory=list)
    targets: list = field(default_factory=list)

    def offer(self, s_p: np.ndarray, s_v: np.ndarray, p_cont: float) -> bool:
        if p_cont > self.gate:
            self.inputs.append(np.asarray(s_p, float).copy())
            self.targets.append(np.asarray(s_v, float).copy())
            return True
        return False

    def __len__(self) -> int:
        return len(self.inputs)


def decide(
    state: EvidenceState,
    t: float,
    cfg: RecognitionConfig,
    evaluation_active: bool,
    global_timeout: bool = False,
) -> EvidenceState:
    """Dwell-threshold decision; terminal states never change."""
    if state.status in (Status.SELF, Status.OTHER):
        return state
    if global_timeout:
        state.status = Status.OTHER
        return state
    if not evaluation_active:
        state.above_since = None
        state.below_since = None
        return state
    if state.p_self > cfg.p_hi:
        state.above_since = t if state.above_since is None else state.above_since
    else:
        state.above_since = None
    if state.p_self < cfg.p_lo:
        state.below_since = t if state.below_since is None else state.below_since
    else:
        state.below_since = None
    if state.above_since is not None and t - state.above_since >= cfg.decide_dwell_s:
        state.status = Status.SELF
    elif state.below_since is not None and t - state.below_since >= cfg.decide_dwell_s:
        state.status = Status.OTHER
    return state
