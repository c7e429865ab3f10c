"""Scenario configuration: every tunable has a unit-suffixed key and a
default; YAML config files override field by field."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import yaml

from ..evidence import RecognitionConfig
from ..inference import Precisions

SCENARIO_KINDS = ("mirror", "twin_async", "twin_sync", "scripted_other", "interactive_other")
GRADIENT_VARIANTS = ("jacobian", "likelihood")


class ConfigError(ValueError):
    """Invalid configuration; message carries the offending field path."""


@dataclass
class ScenarioConfig:
    kind: str = "mirror"
    seed: int = 0
    dt_s: float = 0.05
    gradient_variant: str = "jacobian"

    # trial phases
    learn_timeout_s: float = 20.0
    settle_s: float = 3.0  # still period after learning; flushes delayed replicas
    evaluation_window_s: float = 30.0
    global_timeout_s: float = 60.0

    # geometry
    arm_base_m: tuple[float, float, float] = (0.0, 0.0, 0.8)
    camera_position_m: tuple[float, float, float] = (0.0, 0.0, 1.2)
    mirror_distance_m: float = 1.5
    focal_length_px: float = 500.0
    image_width_px: float = 640.0
    image_height_px: float = 480.0

    # placement randomization (suite positions)
    placement_lateral_range_m: float = 0.15
    placement_depth_range_m: float = 0.2
    initial_joint_range_rad: float = 0.15

    # sensors / synthetic flow
    proprio_noise_std_rad: float = 0.005
    visual_noise_std: float = 0.005
    direction_jitter_std_rad: float = 0.2
    motion_threshold_per_s: float = 0.02
    # below this cue speed the contingency signal is uninformative and
    # evidence accumulation pauses
    evidence_motion_threshold_per_s: float = 0.04

    # self waving policy
    wave_speed_rad_s: float = 0.25
    wave_stroke_s: float = 2.0
    wave_delay_min_s: float = 0.0
    wave_delay_max_s: float = 3.0

    # foreign agents
    twin_delay_min_s: float = 0.5
    twin_delay_max_s: float = 3.0
    twin_cycle_s: float = 3.5
    scripted_lag_s: float = 0.5

    # active inference
    sigma_p_rad2: float = 0.05
    sigma_v_units2: float = 0.1
    sigma_mu: float = 0.2
    attractor_gain_beta: float = 1.0
    action_gain: float = 20.0
    velocity_limit_rad_s: float = 0.5
    attractor_offset_units: float = 0.15
    # goal dynamics drive the belief at this constant joint speed and
    # release the goal once the prediction is within the deadband
    attractor_speed_rad_s: float = 0.35
    attractor_deadband_units: float = 0.02
    attractor_stroke_s: float = 2.0
    attractor_delay_min_s: float = 0.0
    attractor_delay_max_s: float = 1.0

    # MDN
    mdn_hidden_units: int = 20
    mdn_mixtures: int = 4
    mdn_epochs: int = 1000
    mdn_batch_samples: int = 200
    mdn_learning_rate: float = 0.01

    # contingency classifier
    classifier_epochs: int = 500
    classifier_learning_rate: float = 0.01
    classifier_gate_delta: float = 0.5
    classifier_seed: int = 1234

    # evidence / recognition
    # variance of the self-residual under a trained model; much tighter
    # than the inference variance so delayed replicas score poorly
    evidence_sigma_v_units2: float = 8e-3
    evidence_forgetting: float = 0.90
    evidence_smoothing_gain: float = 0.25
    evidence_p_floor: float = 0.1
    outlier_threshold: float = 0.5
    outlier_window_ticks: int = 10
    learn_min_samples: int = 50
    p_self_hi: float = 0.8
    p_self_lo: float = 0.2
    decide_dwell_s: float = 3.0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"kind: unknown scenario {self.kind!r} (expected one of {SCENARIO_KINDS})")
        if self.gradient_variant not in GRADIENT_VARIANTS:
            raise ConfigError(f"gradient_variant: expected one of {GRADIENT_VARIANTS}")
        for name in ("dt_s", "learn_timeout_s", "evaluation_window_s", "global_timeout_s",
                     "wave_stroke_s", "attractor_stroke_s", "focal_length_px", "action_gain"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name}: must be positive")
        for name in ("sigma_p_rad2", "sigma_v_units2", "sigma_mu", "evidence_sigma_v_units2"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name}: must be a positive variance")
        if self.kind == "scripted_other" and self.scripted_lag_s < 0:
            raise ConfigError("scripted_lag_s: must be nonnegative")
        if not (0 <= self.p_self_lo < self.p_self_hi <= 1):
            raise ConfigError("p_self_lo/p_self_hi: need 0 <= lo < hi <= 1")

    def precisions(self) -> Precisions:
        return Precisions(self.sigma_p_rad2, self.sigma_v_units2, self.sigma_mu)

    def recognition(self) -> RecognitionConfig:
        from ..evidence import calibrate_log_bounds
        cfg = RecognitionConfig(
            smoothing_gain=self.evidence_smoothing_gain,
            forgetting=self.evidence_forgetting,
            p_floor=self.evidence_p_floor,
            theta_outlier=self.outlier_threshold,
            outlier_window=self.outlier_window_ticks,
            n_samples=self.mdn_batch_samples,
            n_min=self.learn_min_samples,
            learn_timeout_s=self.learn_timeout_s,
            p_hi=self.p_self_hi,
            p_lo=self.p_self_lo,
            decide_dwell_s=self.decide_dwell_s,
        )
        return calibrate_log_bounds(cfg, self.evidence_sigma_v_units2)

    def replace(self, **kwargs) -> "ScenarioConfig":
        return dataclasses.replace(self, **kwargs)


def load_config(path=None, overrides: dict | None = None) -> ScenarioConfig:
    """Defaults, then YAML file values, then explicit overrides."""
    values: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config file must be a mapping")
        known = {f.name for f in dataclasses.fields(ScenarioConfig)}
        for key, value in data.items():
            if key not in known:
                raise ConfigError(f"{key}: unknown config key")
            if isinstance(value, list):
                value = tuple(value)
            values[key] = value
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ScenarioConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
