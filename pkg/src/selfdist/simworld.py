"""Deterministic world model: arm kinematics, mirror, camera and the
synthetic optical-flow observation (blob centroid + direction histogram).

The real-image optical flow front end is replaced by an analytic
surrogate: the moving blob is the (reflected) end-effector point and its
velocity comes from the frame difference of the projected position.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

HIST_BINS = 10


def _rotation(axis: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    if axis == "x":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    if axis == "y":
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    if axis == "z":
        return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    raise ValueError(f"unknown axis {axis!r}")


@dataclass
class RigidTransform:
    rotation: np.ndarray  # 3x3
    translation: np.ndarray  # 3

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, p: np.ndarray) -> np.ndarray:
        return self.rotation @ p + self.translation


@dataclass
class ArmModel:
    """Serial chain of 7 revolute joints; link i extends along the local
    x axis after rotating about joint i's axis."""

    link_lengths: np.ndarray  # meters, (7,)
    joint_limits: np.ndarray  # radians, (7, 2) [lo, hi]
    base_pose: RigidTransform
    joint_axes: tuple[str, ...] = ("z", "y", "z", "y", "z", "y", "z")

    def __post_init__(self):
        self.link_lengths = np.asarray(self.link_lengths, dtype=float)
        self.joint_limits = np.asarray(self.joint_limits, dtype=float)
        if np.any(self.link_lengths <= 0):
            raise ValueError("link_lengths must be positive")
        if np.any(self.joint_limits[:, 0] >= self.joint_limits[:, 1]):
            raise ValueError("joint_limits must satisfy lo < hi")
        if len(self.joint_axes) != len(self.link_lengths):
            raise ValueError("one axis per link required")

    @property
    def n_joints(self) -> int:
        return len(self.link_lengths)


@dataclass
class CameraSpec:
    focal_length: float  # pixels
    image_size: np.ndarray  # (width, height) pixels
    pose: RigidTransform  # world -> camera

    def __post_init__(self):
        self.image_size = np.asarray(self.image_size, dtype=float)
        if self.focal_length <= 0:
            raise ValueError("focal_length must be positive")
        if np.any(self.image_size <= 0):
            raise ValueError("image_size components must be positive")


@dataclass
class MirrorSpec:
    point: np.ndarray  # a point on the mirror plane
    normal: np.ndarray  # unit vector

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=float)
        self.normal = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-9:
            raise ValueError("mirror normal must be a unit vector")


@dataclass
class WorldState:
    time: float
    self_joints: np.ndarray
    other_joints: np.ndarray | None = None
    other_kind: str = "none"  # none | twin | scripted | human


@dataclass
class VisualFrame:
    """Synthetic optical-flow observation for one tick."""

    centroid: np.ndarray | None  # normalized image coords in [0,1]^2
    histogram: np.ndarray  # 10 direction-bin frequencies, sum 1 or all 0
    blob_speed: float  # normalized units / second
    moving: bool


def forward_kinematics(arm: ArmModel, q: np.ndarray) -> np.ndarray:
    """End-effector position in the world frame."""
    q = np.asarray(q, dtype=float)
    if np.any(q < arm.joint_limits[:, 0] - 1e-12) or np.any(q > arm.joint_limits[:, 1] + 1e-12):
        raise ValueError("joint angles out of limits")
    rot = arm.base_pose.rotation.copy()
    pos = arm.base_pose.translation.copy()
    for axis, angle, length in zip(arm.joint_axes, q, arm.link_lengths):
        rot = rot @ _rotation(axis, angle)
        pos = pos + rot @ np.array([length, 0.0, 0.0])
    return pos


def mirror_reflect(mirror: MirrorSpec, p: np.ndarray) -> np.ndarray:
    """Reflect a world point across the mirror plane."""
    p = np.asarray(p, dtype=float)
    return p - 2.0 * np.dot(p - mirror.point, mirror.normal) * mirror.normal


def project_point(camera: CameraSpec, p: np.ndarray) -> np.ndarray | None:
    """Pinhole projection to normalized image coordinates.

    Returns None when the point is behind the camera or outside the frame.
    """
    pc = camera.pose.apply(np.asarray(p, dtype=float))
    if pc[2] <= 1e-9:
        return None
    w, h = camera.image_size
    u = w / 2.0 + camera.focal_length * pc[0] / pc[2]
    v = h / 2.0 + camera.focal_length * pc[1] / pc[2]
    uv = np.array([u / w, v / h])
    if np.any(uv < 0.0) or np.any(uv > 1.0):
        return None
    return uv


def clamp_joints(arm: ArmModel, q: np.ndarray) -> np.ndarray:
    return np.clip(q, arm.joint_limits[:, 0], arm.joint_limits[:, 1])


def direction_histogram(
    angle: float,
    rng: np.random.Generator,
    jitter_std: float,
    n_samples: int = 32,
) -> np.ndarray:
    """Bin jittered copies of a flow direction into 10 bins over [-pi, pi)."""
    angles = angle + (rng.normal(0.0, jitter_std, size=n_samples) if jitter_std > 0 else 0.0)
    angles = np.mod(np.atleast_1d(angles) + np.pi, 2.0 * np.pi) - np.pi
    idx = np.floor((angles + np.pi) / (2.0 * np.pi / HIST_BINS)).astype(int)
    idx = np.clip(idx, 0, HIST_BINS - 1)
    hist = np.bincount(idx, minlength=HIST_BINS).astype(float)
    return hist / hist.sum()


@dataclass
class WavePolicy:
    """Left/right waving in joint space: +w*pattern for a fixed stroke
    time, an idle delay, -w*pattern, another delay, repeating.  Delays are
    resampled per cycle so the motion is not periodic."""

    pattern: np.ndarray  # unit direction in joint space
    speed: float = 0.25  # rad/s along the pattern
    stroke_s: float = 2.0
    delay_range_s: tuple[float, float] = (0.0, 3.0)

    def __post_init__(self):
        self.pattern = np.asarray(self.pattern, dtype=float)
        n = np.linalg.norm(self.pattern)
        if n == 0:
            raise ValueError("wave pattern must be nonzero")
        self.pattern = self.pattern / n

    def schedule(self, rng: np.random.Generator):
        """Yield (duration_s, velocity) segments forever."""
        sign = 1.0
        while True:
            yield self.stroke_s, sign * self.speed * self.pattern
            lo, hi = self.delay_range_s
            yield rng.uniform(lo, hi), np.zeros_like(self.pattern)
            sign = -sign


class SegmentPlayer:
    """Steps through a (duration, velocity) segment generator at tick rate."""

    def __init__(self, segments):
        self._segments = segments
        self._remaining = 0.0
        self._velocity = None

    def velocity(self, dt: float) -> np.ndarray:
        while self._remaining <= 1e-12:
            duration, vel = next(self._segments)
            self._remaining = duration
            self._velocity = vel
        self._remaining -= dt
        return self._velocity


class World:
    """One simulated trial world: self arm seen via the mirror, or a
    foreign agent standing where the mirror image would be."""

    def __init__(
        self,
        arm: ArmModel,
        camera: CameraSpec,
        mirror: MirrorSpec,
        kind: str = "mirror",  # mirror | twin | scripted | human
        initial_joints: np.ndarray | None = None,
        proprio_noise_std: float = 0.005,
        visual_noise_std: float = 0.005,
        direction_jitter_std: float = 0.2,
        motion_threshold: float = 0.02,
        twin_delay_range_s: tuple[float, float] = (0.5, 3.0),
        twin_cycle_s: float = 3.5,
        scripted_lag_s: float = 0.5,
        rng: np.random.Generator | None = None,
        history_horizon_s: float = 30.0,
    ):
        if kind not in ("mirror", "twin", "scripted", "human"):
            raise ValueError(f"unknown world kind {kind!r}")
        self.arm = arm
        self.camera = camera
        self.mirror = mirror
        self.kind = kind
        self.rng = rng if rng is not None else np.random.default_rng(0)
        q0 = np.zeros(arm.n_joints) if initial_joints is None else np.asarray(initial_joints, float)
        self.state = WorldState(
            time=0.0,
            self_joints=clamp_joints(arm, q0),
            other_joints=(None if kind == "mirror" else clamp_joints(arm, q0.copy())),
            other_kind={"mirror": "none", "twin": "twin", "scripted": "scripted", "human": "human"}[kind],
        )
        self.proprio_noise_std = proprio_noise_std
        self.visual_noise_std = visual_noise_std
        self.direction_jitter_std = direction_jitter_std
        self.motion_threshold = motion_threshold
        self.twin_delay_range_s = twin_delay_range_s
        self.twin_cycle_s = twin_cycle_s
        self.scripted_lag_s = scripted_lag_s
        # (time, self_joints) ring for delayed replay by twin/scripted agents
        self._history: deque[tuple[float, np.ndarray]] = deque()
        self._history_horizon_s = history_horizon_s
        self._history.append((0.0, self.state.self_joints.copy()))
        self._twin_delay = self._draw_twin_delay() if kind == "twin" else 0.0
        self._twin_next_resample = self.twin_cycle_s
        self._human_command = np.zeros(arm.n_joints)
        self._prev_uv: np.ndarray | None = None

    def _draw_twin_delay(self) -> float:
        lo, hi = self.twin_delay_range_s
        return self.rng.uniform(lo, hi)

    def set_human_command(self, velocity: np.ndarray) -> None:
        self._human_command = np.asarray(velocity, dtype=float).copy()

    def _delayed_self_joints(self, t_query: float) -> np.ndarray:
        if t_query <= self._history[0][0]:
            return self._history[0][1]
        prev_t, prev_q = self._history[0]
        for t, q in self._history:
            if t >= t_query:
                if t == prev_t:
                    return q
                w = (t_query - prev_t) / (t - prev_t)
                return (1 - w) * prev_q + w * q
            prev_t, prev_q = t, q
        return self._history[-1][1]

    def step(self, self_action: np.ndarray, dt: float) -> WorldState:
        """Advance by one tick of velocity control."""
        if dt <= 0:
            raise ValueError("dt must be positive")
        s = self.state
        t_new = s.time + dt
        q_self = clamp_joints(self.arm, s.self_joints + np.asarray(self_action, float) * dt)
        self._history.append((t_new, q_self.copy()))
        while self._history[0][0] < t_new - self._history_horizon_s:
            self._history.popleft()

        other = s.other_joints
        if self.kind == "twin":
            if t_new >= self._twin_next_resample:
                self._twin_delay = self._draw_twin_delay()
                self._twin_next_resample += self.twin_cycle_s
            other = self._delayed_self_joints(t_new - self._twin_delay)
        elif self.kind == "scripted":
            other = self._delayed_self_joints(t_new - self.scripted_lag_s)
        elif self.kind == "human":
            other = clamp_joints(self.arm, other + self._human_command * dt)

        self.state = WorldState(
            time=t_new,
            self_joints=q_self,
            other_joints=None if other is None else np.asarray(other, float).copy(),
            other_kind=s.other_kind,
        )
        return self.state

    def observe_proprio(self) -> np.ndarray:
        noise = self.rng.normal(0.0, self.proprio_noise_std, size=self.arm.n_joints)
        return self.state.self_joints + noise

    def blob_world_point(self) -> np.ndarray:
        """World position of the visible moving blob: the mirror image of
        the self hand, or of the foreign agent's hand (the agent stands
        where the mirror image would be, with mirrored pose)."""
        if self.kind == "mirror":
            joints = self.state.self_joints
        else:
            joints = self.state.other_joints
        return mirror_reflect(self.mirror, forward_kinematics(self.arm, joints))

    def synthesize_observation(self, dt: float) -> VisualFrame:
        """Centroid + flow-direction histogram for the current tick.

        Blob speed and direction come from the frame difference of the
        noiseless projection; Gaussian noise goes on the reported centroid
        and Gaussian jitter on the direction samples.
        """
        uv = project_point(self.camera, self.blob_world_point())
        prev_uv, self._prev_uv = self._prev_uv, uv
        zero_hist = np.zeros(HIST_BINS)
        if uv is None:
            return VisualFrame(None, zero_hist, 0.0, False)
        if prev_uv is None:
            return VisualFrame(None, zero_hist, 0.0, False)
        velocity = (uv - prev_uv) / dt
        speed = float(np.linalg.norm(velocity))
        if speed < self.motion_threshold:
            return VisualFrame(None, zero_hist, speed, False)
        angle = float(np.arctan2(velocity[1], velocity[0]))
        hist = direction_histogram(angle, self.rng, self.direction_jitter_std)
        centroid = uv + self.rng.normal(0.0, self.visual_noise_std, size=2)
        centroid = np.clip(centroid, 0.0, 1.0)
        return VisualFrame(centroid, hist, speed, True)


# Default geometry: world x forward (toward the mirror), y left, z up.

def default_arm(base_xyz=(0.0, 0.0, 0.8)) -> ArmModel:
    return ArmModel(
        link_lengths=np.array([0.2, 0.15, 0.15, 0.1, 0.1, 0.1, 0.1]),
        joint_limits=np.tile(np.array([-1.5, 1.5]), (7, 1)),
        base_pose=RigidTransform(np.eye(3), np.asarray(base_xyz, float)),
    )


def default_camera(position=(0.0, 0.0, 1.2)) -> CameraSpec:
    # camera looks along world +x; image right = -y_w, image down = -z_w
    rot = np.array([
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
    ])
    t = np.asarray(position, float)
    # world -> camera: x_c = R (p - t)
    return CameraSpec(
        focal_length=500.0,
        image_size=np.array([640.0, 480.0]),
        pose=RigidTransform(rot, -rot @ t),
    )


def default_mirror(distance: float = 1.5) -> MirrorSpec:
    return MirrorSpec(point=np.array([distance, 0.0, 0.0]), normal=np.array([-1.0, 0.0, 0.0]))


def default_wave_pattern(n_joints: int = 7) -> np.ndarray:
    pattern = np.zeros(n_joints)
    pattern[0] = 1.0
    pattern[2] = 0.5
    return pattern
