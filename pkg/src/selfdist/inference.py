"""Active-inference core: belief and action updates descend the
precision-weighted prediction errors, with optional goal-attractor
dynamics in image space.  All functions are pure."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .mdn import MixtureOutput


@dataclass
class BeliefState:
    mu: np.ndarray  # inferred joint angles, rad
    mu_prime: np.ndarray  # first-order dynamics, held at zero
    action: np.ndarray  # joint velocity command, rad/s


@dataclass
class Precisions:
    sigma_p: float = 0.05  # proprioceptive variance, rad^2
    sigma_v: float = 0.1  # visual variance, normalized units^2
    sigma_mu: float = 0.2  # dynamics variance

    def __post_init__(self):
        if min(self.sigma_p, self.sigma_v, self.sigma_mu) <= 0:
            raise ValueError("precisions must be positive variances")


@dataclass
class StepDiagnostics:
    e_p: np.ndarray
    e_v: np.ndarray | None
    e_f: np.ndarray
    dot_mu: np.ndarray
    dot_a: np.ndarray


def attractor_dynamics(
    mu: np.ndarray,
    rho: np.ndarray | None,
    jac: np.ndarray,
    g: np.ndarray,
    beta: float = 1.0,
    subspace: np.ndarray | None = None,
) -> np.ndarray:
    """Goal dynamics f = beta J^T (rho - g); zero when no goal is active.

    When a unit `subspace` vector is given, f is projected onto it so the
    goal drives only the waving subspace of the joint space.
    """
    if rho is None:
        return np.zeros_like(mu)
    f = beta * jac.T @ (np.asarray(rho, float) - np.asarray(g, float))
    if subspace is not None:
        u = np.asarray(subspace, float)
        u = u / np.linalg.norm(u)
        f = u * (u @ f)
    return f


def perception_step(
    belief: BeliefState,
    s_p: np.ndarray | None,
    s_v: np.ndarray | None,
    g: np.ndarray,
    jac: np.ndarray,
    f: np.ndarray | None,
    precisions: Precisions,
    beta: float = 1.0,
    visual_gradient: np.ndarray | None = None,
) -> np.ndarray:
    """Belief derivative; absent sensors contribute exactly zero.

    The dynamics Jacobian df/dmu is approximated as -beta*I.  When
    visual_gradient is given (likelihood-gradient variant) it replaces the
    Jacobian-transpose visual term verbatim.
    """
    dot_mu = np.zeros_like(belief.mu)
    if s_p is not None:
        dot_mu = dot_mu + (np.asarray(s_p, float) - belief.mu) / precisions.sigma_p
    if s_v is not None:
        if visual_gradient is not None:
            dot_mu = dot_mu + visual_gradient
        else:
            e_v = np.asarray(s_v, float) - g
            dot_mu = dot_mu + jac.T @ e_v / precisions.sigma_v
    if f is not None:
        e_f = belief.mu_prime - f
        dot_mu = dot_mu + (-beta) * e_f / precisions.sigma_mu
    return dot_mu


def action_step(
    e_p: np.ndarray | None,
    e_v: np.ndarray | None,
    jac: np.ndarray,
    precisions: Precisions,
    dt: float,
    visual_gradient: np.ndarray | None = None,
) -> np.ndarray:
    """Action derivative; dt realizes ds/da under velocity control."""
    dot_a = np.zeros(jac.shape[1])
    if e_p is not None:
        dot_a = dot_a - dt * np.asarray(e_p, float) / precisions.sigma_p
    if e_v is not None:
        if visual_gradient is not None:
            dot_a = dot_a - dt * visual_gradient
        else:
            dot_a = dot_a - dt * jac.T @ np.asarray(e_v, float) / precisions.sigma_v
    return dot_a


def integrate(
    belief: BeliefState,
    dot_mu: np.ndarray,
    dot_a: np.ndarray,
    dt: float,
    velocity_limit: float = 0.5,
) -> BeliefState:
    """First-order Euler step; action clamped per joint; mu' held at zero."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    action = np.clip(belief.action + dt * dot_a, -velocity_limit, velocity_limit)
    return BeliefState(
        mu=belief.mu + dt * dot_mu,
        mu_prime=belief.mu_prime.copy(),
        action=action,
    )


def free_energy(
    belief: BeliefState,
    s_p: np.ndarray | None,
    s_v: np.ndarray | None,
    g: np.ndarray,
    f: np.ndarray | None,
    precisions: Precisions,
) -> float:
    """Laplace free energy used as a descent diagnostic: quadratic
    residual terms plus the per-dimension log-variance constant."""
    total = 0.0
    n_mu = len(belief.mu)
    if s_p is not None:
        e_p = np.asarray(s_p, float) - belief.mu
        total += 0.5 * float(e_p @ e_p) / precisions.sigma_p
    total += 0.5 * n_mu * np.log(precisions.sigma_p)
    if s_v is not None:
        e_v = np.asarray(s_v, float) - np.asarray(g, float)
        total += 0.5 * float(e_v @ e_v) / precisions.sigma_v
        total += 0.5 * len(e_v) * np.log(precisions.sigma_v)
    else:
        total += 0.5 * 2 * np.log(precisions.sigma_v)
    if f is not None:
        e_f = belief.mu_prime - f
        total += 0.5 * float(e_f @ e_f) / precisions.sigma_mu
    total += 0.5 * n_mu * np.log(precisions.sigma_mu)
    return float(total)


@dataclass
class AttractorSchedule:
    """Alternating left/right image targets: each active for a fixed
    stroke, separated by randomized idle delays."""

    left: np.ndarray = field(default_factory=lambda: np.array([0.35, 0.5]))
    right: np.ndarray = field(default_factory=lambda: np.array([0.65, 0.5]))
    stroke_s: float = 2.0
    delay_range_s: tuple[float, float] = (0.0, 3.0)

    def segments(self, rng: np.random.Generator, start_index: int = 0):
        """Yield (duration, rho-or-None) segments forever."""
        targets = (self.left, self.right)
        i = start_index
        while True:
            yield self.stroke_s, targets[i % 2]
            lo, hi = self.delay_range_s
            yield rng.uniform(lo, hi), None
            i += 1
