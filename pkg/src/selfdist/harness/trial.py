"""One trial of the self/other distinction loop: perception, contingency,
prediction, belief/action update, evidence accumulation and the
outlier-triggered learning phase."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import contingency, evidence, inference, mdn, simworld
from ..evidence import EvidenceState, LearningBuffer, RecognitionConfig, Status
from ..inference import AttractorSchedule, BeliefState
from ..optim import AdamConfig
from .config import ScenarioConfig

# velocity decay time constant while no attractor goal is active
IDLE_ACTION_TAU_S = 0.3

PHASE_PRE = "pre"
PHASE_LEARNING = "learning"
PHASE_SETTLE = "settling"
PHASE_EVAL = "evaluation"


@dataclass
class TraceRecord:
    tick: int
    t: float
    phase: str
    status: str
    mu: np.ndarray
    s_p: np.ndarray
    a_cmd: np.ndarray
    s_v: np.ndarray | None
    g: np.ndarray
    sigma_star: float
    e_p_norm: float
    e_v: np.ndarray | None
    blob_speed: float
    p_cont: float
    L_i: float | None
    L: float
    p_norm: float
    p_self: float


@dataclass
class RunSummary:
    status: str
    decided_at_s: float | None
    eval_started_s: float | None
    mean_p_self_eval: float
    max_p_self_eval: float
    samples_collected: int
    mdn_trained: bool
    loss_curve: np.ndarray | None = None


def _rng_children(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def build_world(config: ScenarioConfig, rng: np.random.Generator,
                initial_joints: np.ndarray | None = None) -> simworld.World:
    arm = simworld.default_arm(config.arm_base_m)
    camera = simworld.default_camera(config.camera_position_m)
    mirror = simworld.default_mirror(config.mirror_distance_m)
    kind = {
        "mirror": "mirror",
        "twin_async": "twin",
        "twin_sync": "twin",
        "scripted_other": "scripted",
        "interactive_other": "human",
    }[config.kind]
    delay_range = (config.twin_delay_min_s, config.twin_delay_max_s)
    if config.kind == "twin_sync":
        delay_range = (0.0, 0.0)
    return simworld.World(
        arm,
        camera,
        mirror,
        kind=kind,
        initial_joints=initial_joints,
        proprio_noise_std=config.proprio_noise_std_rad,
        visual_noise_std=config.visual_noise_std,
        direction_jitter_std=config.direction_jitter_std_rad,
        motion_threshold=config.motion_threshold_per_s,
        twin_delay_range_s=delay_range,
        twin_cycle_s=config.twin_cycle_s,
        scripted_lag_s=config.scripted_lag_s,
        rng=rng,
    )


def make_classifier(config: ScenarioConfig) -> dict[str, np.ndarray]:
    """Prior contingency knowledge: train the classifier once on waving
    traces recorded across a range of stroke speeds and pattern jitters."""
    rng = np.random.default_rng(config.classifier_seed)
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    speeds = [0.4, 0.8, 1.0, 1.6]
    for k, rel_speed in enumerate(speeds):
        world = build_world(config.replace(kind="mirror"), np.random.default_rng(rng.integers(2**63)))
        pattern = simworld.default_wave_pattern()
        pattern = pattern + rng.normal(0.0, 0.08, size=pattern.shape)
        policy = simworld.WavePolicy(
            pattern=pattern,
            speed=config.wave_speed_rad_s * rel_speed,
            stroke_s=config.wave_stroke_s,
            delay_range_s=(config.wave_delay_min_s, config.wave_delay_max_s),
        )
        player = simworld.SegmentPlayer(policy.schedule(np.random.default_rng(rng.integers(2**63))))
        t, horizon = 0.0, 40.0
        while t < horizon:
            a_cmd = player.velocity(config.dt_s)
            world.step(a_cmd, config.dt_s)
            frame = world.synthesize_observation(config.dt_s)
            pairs.append((a_cmd.copy(), frame.histogram.copy()))
            t += config.dt_s
    X, y = contingency.build_dataset(pairs, rng)
    model, _ = contingency.train_classifier(
        X, y, epochs=config.classifier_epochs, lr=config.classifier_learning_rate, rng=rng
    )
    return model


class TrialRunner:
    """Tick-by-tick executor; `run_trial` drives it to completion and the
    live session server drives it in real time."""

    def __init__(
        self,
        config: ScenarioConfig,
        classifier: dict[str, np.ndarray] | None = None,
    ):
        self.config = config
        rngs = _rng_children(config.seed, 5)
        self.rng_world, self.rng_policy, self.rng_mdn, self.rng_attr, self.rng_init = rngs

        arm = simworld.default_arm(config.arm_base_m)
        q0 = np.clip(
            self.rng_init.uniform(-config.initial_joint_range_rad, config.initial_joint_range_rad, 7),
            arm.joint_limits[:, 0],
            arm.joint_limits[:, 1],
        )
        self.world = build_world(config, self.rng_world, initial_joints=q0)
        self.classifier = classifier if classifier is not None else make_classifier(config)

        self.wave_policy = simworld.WavePolicy(
            pattern=simworld.default_wave_pattern(),
            speed=config.wave_speed_rad_s,
            stroke_s=config.wave_stroke_s,
            delay_range_s=(config.wave_delay_min_s, config.wave_delay_max_s),
        )
        self.wave_player = simworld.SegmentPlayer(self.wave_policy.schedule(self.rng_policy))
        center = np.array([0.5, 0.5])
        off = np.array([config.attractor_offset_units, 0.0])
        self.attr_schedule = AttractorSchedule(
            left=center - off,
            right=center + off,
            stroke_s=config.attractor_stroke_s,
            delay_range_s=(config.attractor_delay_min_s, config.attractor_delay_max_s),
        )
        self.attr_player: simworld.SegmentPlayer | None = None  # built when evaluation begins

        self.mdn_config = mdn.MDNConfig(
            hidden_units=config.mdn_hidden_units, mixtures=config.mdn_mixtures
        )
        self.params = mdn.init_params(self.mdn_config, self.rng_mdn)
        self.trained = False
        self.loss_curve: np.ndarray | None = None

        self.precisions = config.precisions()
        self.recognition: RecognitionConfig = config.recognition()
        self.buffer = LearningBuffer(gate=config.classifier_gate_delta)
        self.ev = EvidenceState()
        self.belief = BeliefState(
            mu=self.world.state.self_joints.copy(),
            mu_prime=np.zeros(7),
            action=np.zeros(7),
        )
        self.phase = PHASE_PRE
        self.learn_start: float | None = None
        self.settle_start: float | None = None
        self.eval_start: float | None = None
        self.decided_at: float | None = None
        self.residual_window: list[np.ndarray] = []
        self.evidence_time = 0.0  # advances only while visual evidence arrives
        self.trace: list[TraceRecord] = []
        self.tick_index = 0
        self.last_p_cont = 0.0
        self.last_e_v: np.ndarray | None = None
        self._idle_decay = float(np.exp(-config.dt_s / IDLE_ACTION_TAU_S))

    # -- helpers ---------------------------------------------------------

    @property
    def t(self) -> float:
        return self.world.state.time

    def done(self) -> bool:
        cfg = self.config
        if self.t >= cfg.global_timeout_s:
            return True
        if self.phase == PHASE_EVAL and self.t - self.eval_start >= cfg.evaluation_window_s:
            return self.ev.status in (Status.SELF, Status.OTHER)
        return False

    def _finish_learning(self) -> None:
        cfg = self.config
        n = len(self.buffer)
        if n >= cfg.learn_min_samples:
            batch = mdn.TrainBatch(np.array(self.buffer.inputs), np.array(self.buffer.targets))
            self.params, self.loss_curve = mdn.train(
                self.params,
                batch,
                epochs=cfg.mdn_epochs,
                adam_config=AdamConfig(lr=cfg.mdn_learning_rate),
            )
            self.trained = True
        # hold still until motion started before evaluation has flushed out
        # of the scene (delayed replicas could otherwise look contingent)
        self.phase = PHASE_SETTLE
        self.settle_start = self.t

    def _begin_evaluation(self) -> None:
        self.phase = PHASE_EVAL
        self.eval_start = self.t
        self.ev.status = Status.UNKNOWN
        self.ev.L = 0.0
        self.ev.p_self = 0.0
        # re-sync belief after the inference pause
        self.belief = BeliefState(
            mu=self.world.state.self_joints.copy(),
            mu_prime=np.zeros(7),
            action=np.zeros(7),
        )
        # aim inside the region the model was trained on: goal endpoints from
        # the spread of blob positions seen while learning
        if len(self.buffer):
            T = np.array(self.buffer.targets)
            u_lo, u_hi = np.quantile(T[:, 0], [0.02, 0.98])
            v_mid = float(np.median(T[:, 1]))
            self.attr_schedule.left = np.array([u_lo, v_mid])
            self.attr_schedule.right = np.array([u_hi, v_mid])
        # start waving toward the far goal so the first stroke is informative
        g0, _, _ = mdn.predict(mdn.mdn_forward(self.params, self.belief.mu))
        sched = self.attr_schedule
        start = 0 if (np.linalg.norm(g0 - sched.left) >= np.linalg.norm(g0 - sched.right)) else 1
        self.attr_player = simworld.SegmentPlayer(
            sched.segments(self.rng_attr, start_index=start)
        )

    def _goal_dynamics(self, rho: np.ndarray, jac: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Constant-speed goal dynamics along the waving subspace.

        The image-space attractor force only fixes the direction; the
        magnitude is normalized so strokes run at the same joint speed the
        forward model was trained on, independent of goal distance.
        """
        cfg = self.config
        if np.linalg.norm(rho - g) <= cfg.attractor_deadband_units:
            return np.zeros(7)
        f_raw = inference.attractor_dynamics(
            self.belief.mu, rho, jac, g, beta=cfg.attractor_gain_beta,
            subspace=self.wave_policy.pattern,
        )
        u = self.wave_policy.pattern / np.linalg.norm(self.wave_policy.pattern)
        direction = np.sign(u @ f_raw)
        drive = cfg.attractor_speed_rad_s * cfg.sigma_mu / cfg.attractor_gain_beta
        return u * direction * drive

    # -- main loop -------------------------------------------------------

    def step(self) -> TraceRecord:
        cfg = self.config
        dt = cfg.dt_s
        prec = self.precisions
        recog = self.recognition

        if self.phase == PHASE_EVAL:
            a_cmd = self.belief.action.copy()
        elif self.phase == PHASE_SETTLE:
            a_cmd = np.zeros(7)
        else:
            a_cmd = self.wave_player.velocity(dt)

        self.world.step(a_cmd, dt)
        frame = self.world.synthesize_observation(dt)
        s_p = self.world.observe_proprio()
        s_v = frame.centroid
        p_cont = contingency.contingency_prob(self.classifier, a_cmd, frame.histogram)
        self.last_p_cont = p_cont

        mix = mdn.mdn_forward(self.params, self.belief.mu)
        g, sigma_star, i_star = mdn.predict(mix)
        jac = mdn.mean_jacobian(self.params, self.belief.mu, kernel=i_star)
        e_v = None if s_v is None else s_v - g
        self.last_e_v = e_v
        e_p = s_p - self.belief.mu

        rho = None
        if self.phase == PHASE_EVAL:
            rho = self.attr_player.velocity(dt)
            f = None
            if rho is not None:
                f = self._goal_dynamics(rho, jac, g)
            use_vis = self.trained and s_v is not None
            vg = None
            if use_vis and cfg.gradient_variant == "likelihood":
                vg = mdn.likelihood_gradient(self.params, self.belief.mu, s_v, mix)
            dot_mu = inference.perception_step(
                self.belief,
                s_p,
                s_v if use_vis else None,
                g,
                jac,
                f,
                prec,
                beta=cfg.attractor_gain_beta,
                visual_gradient=vg,
            )
            dot_a = inference.action_step(
                e_p, e_v if use_vis else None, jac, prec, dt, visual_gradient=vg
            )
            # the reflex gain shortens the action loop's time constant so the
            # commanded velocity tracks the belief within a stroke
            self.belief = inference.integrate(
                self.belief, dot_mu, cfg.action_gain * dot_a, dt,
                velocity_limit=cfg.velocity_limit_rad_s,
            )
            if rho is None:
                self.belief.action *= self._idle_decay
        elif self.phase in (PHASE_PRE, PHASE_SETTLE):
            dot_mu = inference.perception_step(
                self.belief, s_p, None, g, jac, None, prec, beta=cfg.attractor_gain_beta
            )
            self.belief = inference.integrate(
                self.belief, dot_mu, np.zeros(7), dt, velocity_limit=cfg.velocity_limit_rad_s
            )
        # learning phase: inference updates disabled

        L_i = None
        informative = s_v is not None and frame.blob_speed >= cfg.evidence_motion_threshold_per_s
        if informative and self.phase in (PHASE_PRE, PHASE_EVAL):
            L_i = evidence.instant_loglik(e_v, cfg.evidence_sigma_v_units2)
            self.ev.L = evidence.accumulate(
                self.ev.L, L_i, p_cont, recog.forgetting, recog.p_floor
            )
            self.ev.p_self = evidence.normalize_and_smooth(self.ev.L, recog, self.ev.p_self)
            if self.phase == PHASE_EVAL:
                self.evidence_time += dt

        if self.phase == PHASE_PRE:
            if e_v is not None:
                self.residual_window.append(e_v)
            if evidence.detect_outlier(
                self.residual_window,
                prec.sigma_v,
                recog.theta_outlier,
                self.trained,
                recog.outlier_window,
            ):
                self.phase = PHASE_LEARNING
                self.learn_start = self.t
                self.ev.status = Status.LEARNING
        elif self.phase == PHASE_LEARNING:
            if s_v is not None:
                self.buffer.offer(s_p, s_v, p_cont)
            if len(self.buffer) >= recog.n_samples or self.t - self.learn_start >= recog.learn_timeout_s:
                self._finish_learning()
        elif self.phase == PHASE_SETTLE:
            if self.t - self.settle_start >= cfg.settle_s:
                self._begin_evaluation()
        else:
            was_terminal = self.ev.status in (Status.SELF, Status.OTHER)
            # dwell timers run on evidence time, so idle gaps between
            # attractor strokes neither confirm nor refute
            self.ev = evidence.decide(
                self.ev,
                self.evidence_time,
                recog,
                evaluation_active=True,
                global_timeout=self.t >= cfg.global_timeout_s,
            )
            if not was_terminal and self.ev.status in (Status.SELF, Status.OTHER):
                self.decided_at = self.t

        p_norm = (np.exp(self.ev.L) - recog.log_min) / (recog.log_max - recog.log_min)
        p_norm = min(max(float(p_norm), 0.0), 1.0)
        record = TraceRecord(
            tick=self.tick_index,
            t=self.t,
            phase=self.phase,
            status=self.ev.status.value,
            mu=self.belief.mu.copy(),
            s_p=s_p,
            a_cmd=a_cmd,
            s_v=None if s_v is None else s_v.copy(),
            g=g,
            sigma_star=sigma_star,
            e_p_norm=float(np.linalg.norm(e_p)),
            e_v=None if e_v is None else e_v.copy(),
            blob_speed=frame.blob_speed,
            p_cont=p_cont,
            L_i=L_i,
            L=self.ev.L,
            p_norm=p_norm,
            p_self=self.ev.p_self,
        )
        self.trace.append(record)
        self.tick_index += 1
        return record

    def finalize(self) -> RunSummary:
        if self.ev.status not in (Status.SELF, Status.OTHER):
            self.ev = evidence.decide(
                self.ev, self.t, self.recognition, evaluation_active=False, global_timeout=True
            )
            self.decided_at = self.t
        eval_p = [r.p_self for r in self.trace if r.phase == PHASE_EVAL]
        return RunSummary(
            status=self.ev.status.value,
            decided_at_s=self.decided_at,
            eval_started_s=self.eval_start,
            mean_p_self_eval=float(np.mean(eval_p)) if eval_p else 0.0,
            max_p_self_eval=float(np.max(eval_p)) if eval_p else 0.0,
            samples_collected=len(self.buffer),
            mdn_trained=self.trained,
            loss_curve=self.loss_curve,
        )


def run_trial(
    config: ScenarioConfig,
    classifier: dict[str, np.ndarray] | None = None,
) -> tuple[list[TraceRecord], RunSummary]:
    if config.kind == "interactive_other":
        raise ValueError("interactive_other runs through the live session server")
    runner = TrialRunner(config, classifier=classifier)
    while not runner.done():
        runner.step()
    return runner.trace, runner.finalize()
