"""Suite execution: placements x repeats, deterministic per master seed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .trial import RunSummary, make_classifier, run_trial


@dataclass
class TrialResult:
    position: int
    repeat: int
    seed: int
    summary: RunSummary | None
    error: str | None = None


@dataclass
class SuiteReport:
    kind: str
    master_seed: int
    results: list[TrialResult]

    @property
    def n_trials(self) -> int:
        return len(self.results)

    @property
    def success_statuses(self) -> list[str]:
        return [r.summary.status for r in self.results if r.summary is not None]

    def success_rate(self, target_status: str) -> float:
        ok = sum(1 for r in self.results if r.summary and r.summary.status == target_status)
        return ok / max(self.n_trials, 1)

    def mean_p_self(self) -> float:
        vals = [r.summary.mean_p_self_eval for r in self.results if r.summary]
        return float(np.mean(vals)) if vals else 0.0

    def to_text(self) -> str:
        """Deterministic textual report."""
        lines = [f"suite kind={self.kind} master_seed={self.master_seed} trials={self.n_trials}"]
        for r in self.results:
            if r.summary is None:
                lines.append(f"pos={r.position} rep={r.repeat} seed={r.seed} ERROR {r.error}")
            else:
                s = r.summary
                decided = "" if s.decided_at_s is None else f"{s.decided_at_s:.9g}"
                lines.append(
                    f"pos={r.position} rep={r.repeat} seed={r.seed} status={s.status} "
                    f"decided_at_s={decided} mean_p_self={s.mean_p_self_eval:.9g} "
                    f"max_p_self={s.max_p_self_eval:.9g} samples={s.samples_collected} "
                    f"trained={int(s.mdn_trained)}"
                )
        counts: dict[str, int] = {}
        for status in self.success_statuses:
            counts[status] = counts.get(status, 0) + 1
        summary = " ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        lines.append(f"totals {summary}")
        return "\n".join(lines) + "\n"


def placement_config(config: ScenarioConfig, position: int, master_seed: int) -> ScenarioConfig:
    """Randomize the arm base placement for one suite position."""
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, position]))
    dx = rng.uniform(-config.placement_depth_range_m, config.placement_depth_range_m)
    dy = rng.uniform(-config.placement_lateral_range_m, config.placement_lateral_range_m)
    base = (config.arm_base_m[0] + dx, config.arm_base_m[1] + dy, config.arm_base_m[2])
    return config.replace(arm_base_m=base)


def run_suite(
    config: ScenarioConfig,
    positions: int = 10,
    repeats: int = 10,
    classifier: dict[str, np.ndarray] | None = None,
) -> SuiteReport:
    """Independent seeded trials; failures are recorded, the suite continues."""
    master = config.seed
    if classifier is None:
        classifier = make_classifier(config)
    results: list[TrialResult] = []
    for pos in range(positions):
        pos_config = placement_config(config, pos, master)
        for rep in range(repeats):
            seed = int(np.random.SeedSequence([master, pos, rep]).generate_state(1)[0])
            trial_config = pos_config.replace(seed=seed)
            try:
                _, summary = run_trial(trial_config, classifier=classifier)
                results.append(TrialResult(pos, rep, seed, summary))
            except Exception as exc:  # record and continue
                results.append(TrialResult(pos, rep, seed, None, error=str(exc)))
    return SuiteReport(kind=config.kind, master_seed=master, results=results)
