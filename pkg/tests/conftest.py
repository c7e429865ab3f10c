"""Shared fixtures: a fast trial configuration and the contingency
classifier, trained once per test session."""

from __future__ import annotations

import numpy as np
import pytest

from selfdist.harness.config import ScenarioConfig
from selfdist.harness.trial import make_classifier


@pytest.fixture(scope="session")
def default_config() -> ScenarioConfig:
    return ScenarioConfig()


@pytest.fixture(scope="session")
def classifier(default_config):
    """Contingency classifier trained on recorded waving traces; expensive,
    so shared across the whole session."""
    return make_classifier(default_config)


@pytest.fixture(scope="session")
def fast_config() -> ScenarioConfig:
    """Cheap trial configuration for structural tests (trace round trips,
    determinism, protocol) where decision quality is not under test."""
    return ScenarioConfig(
        mdn_epochs=120,
        learn_timeout_s=8.0,
        settle_s=1.0,
        evaluation_window_s=6.0,
        global_timeout_s=25.0,
    )
