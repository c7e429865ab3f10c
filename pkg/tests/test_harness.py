"""Harness: configuration loading/validation, trace serialization,
trial determinism, suite reporting and the live session protocol."""

import json
import socket
import threading

import numpy as np
import pytest

from selfdist.harness.config import ConfigError, ScenarioConfig, load_config
from selfdist.harness.session import serve_session
from selfdist.harness.suite import placement_config, run_suite
from selfdist.harness.trace import COLUMNS, read_trace, write_trace
from selfdist.harness.trial import run_trial


# -- configuration ---------------------------------------------------------


def test_config_rejects_invalid_values():
    with pytest.raises(ConfigError):
        ScenarioConfig(kind="nonsense")
    with pytest.raises(ConfigError):
        ScenarioConfig(dt_s=0.0)
    with pytest.raises(ConfigError):
        ScenarioConfig(sigma_v_units2=-1.0)
    with pytest.raises(ConfigError):
        ScenarioConfig(p_self_lo=0.9, p_self_hi=0.8)
    with pytest.raises(ConfigError):
        ScenarioConfig(gradient_variant="uphill")


def test_yaml_overrides_and_unknown_keys(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("kind: twin_sync\nseed: 5\n")
    cfg = load_config(path)
    assert cfg.kind == "twin_sync" and cfg.seed == 5
    # explicit overrides beat the file
    cfg = load_config(path, overrides={"seed": 9})
    assert cfg.seed == 9
    path.write_text("no_such_key: 1\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_placement_config_is_deterministic_and_bounded():
    base = ScenarioConfig()
    a = placement_config(base, position=3, master_seed=0)
    b = placement_config(base, position=3, master_seed=0)
    assert a.arm_base_m == b.arm_base_m
    assert abs(a.arm_base_m[0] - base.arm_base_m[0]) <= base.placement_depth_range_m
    assert abs(a.arm_base_m[1] - base.arm_base_m[1]) <= base.placement_lateral_range_m
    c = placement_config(base, position=4, master_seed=0)
    assert c.arm_base_m != a.arm_base_m


# -- trace round trip ------------------------------------------------------


@pytest.fixture(scope="module")
def short_trial(fast_config, classifier):
    return run_trial(fast_config.replace(kind="mirror", seed=12), classifier=classifier)


def test_trace_roundtrip_preserves_records(short_trial, tmp_path):
    trace, _ = short_trial
    path = tmp_path / "trace.csv"
    write_trace(trace, path)
    loaded = read_trace(path)
    assert len(loaded) == len(trace)
    for a, b in zip(trace, loaded):
        assert (a.tick, a.phase, a.status) == (b.tick, b.phase, b.status)
        assert np.allclose(a.mu, b.mu, atol=1e-7)
        assert a.t == pytest.approx(b.t, abs=1e-7)
        assert (a.s_v is None) == (b.s_v is None)
        assert a.p_self == pytest.approx(b.p_self, abs=1e-7)
    # serialization is idempotent at 9 significant digits
    path2 = tmp_path / "trace2.csv"
    write_trace(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_trace_schema_is_enforced(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("not,the,schema\n")
    with pytest.raises(ValueError):
        read_trace(path)
    path.write_text(",".join(COLUMNS) + "\n" + "1,2\n")
    with pytest.raises(ValueError):
        read_trace(path)


# -- determinism -----------------------------------------------------------


def test_repeated_trials_produce_byte_identical_traces(fast_config, classifier, tmp_path):
    cfg = fast_config.replace(kind="mirror", seed=21)
    paths = []
    for i in range(2):
        trace, _ = run_trial(cfg, classifier=classifier)
        p = tmp_path / f"run{i}.csv"
        write_trace(trace, p)
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_suite_report_is_deterministic(fast_config, classifier):
    cfg = fast_config.replace(kind="mirror", seed=2)
    r1 = run_suite(cfg, positions=1, repeats=2, classifier=classifier)
    r2 = run_suite(cfg, positions=1, repeats=2, classifier=classifier)
    assert r1.to_text() == r2.to_text()
    assert r1.n_trials == 2
    assert 0.0 <= r1.success_rate("self") <= 1.0


# -- trial structure -------------------------------------------------------


def test_trial_passes_through_all_phases(short_trial):
    trace, summary = short_trial
    phases = [r.phase for r in trace]
    # the pre phase hands over to learning on its first tick (no trained
    # model yet), so the recorded trace starts at learning
    for expected in ("learning", "settling", "evaluation"):
        assert expected in phases
    assert summary.mdn_trained
    assert summary.samples_collected >= 50
    assert summary.eval_started_s is not None


def test_interactive_kind_requires_session_server():
    with pytest.raises(ValueError):
        run_trial(ScenarioConfig(kind="interactive_other"))


# -- live session protocol -------------------------------------------------


def _recv_lines(sock_file, n):
    return [json.loads(sock_file.readline()) for _ in range(n)]


def test_session_serves_state_stream_and_handles_errors(fast_config, classifier):
    cfg = fast_config.replace(kind="interactive_other", seed=33,
                              evaluation_window_s=2.0, global_timeout_s=16.0)
    ready = threading.Event()
    ports: list = []
    server = threading.Thread(
        target=serve_session,
        args=(cfg, 0),
        kwargs=dict(speed=0.0, max_sessions=1, classifier=classifier,
                    ready_event=ready, port_holder=ports),
        daemon=True,
    )
    server.start()
    assert ready.wait(10)
    with socket.create_connection(("127.0.0.1", ports[0]), timeout=30) as conn:
        f = conn.makefile("r", encoding="utf-8")
        hello = json.loads(f.readline())
        assert hello["type"] == "hello" and hello["version"] == 1
        assert hello["n_joints"] == 7 and hello["dt_s"] == cfg.dt_s
        conn.sendall(b'{"type":"action","mode":"wave_left"}\n')
        conn.sendall(b"this is not json\n")
        seen_error = False
        states = 0
        summary = None
        ticks = set()
        while True:
            line = f.readline()
            if not line:
                break
            record = json.loads(line)
            if record["type"] == "error":
                seen_error = True
            elif record["type"] == "state":
                states += 1
                ticks.add(record["tick"])
                assert 0.0 <= record["p_self"] <= 1.0
            elif record["type"] == "summary":
                summary = record
        assert seen_error
        assert states > 50 and len(ticks) == states  # one record per tick
        assert summary is not None and summary["status"] in ("self", "other")
    server.join(timeout=10)
    assert not server.is_alive()


def test_session_rejects_wrong_kind(fast_config):
    with pytest.raises(ValueError):
        serve_session(fast_config.replace(kind="mirror"), 0)
