"""Live interactive session: runs the interactive_other scenario at the
tick rate, publishing one state record per tick and applying the newest
human action at tick boundaries.

Wire format: newline-delimited JSON records over TCP.
Record types: hello (version handshake), state (server per tick),
action (client), error (server).  Malformed client records produce an
error record; the session continues.  On disconnect the foreign agent
freezes.
"""

from __future__ import annotations

import json
import socket
import threading
import time

import numpy as np

from .. import simworld
from ..evidence import Status
from .config import ScenarioConfig
from .trial import TrialRunner

PROTOCOL_VERSION = 1


class _Mailbox:
    """Newest-command-wins mailbox, swapped atomically at tick boundaries."""

    def __init__(self):
        self._lock = threading.Lock()
        self._command: np.ndarray | None = None

    def put(self, velocity: np.ndarray) -> None:
        with self._lock:
            self._command = velocity

    def take(self) -> np.ndarray | None:
        with self._lock:
            cmd, self._command = self._command, None
            return cmd


def _action_to_velocity(record: dict, pattern: np.ndarray, speed: float) -> np.ndarray:
    mode = record.get("mode")
    if mode == "wave_left":
        return speed * pattern
    if mode == "wave_right":
        return -speed * pattern
    if mode == "stop":
        return np.zeros_like(pattern)
    if mode == "velocity":
        vel = record.get("velocity")
        if not isinstance(vel, list) or len(vel) != len(pattern):
            raise ValueError(f"velocity must be a list of {len(pattern)} numbers")
        return np.asarray(vel, dtype=float)
    raise ValueError(f"unknown action mode {mode!r}")


def _state_record(runner: TrialRunner) -> dict:
    other = runner.world.state.other_joints
    e_v = runner.last_e_v
    return {
        "type": "state",
        "tick": runner.tick_index,
        "t": round(runner.t, 9),
        "other_joints": [round(float(v), 9) for v in (other if other is not None else [])],
        "p_self": round(float(runner.ev.p_self), 9),
        "p_cont": round(float(runner.last_p_cont), 9),
        "e_v": None if e_v is None else [round(float(v), 9) for v in e_v],
        "phase": runner.phase,
        "status": runner.ev.status.value,
    }


def serve_session(
    config: ScenarioConfig,
    port: int,
    host: str = "127.0.0.1",
    speed: float = 1.0,
    max_sessions: int = 1,
    classifier: dict[str, np.ndarray] | None = None,
    ready_event: threading.Event | None = None,
    port_holder: list | None = None,
) -> None:
    """Serve `max_sessions` interactive sessions, then return.

    speed is a real-time multiplier; 0 runs as fast as possible.
    """
    if config.kind != "interactive_other":
        raise ValueError("serve_session requires kind=interactive_other")
    pattern = simworld.default_wave_pattern()
    srv = socket.create_server((host, port))
    try:
        if port_holder is not None:
            port_holder.append(srv.getsockname()[1])
        if ready_event is not None:
            ready_event.set()
        for _ in range(max_sessions):
            conn, _addr = srv.accept()
            try:
                _run_session(conn, config, pattern, speed, classifier)
            finally:
                # shutdown wakes the reader thread still blocked in recv;
                # a bare close would defer the FIN until that recv returns
                try:
                    conn.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
                conn.close()
    finally:
        srv.close()


def _run_session(conn, config: ScenarioConfig, pattern, speed, classifier) -> None:
    runner = TrialRunner(config, classifier=classifier)
    mailbox = _Mailbox()
    errors: list[str] = []
    disconnected = threading.Event()
    send_lock = threading.Lock()

    def send(record: dict) -> None:
        data = (json.dumps(record, separators=(",", ":")) + "\n").encode()
        try:
            with send_lock:
                conn.sendall(data)
        except OSError:
            disconnected.set()

    def reader() -> None:
        buf = b""
        try:
            while not disconnected.is_set():
                chunk = conn.recv(4096)
                if not chunk:
                    break
                buf += chunk
                while b"\n" in buf:
                    line, buf = buf.split(b"\n", 1)
                    if not line.strip():
                        continue
                    try:
                        record = json.loads(line)
                        if record.get("type") != "action":
                            raise ValueError(f"unexpected record type {record.get('type')!r}")
                        mailbox.put(
                            _action_to_velocity(record, pattern, config.wave_speed_rad_s)
                        )
                    except (ValueError, json.JSONDecodeError) as exc:
                        send({"type": "error", "message": str(exc)})
        except OSError:
            pass
        finally:
            disconnected.set()

    send({"type": "hello", "version": PROTOCOL_VERSION, "dt_s": config.dt_s,
          "kind": config.kind, "n_joints": len(pattern)})
    thread = threading.Thread(target=reader, daemon=True)
    thread.start()

    period = config.dt_s / speed if speed > 0 else 0.0
    next_deadline = time.monotonic()
    while not runner.done():
        if disconnected.is_set():
            runner.world.set_human_command(np.zeros_like(pattern))
        else:
            command = mailbox.take()
            if command is not None:
                runner.world.set_human_command(command)
        runner.step()
        if not disconnected.is_set():
            send(_state_record(runner))
        if period > 0:
            next_deadline += period
            delay = next_deadline - time.monotonic()
            if delay > 0:
                time.sleep(delay)
    summary = runner.finalize()
    if not disconnected.is_set():
        send({"type": "summary", "status": summary.status,
              "mean_p_self": round(summary.mean_p_self_eval, 9),
              "samples": summary.samples_collected})
    disconnected.set()
