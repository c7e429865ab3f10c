"""Trace CSV serialization (fixed column order, 9 significant digits,
empty cell = absent value) and optional line-chart emission."""

from __future__ import annotations

import os

import numpy as np

from .trial import TraceRecord

N_JOINTS = 7

COLUMNS = (
    ["tick", "t", "phase", "status"]
    + [f"mu{i + 1}" for i in range(N_JOINTS)]
    + [f"s_p{i + 1}" for i in range(N_JOINTS)]
    + [f"a_cmd{i + 1}" for i in range(N_JOINTS)]
    + ["s_v_u", "s_v_v", "g_u", "g_v", "sigma_star", "e_p_norm", "e_v_u", "e_v_v",
       "blob_speed", "p_cont", "L_i", "L", "p_norm", "p_self"]
)


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.9g}"


def _pair(v: np.ndarray | None) -> list[str]:
    if v is None:
        return ["", ""]
    return [_fmt(v[0]), _fmt(v[1])]


def write_trace(trace: list[TraceRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(COLUMNS) + "\n")
        for r in trace:
            row = [str(r.tick), _fmt(r.t), r.phase, r.status]
            row += [_fmt(v) for v in r.mu]
            row += [_fmt(v) for v in r.s_p]
            row += [_fmt(v) for v in r.a_cmd]
            row += _pair(r.s_v)
            row += _pair(r.g)
            row += [_fmt(r.sigma_star), _fmt(r.e_p_norm)]
            row += _pair(r.e_v)
            row += [_fmt(r.blob_speed), _fmt(r.p_cont), _fmt(r.L_i), _fmt(r.L),
                    _fmt(r.p_norm), _fmt(r.p_self)]
            f.write(",".join(row) + "\n")


def read_trace(path) -> list[TraceRecord]:
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split(",")
        if header != COLUMNS:
            raise ValueError(f"{path}: unexpected trace schema")
        records = []
        for line in f:
            cells = line.rstrip("\n").split(",")
            if len(cells) != len(COLUMNS):
                raise ValueError(f"{path}: row has {len(cells)} cells, expected {len(COLUMNS)}")
            c = dict(zip(COLUMNS, cells))

            def vec(prefix):
                return np.array([float(c[f"{prefix}{i + 1}"]) for i in range(N_JOINTS)])

            def pair(pu, pv):
                if c[pu] == "":
                    return None
                return np.array([float(c[pu]), float(c[pv])])

            records.append(
                TraceRecord(
                    tick=int(c["tick"]),
                    t=float(c["t"]),
                    phase=c["phase"],
                    status=c["status"],
                    mu=vec("mu"),
                    s_p=vec("s_p"),
                    a_cmd=vec("a_cmd"),
                    s_v=pair("s_v_u", "s_v_v"),
                    g=pair("g_u", "g_v"),
                    sigma_star=float(c["sigma_star"]),
                    e_p_norm=float(c["e_p_norm"]),
                    e_v=pair("e_v_u", "e_v_v"),
                    blob_speed=float(c["blob_speed"]),
                    p_cont=float(c["p_cont"]),
                    L_i=None if c["L_i"] == "" else float(c["L_i"]),
                    L=float(c["L"]),
                    p_norm=float(c["p_norm"]),
                    p_self=float(c["p_self"]),
                )
            )
    return records


def emit_plots(trace: list[TraceRecord], out_dir) -> list[str]:
    """Line charts of e_p, |e_v| and p_self against time."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    t = [r.t for r in trace]
    written = []

    fig, axes = plt.subplots(3, 1, figsize=(8, 8), sharex=True)
    axes[0].plot(t, [r.e_p_norm for r in trace], lw=0.8)
    axes[0].set_ylabel("|e_p| (rad)")
    ev = [np.linalg.norm(r.e_v) if r.e_v is not None else np.nan for r in trace]
    axes[1].plot(t, ev, lw=0.8)
    axes[1].set_ylabel("|e_v| (norm. units)")
    axes[2].plot(t, [r.p_self for r in trace], lw=0.8)
    axes[2].set_ylabel("p(self)")
    axes[2].set_xlabel("t (s)")
    axes[2].set_ylim(-0.05, 1.05)
    for ax in axes:
        ax.grid(alpha=0.3)
    path = os.path.join(out_dir, "trial_dynamics.png")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
