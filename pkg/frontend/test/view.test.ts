import { describe, expect, it } from "vitest";

import { SessionView, Timeline } from "../src/view.js";
import type { StateRecord } from "../src/protocol.js";

function state(tick: number, pSelf: number, eV: number[] | null = [0.01, 0.02]): StateRecord {
  return {
    type: "state",
    tick,
    t: tick * 0.05,
    other_joints: [0, 0, 0, 0, 0, 0, 0],
    p_self: pSelf,
    p_cont: 0.9,
    e_v: eV,
    phase: "evaluation",
    status: "unknown",
  };
}

describe("timeline", () => {
  it("is append-only and bounded", () => {
    const tl = new Timeline(3);
    for (let i = 0; i < 5; i++) tl.push(i, i / 10);
    expect(tl.length).toBe(3);
    expect(tl.values().map((p) => p.tick)).toEqual([2, 3, 4]);
    expect(() => tl.push(4, 0.9)).toThrow(/append-only/);
    expect(() => tl.push(2, 0.9)).toThrow(/append-only/);
  });

  it("rejects non-positive capacity", () => {
    expect(() => new Timeline(0)).toThrow();
  });
});

describe("session view", () => {
  it("handshakes and tracks session parameters", () => {
    const view = new SessionView();
    view.connecting();
    expect(view.connection).toBe("connecting");
    view.apply({ type: "hello", version: 1, dt_s: 0.05, kind: "interactive_other", n_joints: 7 });
    expect(view.connection).toBe("connected");
    expect(view.dtS).toBe(0.05);
    expect(view.nJoints).toBe(7);
  });

  it("flags a protocol version mismatch explicitly", () => {
    const view = new SessionView();
    view.apply({ type: "hello", version: 2, dt_s: 0.05, kind: "interactive_other", n_joints: 7 });
    expect(view.connection).toBe("version-mismatch");
    expect(view.lastError).toMatch(/v2/);
  });

  it("appends every state record to both timelines", () => {
    const view = new SessionView({ timelineCapacity: 10 });
    view.apply(state(0, 0.1));
    view.apply(state(1, 0.5, [0.3, 0.4]));
    view.apply(state(2, 0.9, null));
    expect(view.pSelf.length).toBe(3);
    expect(view.pSelf.values().map((p) => p.value)).toEqual([0.1, 0.5, 0.9]);
    const ev = view.eVNorm.values().map((p) => p.value);
    expect(ev[1]).toBeCloseTo(0.5, 9);
    expect(Number.isNaN(ev[2])).toBe(true); // no visual sample that tick
    expect(view.latestState?.tick).toBe(2);
  });

  it("clamps displayed p_self into [0, 1]", () => {
    const view = new SessionView();
    view.apply(state(0, 1.2));
    view.apply(state(1, -0.1));
    const values = view.pSelf.values().map((p) => p.value);
    expect(values).toEqual([1, 0]);
  });

  it("records errors without dropping the session", () => {
    const view = new SessionView();
    view.apply({ type: "hello", version: 1, dt_s: 0.05, kind: "interactive_other", n_joints: 7 });
    view.apply({ type: "error", message: "unknown action mode 'jump'" });
    expect(view.connection).toBe("connected");
    expect(view.lastError).toMatch(/jump/);
  });

  it("finishes on summary and survives later disconnects", () => {
    const view = new SessionView();
    view.apply({ type: "hello", version: 1, dt_s: 0.05, kind: "interactive_other", n_joints: 7 });
    view.apply({ type: "summary", status: "other", mean_p_self: 0.02, samples: 80 });
    expect(view.connection).toBe("finished");
    expect(view.finalStatus).toBe("other");
    view.disconnected();
    expect(view.connection).toBe("finished");
  });

  it("reports a disconnect as a visible state", () => {
    const view = new SessionView();
    view.apply({ type: "hello", version: 1, dt_s: 0.05, kind: "interactive_other", n_joints: 7 });
    view.disconnected();
    expect(view.connection).toBe("disconnected");
  });
});
