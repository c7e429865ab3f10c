/**
 * Live integration against the real simulator: spawns `selfdist serve`
 * and talks to it over the TCP session protocol, exactly as the bridge
 * does. Requires the Python package to be installed (pip install -e .).
 */

import { ChildProcess, spawn } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { afterEach, describe, expect, it } from "vitest";

import { SessionClient, waitForRecord } from "../src/client.js";
import type { StateRecord, SummaryRecord } from "../src/protocol.js";
import { laggedCommand, parseTraceCsv } from "../src/trace.js";
import { SessionView } from "../src/view.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const REPO_ROOT = path.resolve(HERE, "..", "..");
const FIXTURE = path.join(HERE, "fixtures", "mirror_trace.csv");

// the classifier is trained when a session starts, so the first handshake
// can take tens of seconds
const HANDSHAKE_MS = 120_000;

let server: ChildProcess | null = null;

function startServer(port: number, speed: number, seed: number): ChildProcess {
  const proc = spawn(
    "python3",
    [
      "-m",
      "selfdist.cli",
      "serve",
      "--port",
      String(port),
      "--speed",
      String(speed),
      "--seed",
      String(seed),
    ],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  server = proc;
  return proc;
}

async function connectWithRetry(port: number): Promise<SessionClient> {
  const deadline = Date.now() + HANDSHAKE_MS;
  let lastErr: unknown = null;
  while (Date.now() < deadline) {
    const client = new SessionClient();
    client.on("error", () => {});
    try {
      await client.connect("127.0.0.1", port, HANDSHAKE_MS);
      return client;
    } catch (err) {
      lastErr = err;
      client.close();
      await new Promise((r) => setTimeout(r, 250));
    }
  }
  throw lastErr;
}

afterEach(() => {
  server?.kill("SIGKILL");
  server = null;
});

describe("connection failures", () => {
  it("reports an unreachable server instead of degrading silently", async () => {
    const client = new SessionClient();
    client.on("error", () => {});
    await expect(client.connect("127.0.0.1", 1, 2_000)).rejects.toThrow();
    const view = new SessionView();
    view.disconnected();
    expect(view.connection).toBe("disconnected");
  });
});

describe("driving the live session", () => {
  it(
    "streams one state per tick and acknowledges actions within two ticks",
    async () => {
      const port = 7851;
      startServer(port, 8, 11);
      const client = await connectWithRetry(port);
      const view = new SessionView({ timelineCapacity: 5000 });
      const states: StateRecord[] = [];
      const actionTicks: number[] = [];
      client.on("record", (record) => {
        view.apply(record);
        if (record.type === "state") states.push(record);
      });

      const dt = (client.hello as { dt_s: number }).dt_s;
      expect(dt).toBeCloseTo(0.05, 9);

      // drive the agent for 30 simulated seconds, alternating strokes
      const first = (await waitForRecord(client, (r) => r.type === "state", 30_000)) as StateRecord;
      const t0 = first.t;
      let mode: "wave_left" | "wave_right" = "wave_left";
      let nextSwitch = t0;
      let last: StateRecord = first;
      while (last.t - t0 < 30.0) {
        last = (await waitForRecord(client, (r) => r.type === "state", 30_000)) as StateRecord;
        if (last.t >= nextSwitch) {
          client.send({ type: "action", mode });
          actionTicks.push(last.tick);
          mode = mode === "wave_left" ? "wave_right" : "wave_left";
          nextSwitch += 2.0;
        }
      }
      // a few more frames so the last action's acknowledgment is captured
      for (let i = 0; i < 3; i++) {
        await waitForRecord(client, (r) => r.type === "state", 30_000);
      }
      client.close();

      // >= 1 state frame per tick period: no tick was skipped
      expect(states.length).toBeGreaterThanOrEqual(Math.floor(30.0 / dt));
      for (let i = 1; i < states.length; i++) {
        expect(states[i].tick).toBe(states[i - 1].tick + 1);
      }

      // every action is acknowledged in the next frames: the agent's
      // joints move within two tick periods of the command
      const byTick = new Map(states.map((s) => [s.tick, s]));
      for (const tick of actionTicks) {
        const before = byTick.get(tick);
        const after = byTick.get(tick + 1) ?? byTick.get(tick + 2);
        expect(before && after).toBeTruthy();
        const moved = after!.other_joints.some(
          (v, j) => Math.abs(v - before!.other_joints[j]) > 1e-9,
        );
        expect(moved).toBe(true);
      }

      // the p_self timeline followed along: one appended point per state
      expect(view.pSelf.length + view.pSelf.capacity).toBeGreaterThanOrEqual(states.length);
      const lastPoints = view.pSelf.values();
      expect(lastPoints[lastPoints.length - 1].tick).toBe(states[states.length - 1].tick);
    },
    { timeout: 300_000 },
  );
});

describe("replayed-trace deception", () => {
  it(
    "a 0.5 s lagged replay of the robot's own recording is judged other",
    async () => {
      const rows = parseTraceCsv(fs.readFileSync(FIXTURE, "utf-8"));
      const port = 7852;
      // same master seed as the recording: the replayed motion mimics the
      // robot's own waving rhythm, only shifted by the lag
      startServer(port, 0, 5);
      const client = await connectWithRetry(port);
      const dt = (client.hello as { dt_s: number }).dt_s;
      const lagTicks = Math.round(0.5 / dt);

      let maxEvalP = 0;
      client.on("record", (record) => {
        if (record.type !== "state") return;
        if (record.phase === "evaluation") maxEvalP = Math.max(maxEvalP, record.p_self);
        client.send({
          type: "action",
          mode: "velocity",
          velocity: laggedCommand(rows, record.tick, lagTicks),
        });
      });

      const summary = (await waitForRecord(
        client,
        (r) => r.type === "summary",
        280_000,
      )) as SummaryRecord;
      client.close();

      expect(summary.status).toBe("other");
      expect(maxEvalP).toBeLessThan(0.8);
    },
    { timeout: 300_000 },
  );
});
