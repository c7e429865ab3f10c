/**
 * Pure view-state for the control panel: connection state, the latest
 * server record, bounded append-only timelines of p_self and |e_v|, and
 * the current input mode. Every displayed number originates from a
 * server record; no recognition logic runs client-side.
 */

import type { ServerRecord, StateRecord } from "./protocol.js";
import { PROTOCOL_VERSION } from "./protocol.js";

export type ConnectionState =
  | "disconnected"
  | "connecting"
  | "connected"
  | "version-mismatch"
  | "finished";

export type InputMode = "buttons" | "continuous";

export interface TimelinePoint {
  tick: number;
  value: number;
}

/** Append-only ring of the last `capacity` points. */
export class Timeline {
  readonly capacity: number;
  private points: TimelinePoint[] = [];

  constructor(capacity: number) {
    if (capacity <= 0) throw new Error("timeline capacity must be positive");
    this.capacity = capacity;
  }

  push(tick: number, value: number): void {
    const last = this.points[this.points.length - 1];
    if (last !== undefined && tick <= last.tick) {
      throw new Error(`timeline is append-only: tick ${tick} after ${last.tick}`);
    }
    this.points.push({ tick, value });
    if (this.points.length > this.capacity) {
      this.points.splice(0, this.points.length - this.capacity);
    }
  }

  values(): readonly TimelinePoint[] {
    return this.points;
  }

  get length(): number {
    return this.points.length;
  }
}

export interface SessionViewOptions {
  timelineCapacity?: number;
}

export class SessionView {
  connection: ConnectionState = "disconnected";
  inputMode: InputMode = "buttons";
  dtS: number | null = null;
  nJoints: number | null = null;
  latestState: StateRecord | null = null;
  finalStatus: string | null = null;
  lastError: string | null = null;
  readonly pSelf: Timeline;
  readonly eVNorm: Timeline;

  constructor(options: SessionViewOptions = {}) {
    const capacity = options.timelineCapacity ?? 600;
    this.pSelf = new Timeline(capacity);
    this.eVNorm = new Timeline(capacity);
  }

  connecting(): void {
    this.connection = "connecting";
  }

  disconnected(): void {
    // server contract: on disconnect the foreign agent freezes; the view
    // keeps its last data so the operator sees where things stopped
    if (this.connection !== "finished") this.connection = "disconnected";
  }

  /** Apply one server record; returns the record type applied. */
  apply(record: ServerRecord): string {
    switch (record.type) {
      case "hello":
        if (record.version !== PROTOCOL_VERSION) {
          this.connection = "version-mismatch";
          this.lastError = `server protocol v${record.version}, client v${PROTOCOL_VERSION}`;
        } else {
          this.connection = "connected";
          this.dtS = record.dt_s;
          this.nJoints = record.n_joints;
        }
        break;
      case "state": {
        this.latestState = record;
        const p = Math.min(Math.max(record.p_self, 0), 1); // displayed p in [0,1]
        this.pSelf.push(record.tick, p);
        const ev = record.e_v;
        this.eVNorm.push(record.tick, ev ? Math.hypot(...ev) : NaN);
        break;
      }
      case "error":
        this.lastError = record.message;
        break;
      case "summary":
        this.finalStatus = record.status;
        this.connection = "finished";
        break;
    }
    return record.type;
  }
}
