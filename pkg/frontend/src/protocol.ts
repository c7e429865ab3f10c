/**
 * Session wire protocol: newline-delimited JSON records over a byte
 * stream. Mirrors the simulator's session schema exactly; nothing here
 * recomputes any experiment quantity.
 */

export const PROTOCOL_VERSION = 1;

export interface HelloRecord {
  type: "hello";
  version: number;
  dt_s: number;
  kind: string;
  n_joints: number;
}

export interface StateRecord {
  type: "state";
  tick: number;
  t: number;
  other_joints: number[];
  p_self: number;
  p_cont: number;
  e_v: number[] | null;
  phase: string;
  status: string;
}

export interface ErrorRecord {
  type: "error";
  message: string;
}

export interface SummaryRecord {
  type: "summary";
  status: string;
  mean_p_self: number;
  samples: number;
}

export type ServerRecord = HelloRecord | StateRecord | ErrorRecord | SummaryRecord;

export type ActionMode = "wave_left" | "wave_right" | "stop" | "velocity";

export interface ActionRecord {
  type: "action";
  mode: ActionMode;
  velocity?: number[];
}

export class ProtocolError extends Error {}

const SERVER_TYPES = new Set(["hello", "state", "error", "summary"]);

/** Parse one server line; throws ProtocolError on malformed input. */
export function parseServerRecord(line: string): ServerRecord {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    throw new ProtocolError(`not JSON: ${line.slice(0, 80)}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new ProtocolError("record is not an object");
  }
  const record = raw as Record<string, unknown>;
  if (typeof record.type !== "string" || !SERVER_TYPES.has(record.type)) {
    throw new ProtocolError(`unknown record type ${String(record.type)}`);
  }
  if (record.type === "hello" && typeof record.version !== "number") {
    throw new ProtocolError("hello record missing version");
  }
  if (record.type === "state") {
    for (const field of ["tick", "t", "p_self", "p_cont"]) {
      if (typeof record[field] !== "number") {
        throw new ProtocolError(`state record missing numeric ${field}`);
      }
    }
  }
  return record as unknown as ServerRecord;
}

/** Serialize a client action to one wire line (including the newline). */
export function serializeAction(action: ActionRecord): string {
  if (action.mode === "velocity") {
    if (!Array.isArray(action.velocity)) {
      throw new ProtocolError("velocity mode requires a velocity array");
    }
    return (
      JSON.stringify({ type: "action", mode: "velocity", velocity: action.velocity }) + "\n"
    );
  }
  return JSON.stringify({ type: "action", mode: action.mode }) + "\n";
}

/**
 * Incremental NDJSON splitter: feed arbitrary byte chunks, get complete
 * lines out. Carries partial lines across chunks.
 */
export class LineSplitter {
  private buffer = "";

  feed(chunk: string): string[] {
    this.buffer += chunk;
    const lines = this.buffer.split("\n");
    this.buffer = lines.pop() ?? "";
    return lines.filter((l) => l.trim().length > 0);
  }
}
