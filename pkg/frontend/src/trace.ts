/**
 * Minimal reader for the simulator's trace CSV (documented external
 * schema: comma-separated, header row, 9-significant-digit floats,
 * empty cell = absent). Extracts the commanded joint velocities used to
 * replay a recorded run as a deception attempt.
 */

export interface TraceRow {
  tick: number;
  t: number;
  phase: string;
  aCmd: number[];
}

const N_JOINTS = 7;

export function parseTraceCsv(text: string): TraceRow[] {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0) throw new Error("empty trace file");
  const header = lines[0].split(",");
  const col = (name: string) => {
    const i = header.indexOf(name);
    if (i < 0) throw new Error(`trace missing column ${name}`);
    return i;
  };
  const iTick = col("tick");
  const iT = col("t");
  const iPhase = col("phase");
  const iA = Array.from({ length: N_JOINTS }, (_, j) => col(`a_cmd${j + 1}`));
  return lines.slice(1).map((line) => {
    const cells = line.split(",");
    return {
      tick: Number(cells[iTick]),
      t: Number(cells[iT]),
      phase: cells[iPhase],
      aCmd: iA.map((i) => Number(cells[i])),
    };
  });
}

/**
 * Velocity command for a lagged replay of a recorded trace: the command
 * the recorded robot issued `lagTicks` ago, zero before the recording
 * starts or after it ends.
 */
export function laggedCommand(rows: TraceRow[], tick: number, lagTicks: number): number[] {
  const index = tick - lagTicks;
  if (index < 0 || index >= rows.length) {
    return new Array(N_JOINTS).fill(0);
  }
  return rows[index].aCmd;
}
