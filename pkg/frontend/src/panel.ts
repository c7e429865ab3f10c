/**
 * Browser control panel: connect to the bridge WebSocket, render the
 * p_self and |e_v| timelines plus session status, and send wave/stop or
 * continuous drag commands. One rendering loop; incoming records are
 * queued and drained per animation frame.
 */

import { parseServerRecord, serializeAction, ActionRecord, ServerRecord } from "./protocol.js";
import { SessionView } from "./view.js";

const view = new SessionView({ timelineCapacity: 600 });
const queue: ServerRecord[] = [];
let socket: WebSocket | null = null;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function send(action: ActionRecord): void {
  if (socket && socket.readyState === WebSocket.OPEN) {
    // serializeAction appends the newline used on the TCP side; the
    // bridge re-frames, so trim it for the WebSocket message
    socket.send(serializeAction(action).trimEnd());
  }
}

function connect(): void {
  view.connecting();
  socket = new WebSocket(`ws://${location.host}/session`);
  socket.onmessage = (event) => {
    try {
      queue.push(parseServerRecord(String(event.data)));
    } catch {
      // malformed line: ignore; the server also reports protocol errors
    }
  };
  socket.onclose = () => view.disconnected();
  socket.onerror = () => view.disconnected();
}

function drawTimeline(
  canvas: HTMLCanvasElement,
  points: readonly { tick: number; value: number }[],
  color: string,
  yMax: number,
  threshold?: number[],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#ddd";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  for (const th of threshold ?? []) {
    ctx.strokeStyle = "#e8c0c0";
    ctx.beginPath();
    const y = height - (th / yMax) * height;
    ctx.moveTo(0, y);
    ctx.lineTo(width, y);
    ctx.stroke();
  }
  if (points.length < 2) return;
  const t0 = points[0].tick;
  const t1 = points[points.length - 1].tick;
  const span = Math.max(t1 - t0, 1);
  ctx.strokeStyle = color;
  ctx.beginPath();
  let started = false;
  for (const p of points) {
    if (Number.isNaN(p.value)) {
      started = false;
      continue;
    }
    const x = ((p.tick - t0) / span) * width;
    const y = height - (Math.min(p.value, yMax) / yMax) * height;
    if (started) ctx.lineTo(x, y);
    else ctx.moveTo(x, y);
    started = true;
  }
  ctx.stroke();
}

function render(): void {
  for (const record of queue.splice(0)) view.apply(record);

  const banner = byId<HTMLDivElement>("banner");
  banner.textContent =
    view.connection === "version-mismatch"
      ? `protocol version mismatch: ${view.lastError ?? ""}`
      : view.connection === "disconnected"
        ? "disconnected — agent frozen"
        : view.connection === "finished"
          ? `session finished: ${view.finalStatus ?? "?"}`
          : view.connection;
  banner.className = `banner ${view.connection}`;
  byId<HTMLButtonElement>("reconnect").hidden = view.connection === "connected";

  const s = view.latestState;
  byId<HTMLSpanElement>("readout").textContent = s
    ? `t=${s.t.toFixed(2)}s  phase=${s.phase}  status=${s.status}  ` +
      `p_self=${s.p_self.toFixed(3)}  p_cont=${s.p_cont.toFixed(2)}`
    : "waiting for state…";

  drawTimeline(byId("pself"), view.pSelf.values(), "#2b6cb0", 1.0, [0.2, 0.8]);
  drawTimeline(byId("ev"), view.eVNorm.values(), "#b03a2b", 0.3);
  requestAnimationFrame(render);
}

function main(): void {
  byId<HTMLButtonElement>("wave-left").onclick = () => send({ type: "action", mode: "wave_left" });
  byId<HTMLButtonElement>("wave-right").onclick = () => send({ type: "action", mode: "wave_right" });
  byId<HTMLButtonElement>("stop").onclick = () => send({ type: "action", mode: "stop" });
  byId<HTMLButtonElement>("reconnect").onclick = () => connect();

  // continuous mode: horizontal drag over the pad maps to a scaled
  // left/right waving velocity, newest command wins per tick server-side
  const pad = byId<HTMLDivElement>("pad");
  let dragging = false;
  const dragSend = (event: PointerEvent) => {
    if (!dragging || view.nJoints === null) return;
    const rect = pad.getBoundingClientRect();
    const x = (event.clientX - rect.left) / rect.width; // 0..1
    const gain = (x - 0.5) * 1.0; // rad/s along the waving pattern
    const velocity = new Array(view.nJoints).fill(0);
    velocity[0] = gain;
    velocity[2] = gain * 0.5;
    send({ type: "action", mode: "velocity", velocity });
  };
  pad.onpointerdown = (e) => {
    dragging = true;
    pad.setPointerCapture(e.pointerId);
    dragSend(e);
  };
  pad.onpointermove = dragSend;
  pad.onpointerup = () => {
    dragging = false;
    send({ type: "action", mode: "stop" });
  };

  connect();
  requestAnimationFrame(render);
}

main();
