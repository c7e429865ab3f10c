"use strict";
(() => {
  // src/protocol.ts
  var PROTOCOL_VERSION = 1;
  var ProtocolError = class extends Error {
  };
  var SERVER_TYPES = /* @__PURE__ */ new Set(["hello", "state", "error", "summary"]);
  function parseServerRecord(line) {
    let raw;
    try {
      raw = JSON.parse(line);
    } catch {
      throw new ProtocolError(`not JSON: ${line.slice(0, 80)}`);
    }
    if (typeof raw !== "object" || raw === null) {
      throw new ProtocolError("record is not an object");
    }
    const record = raw;
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
    return record;
  }
  function serializeAction(action) {
    if (action.mode === "velocity") {
      if (!Array.isArray(action.velocity)) {
        throw new ProtocolError("velocity mode requires a velocity array");
      }
      return JSON.stringify({ type: "action", mode: "velocity", velocity: action.velocity }) + "\n";
    }
    return JSON.stringify({ type: "action", mode: action.mode }) + "\n";
  }

  // src/view.ts
  var Timeline = class {
    capacity;
    points = [];
    constructor(capacity) {
      if (capacity <= 0) throw new Error("timeline capacity must be positive");
      this.capacity = capacity;
    }
    push(tick, value) {
      const last = this.points[this.points.length - 1];
      if (last !== void 0 && tick <= last.tick) {
        throw new Error(`timeline is append-only: tick ${tick} after ${last.tick}`);
      }
      this.points.push({ tick, value });
      if (this.points.length > this.capacity) {
        this.points.splice(0, this.points.length - this.capacity);
      }
    }
    values() {
      return this.points;
    }
    get length() {
      return this.points.length;
    }
  };
  var SessionView = class {
    connection = "disconnected";
    inputMode = "buttons";
    dtS = null;
    nJoints = null;
    latestState = null;
    finalStatus = null;
    lastError = null;
    pSelf;
    eVNorm;
    constructor(options = {}) {
      const capacity = options.timelineCapacity ?? 600;
      this.pSelf = new Timeline(capacity);
      this.eVNorm = new Timeline(capacity);
    }
    connecting() {
      this.connection = "connecting";
    }
    disconnected() {
      if (this.connection !== "finished") this.connection = "disconnected";
    }
    /** Apply one server record; returns the record type applied. */
    apply(record) {
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
          const p = Math.min(Math.max(record.p_self, 0), 1);
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
  };

  // src/panel.ts
  var view = new SessionView({ timelineCapacity: 600 });
  var queue = [];
  var socket = null;
  function byId(id) {
    const el = document.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el;
  }
  function send(action) {
    if (socket && socket.readyState === WebSocket.OPEN) {
      socket.send(serializeAction(action).trimEnd());
    }
  }
  function connect() {
    view.connecting();
    socket = new WebSocket(`ws://${location.host}/session`);
    socket.onmessage = (event) => {
      try {
        queue.push(parseServerRecord(String(event.data)));
      } catch {
      }
    };
    socket.onclose = () => view.disconnected();
    socket.onerror = () => view.disconnected();
  }
  function drawTimeline(canvas, points, color, yMax, threshold) {
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.strokeStyle = "#ddd";
    ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
    for (const th of threshold ?? []) {
      ctx.strokeStyle = "#e8c0c0";
      ctx.beginPath();
      const y = height - th / yMax * height;
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
      const x = (p.tick - t0) / span * width;
      const y = height - Math.min(p.value, yMax) / yMax * height;
      if (started) ctx.lineTo(x, y);
      else ctx.moveTo(x, y);
      started = true;
    }
    ctx.stroke();
  }
  function render() {
    for (const record of queue.splice(0)) view.apply(record);
    const banner = byId("banner");
    banner.textContent = view.connection === "version-mismatch" ? `protocol version mismatch: ${view.lastError ?? ""}` : view.connection === "disconnected" ? "disconnected \u2014 agent frozen" : view.connection === "finished" ? `session finished: ${view.finalStatus ?? "?"}` : view.connection;
    banner.className = `banner ${view.connection}`;
    byId("reconnect").hidden = view.connection === "connected";
    const s = view.latestState;
    byId("readout").textContent = s ? `t=${s.t.toFixed(2)}s  phase=${s.phase}  status=${s.status}  p_self=${s.p_self.toFixed(3)}  p_cont=${s.p_cont.toFixed(2)}` : "waiting for state\u2026";
    drawTimeline(byId("pself"), view.pSelf.values(), "#2b6cb0", 1, [0.2, 0.8]);
    drawTimeline(byId("ev"), view.eVNorm.values(), "#b03a2b", 0.3);
    requestAnimationFrame(render);
  }
  function main() {
    byId("wave-left").onclick = () => send({ type: "action", mode: "wave_left" });
    byId("wave-right").onclick = () => send({ type: "action", mode: "wave_right" });
    byId("stop").onclick = () => send({ type: "action", mode: "stop" });
    byId("reconnect").onclick = () => connect();
    const pad = byId("pad");
    let dragging = false;
    const dragSend = (event) => {
      if (!dragging || view.nJoints === null) return;
      const rect = pad.getBoundingClientRect();
      const x = (event.clientX - rect.left) / rect.width;
      const gain = (x - 0.5) * 1;
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
})();
