/**
 * Local bridge so the browser panel can reach the simulator's TCP
 * session: serves the static panel files over HTTP and proxies one
 * WebSocket per panel connection to the TCP NDJSON session, byte-for-byte
 * in both directions (the bridge adds no protocol of its own).
 */

import * as fs from "node:fs";
import * as http from "node:http";
import * as net from "node:net";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { WebSocketServer, WebSocket } from "ws";

const MIME: Record<string, string> = {
  ".html": "text/html; charset=utf-8",
  ".js": "text/javascript; charset=utf-8",
  ".css": "text/css; charset=utf-8",
};

export interface BridgeOptions {
  httpPort: number;
  sessionHost: string;
  sessionPort: number;
  publicDir?: string;
}

export function startBridge(options: BridgeOptions): http.Server {
  const publicDir =
    options.publicDir ??
    path.join(path.dirname(fileURLToPath(import.meta.url)), "..", "public");

  const server = http.createServer((req, res) => {
    const urlPath = req.url === "/" ? "/index.html" : req.url ?? "/index.html";
    const file = path.join(publicDir, path.normalize(urlPath).replace(/^(\.\.[/\\])+/, ""));
    if (!file.startsWith(publicDir) || !fs.existsSync(file)) {
      res.writeHead(404);
      res.end("not found");
      return;
    }
    res.writeHead(200, { "Content-Type": MIME[path.extname(file)] ?? "application/octet-stream" });
    fs.createReadStream(file).pipe(res);
  });

  const wss = new WebSocketServer({ server, path: "/session" });
  wss.on("connection", (ws: WebSocket) => {
    const tcp = net.createConnection({
      host: options.sessionHost,
      port: options.sessionPort,
    });
    let pending = "";
    tcp.on("data", (chunk: Buffer) => {
      // forward complete lines; the panel parses NDJSON itself
      pending += chunk.toString("utf-8");
      const lines = pending.split("\n");
      pending = lines.pop() ?? "";
      for (const line of lines) {
        if (line.trim().length > 0 && ws.readyState === WebSocket.OPEN) ws.send(line);
      }
    });
    tcp.on("close", () => ws.close());
    tcp.on("error", () => ws.close());
    ws.on("message", (data) => {
      tcp.write(data.toString() + "\n");
    });
    ws.on("close", () => tcp.destroy());
  });

  server.listen(options.httpPort);
  return server;
}

// CLI entry: node dist/bridge.js [httpPort] [sessionHost] [sessionPort]
if (process.argv[1] && fileURLToPath(import.meta.url) === path.resolve(process.argv[1])) {
  const [httpPort = "8080", sessionHost = "127.0.0.1", sessionPort = "7777"] =
    process.argv.slice(2);
  startBridge({
    httpPort: Number(httpPort),
    sessionHost,
    sessionPort: Number(sessionPort),
  });
  console.log(
    `panel on http://127.0.0.1:${httpPort} -> session ${sessionHost}:${sessionPort}`,
  );
}
