/**
 * Node-side TCP client for the simulator's live session: connects,
 * validates the handshake, emits parsed records and sends schema-valid
 * actions. Used by the WebSocket bridge and by the integration tests.
 */

import * as net from "node:net";
import { EventEmitter } from "node:events";

import {
  ActionRecord,
  LineSplitter,
  PROTOCOL_VERSION,
  ProtocolError,
  ServerRecord,
  parseServerRecord,
  serializeAction,
} from "./protocol.js";

export interface SessionClientEvents {
  record: (record: ServerRecord) => void;
  close: () => void;
  error: (err: Error) => void;
}

export class SessionClient extends EventEmitter {
  private socket: net.Socket | null = null;
  private splitter = new LineSplitter();
  hello: ServerRecord | null = null;

  connect(host: string, port: number, timeoutMs = 10_000): Promise<void> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      this.socket = socket;
      const timer = setTimeout(() => {
        socket.destroy();
        reject(new Error(`handshake timeout after ${timeoutMs} ms`));
      }, timeoutMs);

      socket.on("data", (chunk: Buffer) => {
        for (const line of this.splitter.feed(chunk.toString("utf-8"))) {
          let record: ServerRecord;
          try {
            record = parseServerRecord(line);
          } catch (err) {
            this.emit("error", err as Error);
            continue;
          }
          if (this.hello === null) {
            if (record.type !== "hello") {
              clearTimeout(timer);
              reject(new ProtocolError(`expected hello, got ${record.type}`));
              socket.destroy();
              return;
            }
            if (record.version !== PROTOCOL_VERSION) {
              clearTimeout(timer);
              this.hello = record;
              this.emit("record", record);
              reject(
                new ProtocolError(
                  `protocol version mismatch: server v${record.version}, client v${PROTOCOL_VERSION}`,
                ),
              );
              return;
            }
            this.hello = record;
            clearTimeout(timer);
            this.emit("record", record);
            resolve();
            continue;
          }
          this.emit("record", record);
        }
      });
      socket.on("error", (err) => {
        clearTimeout(timer);
        this.emit("error", err);
        reject(err);
      });
      socket.on("close", () => {
        clearTimeout(timer);
        this.emit("close");
      });
    });
  }

  send(action: ActionRecord): void {
    if (!this.socket || this.socket.destroyed) {
      throw new Error("not connected");
    }
    this.socket.write(serializeAction(action));
  }

  close(): void {
    this.socket?.destroy();
    this.socket = null;
  }
}

/** Collect records until a predicate matches or a timeout elapses. */
export function waitForRecord(
  client: SessionClient,
  predicate: (record: ServerRecord) => boolean,
  timeoutMs: number,
): Promise<ServerRecord> {
  return new Promise((resolve, reject) => {
    const timer = setTimeout(() => {
      client.off("record", onRecord);
      reject(new Error(`no matching record within ${timeoutMs} ms`));
    }, timeoutMs);
    const onRecord = (record: ServerRecord) => {
      if (predicate(record)) {
        clearTimeout(timer);
        client.off("record", onRecord);
        resolve(record);
      }
    };
    client.on("record", onRecord);
  });
}
