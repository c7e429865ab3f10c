import { describe, expect, it } from "vitest";

import {
  LineSplitter,
  ProtocolError,
  parseServerRecord,
  serializeAction,
} from "../src/protocol.js";

describe("server record parsing", () => {
  it("parses each record type", () => {
    const hello = parseServerRecord(
      '{"type":"hello","version":1,"dt_s":0.05,"kind":"interactive_other","n_joints":7}',
    );
    expect(hello.type).toBe("hello");
    const state = parseServerRecord(
      '{"type":"state","tick":3,"t":0.15,"other_joints":[0,0,0,0,0,0,0],' +
        '"p_self":0.4,"p_cont":0.9,"e_v":null,"phase":"evaluation","status":"unknown"}',
    );
    expect(state.type).toBe("state");
    if (state.type === "state") {
      expect(state.tick).toBe(3);
      expect(state.e_v).toBeNull();
    }
    expect(parseServerRecord('{"type":"error","message":"x"}').type).toBe("error");
    expect(
      parseServerRecord('{"type":"summary","status":"other","mean_p_self":0.01,"samples":60}')
        .type,
    ).toBe("summary");
  });

  it("rejects malformed input", () => {
    expect(() => parseServerRecord("not json")).toThrow(ProtocolError);
    expect(() => parseServerRecord('"just a string"')).toThrow(ProtocolError);
    expect(() => parseServerRecord('{"type":"telemetry"}')).toThrow(ProtocolError);
    expect(() => parseServerRecord('{"type":"hello"}')).toThrow(ProtocolError);
    expect(() => parseServerRecord('{"type":"state","tick":"three"}')).toThrow(ProtocolError);
  });
});

describe("action serialization", () => {
  it("emits schema-valid one-line records", () => {
    expect(serializeAction({ type: "action", mode: "wave_left" })).toBe(
      '{"type":"action","mode":"wave_left"}\n',
    );
    const line = serializeAction({
      type: "action",
      mode: "velocity",
      velocity: [0.1, 0, 0, 0, 0, 0, 0],
    });
    const parsed = JSON.parse(line);
    expect(parsed.velocity).toHaveLength(7);
    expect(line.endsWith("\n")).toBe(true);
    expect(line.slice(0, -1).includes("\n")).toBe(false);
  });

  it("requires a velocity array in velocity mode", () => {
    expect(() => serializeAction({ type: "action", mode: "velocity" })).toThrow(ProtocolError);
  });
});

describe("line splitter", () => {
  it("reassembles lines across arbitrary chunk boundaries", () => {
    const splitter = new LineSplitter();
    expect(splitter.feed('{"a"')).toEqual([]);
    expect(splitter.feed(':1}\n{"b":2}\n{"c"')).toEqual(['{"a":1}', '{"b":2}']);
    expect(splitter.feed(":3}\n")).toEqual(['{"c":3}']);
  });

  it("drops blank lines", () => {
    const splitter = new LineSplitter();
    expect(splitter.feed("\n  \n{\"x\":1}\n")).toEqual(['{"x":1}']);
  });
});
