import { describe, expect, it } from "vitest";

import {
  ProtocolFormatError,
  parseAck,
  parsePoints,
  parseReport,
  parseState,
} from "../src/protocol.js";

const goodState = {
  version: "cac/1",
  phase: "awaiting_label",
  level: { n: 6, theta: 0.1, eta: 0.5 },
  counts: { points: 10, confident: 4, queried: 1 },
  pending_query: { point_id: 3, coords: [0.1, 0.2], projection_2d: [0.1, 0.2] },
};

describe("state payload", () => {
  it("round-trips a valid document", () => {
    const st = parseState(goodState);
    expect(st.phase).toBe("awaiting_label");
    expect(st.pending_query?.point_id).toBe(3);
  });

  it("accepts a null pending query", () => {
    const st = parseState({ ...goodState, phase: "computing", pending_query: null });
    expect(st.pending_query).toBeNull();
  });

  it("rejects a version mismatch", () => {
    expect(() => parseState({ ...goodState, version: "cac/2" }))
      .toThrow(ProtocolFormatError);
  });

  it("rejects unknown phases and broken levels", () => {
    expect(() => parseState({ ...goodState, phase: "thinking" })).toThrow();
    expect(() => parseState({ ...goodState, level: { n: "six" } })).toThrow();
  });
});

describe("other payloads", () => {
  it("validates point pages", () => {
    const page = parsePoints({
      version: "cac/1", page: 0, page_size: 2, total: 2,
      points: [{ id: 0, coords: [1, 2] }, { id: 1, coords: [3, 4] }],
    });
    expect(page.points).toHaveLength(2);
    expect(() => parsePoints({ version: "cac/1", page: 0, page_size: 1,
      total: 1, points: [{ coords: [1] }] })).toThrow();
  });

  it("validates acks and reports", () => {
    expect(parseAck({ accepted: false, reason: "nope" }).reason).toBe("nope");
    expect(() => parseAck({})).toThrow(ProtocolFormatError);
    const rep = parseReport({ version: "cac/1", complete: true, query_total: 2 });
    expect(rep.complete).toBe(true);
    expect(() => parseReport({ version: "cac/1", complete: "yes" })).toThrow();
  });
});
