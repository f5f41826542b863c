import { afterEach, describe, expect, it, vi } from "vitest";

import { ConsoleClient, ServerDown } from "../src/client.js";

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

const STATE = {
  version: "cac/1",
  phase: "computing",
  level: { n: 6, theta: 0.5, eta: 0.1 },
  counts: { points: 4, confident: 0, queried: 0 },
  pending_query: null,
};

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ConsoleClient", () => {
  it("shares one in-flight request per endpoint", async () => {
    const fetchMock = vi.fn(async () => jsonResponse(STATE));
    vi.stubGlobal("fetch", fetchMock);
    const client = new ConsoleClient("http://host:1/");
    const [a, b] = await Promise.all([client.getState(), client.getState()]);
    expect(fetchMock).toHaveBeenCalledTimes(1);
    expect(a.phase).toBe("computing");
    expect(b).toEqual(a);
    // once settled, the next poll issues a fresh request
    await client.getState();
    expect(fetchMock).toHaveBeenCalledTimes(2);
  });

  it("normalizes the base URL", async () => {
    const fetchMock = vi.fn(async () => jsonResponse(STATE));
    vi.stubGlobal("fetch", fetchMock);
    await new ConsoleClient("http://host:1///").getState();
    expect(fetchMock).toHaveBeenCalledWith("http://host:1/api/state");
  });

  it("wraps connection failures in ServerDown", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => {
        throw new TypeError("ECONNREFUSED");
      }),
    );
    await expect(new ConsoleClient("http://host:1").getState()).rejects.toBeInstanceOf(
      ServerDown,
    );
  });

  it("walks every page when collecting points", async () => {
    const pages = [
      { version: "cac/1", page: 0, page_size: 2, total: 3, points: [{ id: 0 }, { id: 1 }] },
      { version: "cac/1", page: 1, page_size: 2, total: 3, points: [{ id: 2 }] },
    ];
    const fetchMock = vi.fn(async (url: string) => {
      const page = Number(new URL(url).searchParams.get("page"));
      return jsonResponse(pages[page]);
    });
    vi.stubGlobal("fetch", fetchMock);
    const pts = await new ConsoleClient("http://host:1").getAllPoints(["pred"], 2);
    expect(pts.map((p) => p.id)).toEqual([0, 1, 2]);
    expect(String(fetchMock.mock.calls[0])).toContain("fields=pred");
  });

  it("retries a lost label submission once; the duplicate ack is success", async () => {
    let calls = 0;
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => {
        calls += 1;
        if (calls === 1) throw new TypeError("socket hang up");
        return jsonResponse({ version: "cac/1", accepted: true, reason: "duplicate" });
      }),
    );
    const ack = await new ConsoleClient("http://host:1").submitLabel(12, 2);
    expect(calls).toBe(2);
    expect(ack.accepted).toBe(true);
  });

  it("reports a rejection without retrying", async () => {
    const fetchMock = vi.fn(async () =>
      jsonResponse({ version: "cac/1", accepted: false, reason: "no query is pending" }, 409),
    );
    vi.stubGlobal("fetch", fetchMock);
    const ack = await new ConsoleClient("http://host:1").submitLabel(0, 1);
    expect(ack.accepted).toBe(false);
    expect(ack.reason).toContain("pending");
    expect(fetchMock).toHaveBeenCalledTimes(1);
  });
});
