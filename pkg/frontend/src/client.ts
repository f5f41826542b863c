// HTTP client for the cac/1 protocol.  DOM-free on purpose: the browser
// app and the scripted session harness share this module.

import {
  LabelAck,
  PointRecord,
  PointsPage,
  ReportPayload,
  StatePayload,
  parseAck,
  parsePoints,
  parseReport,
  parseState,
} from "./protocol.js";

export class ServerDown extends Error {}

async function getJson(url: string): Promise<unknown> {
  let resp: Response;
  try {
    resp = await fetch(url);
  } catch (err) {
    throw new ServerDown(`cannot reach ${url}: ${String(err)}`);
  }
  return resp.json();
}

export class ConsoleClient {
  readonly baseUrl: string;
  private inflight = new Map<string, Promise<unknown>>();

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  /** One in-flight request per endpoint: concurrent callers share it. */
  private shared<T>(key: string, start: () => Promise<T>): Promise<T> {
    const running = this.inflight.get(key);
    if (running) return running as Promise<T>;
    const p = start().finally(() => this.inflight.delete(key));
    this.inflight.set(key, p);
    return p;
  }

  getState(): Promise<StatePayload> {
    return this.shared("state", async () =>
      parseState(await getJson(`${this.baseUrl}/api/state`)),
    );
  }

  getPointsPage(page: number, pageSize: number, fields?: string[]): Promise<PointsPage> {
    const f = fields ? `&fields=${fields.join(",")}` : "";
    return this.shared("points", async () =>
      parsePoints(
        await getJson(`${this.baseUrl}/api/points?page=${page}&page_size=${pageSize}${f}`),
      ),
    );
  }

  /** Walk every page; the server caps page_size at 5000. */
  async getAllPoints(fields?: string[], pageSize = 2000): Promise<PointRecord[]> {
    const out: PointRecord[] = [];
    for (let page = 0; ; page++) {
      const doc = await this.getPointsPage(page, pageSize, fields);
      out.push(...doc.points);
      if (out.length >= doc.total || doc.points.length === 0) return out;
    }
  }

  getReport(): Promise<ReportPayload> {
    return this.shared("report", async () =>
      parseReport(await getJson(`${this.baseUrl}/api/report`)),
    );
  }

  /**
   * Submit a label for the pending point.  A lost response is retried
   * once; the server treats a resend of the accepted answer as
   * idempotent, so the retry can never double-apply.
   */
  async submitLabel(pointId: number, label: number): Promise<LabelAck> {
    const post = async (): Promise<LabelAck> => {
      const resp = await fetch(`${this.baseUrl}/api/label`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ point_id: pointId, label }),
      });
      return parseAck(await resp.json());
    };
    try {
      return await post();
    } catch {
      return await post();
    }
  }
}
