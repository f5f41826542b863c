// cac/1 wire types and runtime checks.
//
// The server is trusted but versioned; every payload is validated before
// it reaches rendering code so a protocol drift fails loudly instead of
// painting garbage.

export const PROTOCOL_VERSION = "cac/1";

export type Phase = "computing" | "awaiting_label" | "done";

export interface LevelInfo {
  n: number;
  theta: number;
  eta: number;
}

export interface PendingQuery {
  point_id: number;
  coords: number[];
  projection_2d: [number, number];
}

export interface StatePayload {
  version: string;
  phase: Phase;
  level: LevelInfo;
  counts: { points: number; confident: number; queried: number };
  pending_query: PendingQuery | null;
}

export interface PointRecord {
  id: number;
  coords?: number[];
  pred?: number;
  confident?: boolean;
  component?: number;
  projection_2d?: [number, number];
}

export interface PointsPage {
  version: string;
  page: number;
  page_size: number;
  total: number;
  points: PointRecord[];
}

export interface LabelAck {
  accepted: boolean;
  reason?: string;
}

export interface ReportPayload {
  version: string;
  complete: boolean;
  query_total: number;
  queries: { index: number; label: number }[];
  assignments: number[];
  confident: number[];
  [extra: string]: unknown;
}

export class ProtocolFormatError extends Error {}

function fail(what: string, doc: unknown): never {
  throw new ProtocolFormatError(
    `malformed ${what} payload: ${JSON.stringify(doc)?.slice(0, 200)}`,
  );
}

function isNum(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function numPair(v: unknown): v is [number, number] {
  return Array.isArray(v) && v.length === 2 && v.every(isNum);
}

export function checkVersion(doc: { version?: unknown }): void {
  if (doc.version !== PROTOCOL_VERSION) {
    throw new ProtocolFormatError(
      `server speaks ${String(doc.version)}, console expects ${PROTOCOL_VERSION}`,
    );
  }
}

export function parseState(doc: unknown): StatePayload {
  const d = doc as Record<string, unknown>;
  if (typeof d !== "object" || d === null) fail("state", doc);
  checkVersion(d);
  if (d.phase !== "computing" && d.phase !== "awaiting_label" && d.phase !== "done")
    fail("state", doc);
  const level = d.level as Record<string, unknown>;
  const counts = d.counts as Record<string, unknown>;
  if (!level || !isNum(level.n) || !isNum(level.theta) || !isNum(level.eta))
    fail("state", doc);
  if (!counts || !isNum(counts.points) || !isNum(counts.confident) || !isNum(counts.queried))
    fail("state", doc);
  let pending: PendingQuery | null = null;
  if (d.pending_query !== null && d.pending_query !== undefined) {
    const p = d.pending_query as Record<string, unknown>;
    if (!isNum(p.point_id) || !Array.isArray(p.coords) || !numPair(p.projection_2d))
      fail("state", doc);
    pending = {
      point_id: p.point_id,
      coords: p.coords as number[],
      projection_2d: p.projection_2d,
    };
  }
  return {
    version: PROTOCOL_VERSION,
    phase: d.phase,
    level: { n: level.n as number, theta: level.theta as number, eta: level.eta as number },
    counts: {
      points: counts.points as number,
      confident: counts.confident as number,
      queried: counts.queried as number,
    },
    pending_query: pending,
  };
}

export function parsePoints(doc: unknown): PointsPage {
  const d = doc as Record<string, unknown>;
  if (typeof d !== "object" || d === null) fail("points", doc);
  checkVersion(d);
  if (!isNum(d.page) || !isNum(d.page_size) || !isNum(d.total) || !Array.isArray(d.points))
    fail("points", doc);
  for (const rec of d.points as Record<string, unknown>[]) {
    if (!isNum(rec.id)) fail("points", rec);
  }
  return d as unknown as PointsPage;
}

export function parseAck(doc: unknown): LabelAck {
  const d = doc as Record<string, unknown>;
  if (typeof d !== "object" || d === null || typeof d.accepted !== "boolean")
    fail("label ack", doc);
  return d as unknown as LabelAck;
}

export function parseReport(doc: unknown): ReportPayload {
  const d = doc as Record<string, unknown>;
  if (typeof d !== "object" || d === null) fail("report", doc);
  checkVersion(d);
  if (typeof d.complete !== "boolean" || !isNum(d.query_total)) fail("report", doc);
  return d as unknown as ReportPayload;
}
