// Scatter view planning and painting, split so the geometry and color
// logic is testable without a canvas.

import { NEUTRAL, PENDING, QUERIED_RING, Palette } from "./palette.js";
import { PointRecord } from "./protocol.js";

export interface Dot {
  x: number; // CSS pixels
  y: number;
  color: string;
  ring: string | null; // outline for queried points
  faded: boolean; // uncertain points render translucent
}

export interface Crosshair {
  x: number;
  y: number;
}

export interface ScatterPlan {
  placeholder: boolean;
  dots: Dot[];
  crosshair: Crosshair | null;
}

export interface ViewSize {
  width: number;
  height: number;
  margin?: number;
}

function position(rec: PointRecord): [number, number] | null {
  if (rec.projection_2d) return rec.projection_2d;
  if (rec.coords && rec.coords.length >= 2)
    return [rec.coords[0]!, rec.coords[1]!];
  if (rec.coords && rec.coords.length === 1) return [rec.coords[0]!, 0];
  return null;
}

/**
 * Lay the point cloud out in pixel space: color by predicted label,
 * fade non-confident points, ring already-queried points, and put one
 * crosshair on the pending query.  Zero points -> placeholder view.
 */
export function planScatter(
  points: PointRecord[],
  palette: Palette,
  queried: Set<number>,
  pendingId: number | null,
  size: ViewSize,
): ScatterPlan {
  const margin = size.margin ?? 24;
  const located = points
    .map((rec) => ({ rec, pos: position(rec) }))
    .filter((e): e is { rec: PointRecord; pos: [number, number] } => e.pos !== null);
  if (located.length === 0) return { placeholder: true, dots: [], crosshair: null };

  let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
  for (const { pos } of located) {
    xmin = Math.min(xmin, pos[0]); xmax = Math.max(xmax, pos[0]);
    ymin = Math.min(ymin, pos[1]); ymax = Math.max(ymax, pos[1]);
  }
  const spanX = xmax - xmin || 1;
  const spanY = ymax - ymin || 1;
  const sx = (v: number) => margin + ((v - xmin) / spanX) * (size.width - 2 * margin);
  // screen y grows downward
  const sy = (v: number) => size.height - margin - ((v - ymin) / spanY) * (size.height - 2 * margin);

  const dots: Dot[] = [];
  let crosshair: Crosshair | null = null;
  for (const { rec, pos } of located) {
    const pred = rec.pred ?? 0;
    const confident = rec.confident ?? false;
    const dot: Dot = {
      x: sx(pos[0]),
      y: sy(pos[1]),
      color: pred > 0 ? palette.color(pred) : NEUTRAL,
      ring: queried.has(rec.id) ? QUERIED_RING : null,
      faded: !confident && pred === 0,
    };
    dots.push(dot);
    if (pendingId !== null && rec.id === pendingId)
      crosshair = { x: dot.x, y: dot.y };
  }
  return { placeholder: false, dots, crosshair };
}

export function paint(canvas: HTMLCanvasElement, plan: ScatterPlan): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (plan.placeholder) {
    ctx.fillStyle = NEUTRAL;
    ctx.font = "14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("waiting for points…", canvas.width / 2, canvas.height / 2);
    return;
  }
  for (const dot of plan.dots) {
    ctx.globalAlpha = dot.faded ? 0.35 : 1.0;
    ctx.fillStyle = dot.color;
    ctx.beginPath();
    ctx.arc(dot.x, dot.y, 3, 0, 2 * Math.PI);
    ctx.fill();
    if (dot.ring) {
      ctx.globalAlpha = 1.0;
      ctx.strokeStyle = dot.ring;
      ctx.lineWidth = 2.5;
      ctx.beginPath();
      ctx.arc(dot.x, dot.y, 6, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }
  ctx.globalAlpha = 1.0;
  if (plan.crosshair) {
    const { x, y } = plan.crosshair;
    ctx.strokeStyle = PENDING;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(x - 14, y); ctx.lineTo(x + 14, y);
    ctx.moveTo(x, y - 14); ctx.lineTo(x, y + 14);
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(x, y, 9, 0, 2 * Math.PI);
    ctx.stroke();
  }
}
