import { describe, expect, it } from "vitest";

import { NEUTRAL, Palette } from "../src/palette.js";
import { planScatter } from "../src/scatter.js";
import { PointRecord } from "../src/protocol.js";

const SIZE = { width: 200, height: 100, margin: 10 };

function cloud(): PointRecord[] {
  return [
    { id: 0, coords: [0, 0], pred: 1, confident: true },
    { id: 1, coords: [1, 0], pred: 1, confident: true },
    { id: 2, coords: [0, 1], pred: 2, confident: true },
    { id: 3, coords: [1, 1], pred: 0, confident: false },
  ];
}

describe("palette", () => {
  it("is stable within a session regardless of query order", () => {
    const p = new Palette();
    const first = p.color(7);
    p.color(1);
    p.color(3);
    expect(p.color(7)).toBe(first);
    expect(p.known()).toEqual([1, 3, 7]);
  });

  it("separates distinct labels and reserves neutral for unlabeled", () => {
    const p = new Palette();
    expect(p.color(1)).not.toBe(p.color(2));
    expect(p.color(0)).toBe(NEUTRAL);
  });
});

describe("scatter planning", () => {
  it("renders a placeholder for zero points", () => {
    const plan = planScatter([], new Palette(), new Set(), null, SIZE);
    expect(plan.placeholder).toBe(true);
    expect(plan.dots).toHaveLength(0);
  });

  it("puts exactly one crosshair on the pending point", () => {
    const plan = planScatter(cloud(), new Palette(), new Set(), 2, SIZE);
    expect(plan.placeholder).toBe(false);
    expect(plan.crosshair).not.toBeNull();
    const target = plan.dots[2]!;
    expect(plan.crosshair).toEqual({ x: target.x, y: target.y });
  });

  it("rings queried points and fades uncertain ones", () => {
    const plan = planScatter(cloud(), new Palette(), new Set([0, 1]), null, SIZE);
    expect(plan.dots.filter((d) => d.ring !== null)).toHaveLength(2);
    expect(plan.dots[3]!.faded).toBe(true);
    expect(plan.dots[3]!.color).toBe(NEUTRAL);
  });

  it("keeps every dot inside the margin box", () => {
    const plan = planScatter(cloud(), new Palette(), new Set(), null, SIZE);
    for (const d of plan.dots) {
      expect(d.x).toBeGreaterThanOrEqual(10);
      expect(d.x).toBeLessThanOrEqual(190);
      expect(d.y).toBeGreaterThanOrEqual(10);
      expect(d.y).toBeLessThanOrEqual(90);
    }
  });

  it("prefers the server projection over raw coordinates", () => {
    const pts: PointRecord[] = [
      { id: 0, coords: [9, 9, 9], projection_2d: [0, 0] },
      { id: 1, coords: [9, 9, 9], projection_2d: [1, 1] },
    ];
    const plan = planScatter(pts, new Palette(), new Set(), null, SIZE);
    expect(plan.dots[0]!.x).not.toBe(plan.dots[1]!.x);
  });
});
