// Stable label -> color assignment.  The same label id always maps to
// the same color within a session, no matter the order labels appear in.

export const NEUTRAL = "#b9b9b9"; // unlabeled / uncertain points
export const QUERIED_RING = "#1db954"; // labeled points are highlighted in green
export const PENDING = "#ff3b30";

const GOLDEN_ANGLE = 137.50776405003785;

export class Palette {
  private assigned = new Map<number, string>();

  color(label: number): string {
    if (label <= 0) return NEUTRAL;
    let c = this.assigned.get(label);
    if (c === undefined) {
      // hue walks the golden angle from a fixed anchor so ids are stable
      const hue = (210 + (label - 1) * GOLDEN_ANGLE) % 360;
      c = `hsl(${hue.toFixed(1)}, 70%, 45%)`;
      this.assigned.set(label, c);
    }
    return c;
  }

  known(): number[] {
    return [...this.assigned.keys()].sort((a, b) => a - b);
  }
}
