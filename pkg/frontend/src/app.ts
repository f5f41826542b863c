// Console shell: poll the server, keep a point cache, paint the scatter,
// and let the user answer the pending query.

import { ConsoleClient, ServerDown } from "./client.js";
import { Palette } from "./palette.js";
import { PointRecord, ReportPayload, StatePayload } from "./protocol.js";
import { paint, planScatter } from "./scatter.js";

const POLL_MS = 1000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export class App {
  private client: ConsoleClient;
  private palette = new Palette();
  private points: PointRecord[] = [];
  private queried = new Set<number>();
  private state: StatePayload | null = null;
  private timer: number | null = null;
  private stopped = false;

  private canvas = el<HTMLCanvasElement>("scatter");
  private phaseEl = el<HTMLElement>("phase");
  private levelEl = el<HTMLElement>("level");
  private countsEl = el<HTMLElement>("counts");
  private askEl = el<HTMLElement>("ask");
  private classesEl = el<HTMLElement>("classes");
  private newLabelEl = el<HTMLInputElement>("new-label");
  private toastEl = el<HTMLElement>("toast");

  constructor(baseUrl: string) {
    this.client = new ConsoleClient(baseUrl);
    el<HTMLButtonElement>("submit-new").addEventListener("click", () => {
      const v = parseInt(this.newLabelEl.value, 10);
      if (Number.isFinite(v) && v >= 1) void this.answer(v);
      else this.toast("labels are integers starting at 1");
    });
  }

  start(): void {
    void this.tick();
    this.timer = window.setInterval(() => void this.tick(), POLL_MS);
  }

  private toast(msg: string): void {
    this.toastEl.textContent = msg;
    this.toastEl.classList.add("visible");
    window.setTimeout(() => this.toastEl.classList.remove("visible"), 2500);
  }

  private async tick(): Promise<void> {
    if (this.stopped) return;
    let state: StatePayload;
    try {
      state = await this.client.getState();
    } catch (err) {
      if (err instanceof ServerDown) {
        this.phaseEl.textContent = "server unreachable";
        return; // keep polling; serve may still be starting
      }
      throw err;
    }
    this.state = state;
    if (this.points.length === 0 && state.counts.points > 0) {
      this.points = await this.client.getAllPoints();
    }
    // the partial report carries assignments/confidence/queries in one shot
    const report = await this.client.getReport();
    this.applyReport(report);
    this.render();
    if (state.phase === "done") {
      this.stopped = true;
      if (this.timer !== null) window.clearInterval(this.timer);
      this.showSummary(report);
    }
  }

  private applyReport(report: ReportPayload): void {
    const assignments = report.assignments ?? [];
    const confident = new Set(report.confident ?? []);
    for (const rec of this.points) {
      rec.pred = assignments[rec.id] ?? rec.pred ?? 0;
      rec.confident = confident.has(rec.id);
    }
    this.queried = new Set((report.queries ?? []).map((q) => q.index));
    for (const q of report.queries ?? []) this.palette.color(q.label);
  }

  private render(): void {
    const state = this.state;
    if (!state) return;
    this.phaseEl.textContent = state.phase.replace("_", " ");
    this.phaseEl.dataset.phase = state.phase;
    this.levelEl.textContent =
      `n = ${state.level.n}   θ = ${state.level.theta.toFixed(3)}   ` +
      `η = ${state.level.eta.toFixed(3)}`;
    this.countsEl.textContent =
      `${state.counts.confident} / ${state.counts.points} confident · ` +
      `${state.counts.queried} labels spent`;

    const pending = state.pending_query;
    this.askEl.textContent = pending
      ? `label requested for point ${pending.point_id} at ` +
        `(${pending.projection_2d.map((v) => v.toFixed(2)).join(", ")})`
      : "";
    this.renderClassButtons(pending !== null);

    const plan = planScatter(this.points, this.palette, this.queried,
      pending ? pending.point_id : null,
      { width: this.canvas.width, height: this.canvas.height });
    paint(this.canvas, plan);
  }

  private renderClassButtons(enabled: boolean): void {
    this.classesEl.textContent = "";
    for (const label of this.palette.known()) {
      const btn = document.createElement("button");
      btn.textContent = `class ${label}`;
      btn.style.borderColor = this.palette.color(label);
      btn.disabled = !enabled;
      btn.addEventListener("click", () => void this.answer(label));
      this.classesEl.appendChild(btn);
    }
    this.newLabelEl.disabled = !enabled;
    el<HTMLButtonElement>("submit-new").disabled = !enabled;
  }

  private async answer(label: number): Promise<void> {
    const pending = this.state?.pending_query;
    if (!pending) {
      this.toast("no query is waiting");
      return;
    }
    const ack = await this.client.submitLabel(pending.point_id, label);
    if (!ack.accepted) {
      this.toast(ack.reason ?? "rejected");
      return;
    }
    this.palette.color(label);
    void this.tick(); // pick up the phase change without waiting a full poll
  }

  private showSummary(report: ReportPayload): void {
    const scores = report.scores as Record<string, number> | undefined;
    const acc = scores ? `  accuracy ${(scores.accuracy ?? 0).toFixed(4)}` : "";
    this.askEl.textContent =
      `run complete: ${report.query_total} labels spent${acc}`;
  }
}

const params = new URLSearchParams(window.location.search);
const server = params.get("server") ?? `http://${window.location.hostname}:8000`;
new App(server).start();
