// Browser entry point. Wires the API client, view model, and layout into
// the static page. Everything stateful lives on the App class; the modules
// it calls stay pure so they can be tested without a DOM.

import { ApiClient, ApiError } from "./api.js";
import {
  formatApiError,
  formatCount,
  formatKgcaBanner,
  formatMetricValue,
  noteRequired,
  verdictBadgeClass,
} from "./format.js";
import { computeLayout, PlacedNode } from "./layout.js";
import {
  buildViewModel,
  EdgeVM,
  findNode,
  GraphViewModel,
  NodeVM,
  withServerUpdate,
} from "./viewmodel.js";
import type { InstancePayload, RunSummary, Verdict } from "./types.js";

const NODE_RADIUS = 9;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

function div(className: string, text?: string): HTMLDivElement {
  const d = document.createElement("div");
  d.className = className;
  if (text !== undefined) {
    d.textContent = text;
  }
  return d;
}

class App {
  api: ApiClient;
  runs: RunSummary[] = [];
  runId: string | null = null;
  vm: GraphViewModel | null = null;
  layout: Map<string, PlacedNode> = new Map();
  selectedEdge: string | null = null;
  selectedNode: string | null = null;

  canvas: HTMLCanvasElement;
  ctx: CanvasRenderingContext2D;

  constructor() {
    this.api = new ApiClient();
    this.canvas = el<HTMLCanvasElement>("graph-canvas");
    const ctx = this.canvas.getContext("2d");
    if (!ctx) {
      throw new Error("canvas 2d context unavailable");
    }
    this.ctx = ctx;
    this.canvas.addEventListener("click", (ev) => this.onCanvasClick(ev));
    el<HTMLSelectElement>("run-select").addEventListener("change", (ev) => {
      const target = ev.target as HTMLSelectElement;
      void this.loadRun(target.value);
    });
  }

  async start(): Promise<void> {
    await this.withRetry("runs", async () => {
      this.runs = await this.api.listRuns();
      const select = el<HTMLSelectElement>("run-select");
      clear(select);
      for (const run of this.runs) {
        const opt = document.createElement("option");
        opt.value = run.run_id;
        opt.textContent = `${run.run_id} (${run.device_id})`;
        select.appendChild(opt);
      }
      if (this.runs.length === 0) {
        this.showEmpty("No runs found. Point the service at a data directory with completed runs.");
        return;
      }
      await this.loadRun(this.runs[0].run_id);
    });
  }

  async loadRun(runId: string): Promise<void> {
    this.runId = runId;
    this.selectedEdge = null;
    this.selectedNode = null;
    await this.withRetry("run", async () => {
      const [graph, hypotheses, metrics] = await Promise.all([
        this.api.getGraph(runId),
        this.api.getHypotheses(runId),
        this.api.getMetrics(runId),
      ]);
      this.vm = buildViewModel(graph, hypotheses);
      this.layout = computeLayout(this.vm, {
        width: this.canvas.width,
        height: this.canvas.height,
      });
      this.setBanner(metrics.metrics["KGCA"] ?? "undefined");
      this.renderMetrics(metrics.metrics);
      this.renderCounts();
      this.renderIsolated();
      this.draw();
      if (this.vm.empty) {
        this.showEmpty("This run produced no graph nodes.");
      } else {
        el("detail-panel").textContent = "Select a node or edge.";
      }
    });
  }

  // Wrap a loader so failures land in the status bar with a retry button
  // instead of a blank page.
  async withRetry(label: string, task: () => Promise<void>): Promise<void> {
    const status = el("status-bar");
    try {
      status.textContent = `loading ${label}...`;
      status.className = "status";
      await task();
      status.textContent = "";
    } catch (err) {
      clear(status);
      status.className = "status status-error";
      const msg = err instanceof ApiError ? formatApiError(err) : String(err);
      status.appendChild(div("status-text", msg));
      const retry = document.createElement("button");
      retry.textContent = "retry";
      retry.addEventListener("click", () => void this.withRetry(label, task));
      status.appendChild(retry);
    }
  }

  setBanner(kgca: number | "undefined"): void {
    el("kgca-banner").textContent = formatKgcaBanner(kgca);
  }

  renderMetrics(metrics: Record<string, number | "undefined">): void {
    const box = el("metrics-box");
    clear(box);
    for (const [name, value] of Object.entries(metrics)) {
      const row = div("metric-row");
      row.appendChild(div("metric-name", name));
      row.appendChild(div("metric-value", formatMetricValue(value)));
      box.appendChild(row);
    }
  }

  renderCounts(): void {
    if (this.vm) {
      el("verdict-counts").textContent = formatCount(this.vm.counts);
    }
  }

  renderIsolated(): void {
    const box = el("isolated-box");
    clear(box);
    if (!this.vm || this.vm.isolatedGroups.length === 0) {
      box.textContent = "none";
      return;
    }
    for (const group of this.vm.isolatedGroups) {
      const row = div("isolated-group");
      row.appendChild(div("isolated-app", group.appName));
      row.appendChild(div("isolated-members", `${group.members.length} nodes`));
      box.appendChild(row);
    }
  }

  showEmpty(message: string): void {
    this.ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    this.ctx.fillStyle = "#666";
    this.ctx.font = "16px sans-serif";
    this.ctx.textAlign = "center";
    this.ctx.fillText(message, this.canvas.width / 2, this.canvas.height / 2);
    el("detail-panel").textContent = message;
  }

  draw(): void {
    if (!this.vm) {
      return;
    }
    const ctx = this.ctx;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);

    for (const edge of this.vm.edges) {
      const a = this.layout.get(edge.source);
      const b = this.layout.get(edge.target);
      if (!a || !b) {
        continue;
      }
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      if (edge.id === this.selectedEdge) {
        ctx.strokeStyle = "#1a73e8";
        ctx.lineWidth = 3;
      } else if (edge.state === "invalid") {
        ctx.strokeStyle = "#d93025";
        ctx.lineWidth = 1.5;
      } else if (edge.state === "valid") {
        ctx.strokeStyle = "#188038";
        ctx.lineWidth = 1.5;
      } else {
        ctx.strokeStyle = "#b5b5b5";
        ctx.lineWidth = 1;
      }
      ctx.stroke();
    }

    ctx.textAlign = "left";
    ctx.font = "11px sans-serif";
    for (const node of this.vm.nodes) {
      const p = this.layout.get(node.id);
      if (!p) {
        continue;
      }
      ctx.beginPath();
      ctx.arc(p.x, p.y, NODE_RADIUS, 0, 2 * Math.PI);
      ctx.fillStyle = node.color;
      ctx.fill();
      if (node.id === this.selectedNode) {
        ctx.strokeStyle = "#1a73e8";
        ctx.lineWidth = 3;
        ctx.stroke();
      }
      ctx.fillStyle = "#333";
      const label = node.value.length > 18 ? node.value.slice(0, 17) + "\u2026" : node.value;
      ctx.fillText(label, p.x + NODE_RADIUS + 3, p.y + 4);
    }
  }

  onCanvasClick(ev: MouseEvent): void {
    if (!this.vm) {
      return;
    }
    const rect = this.canvas.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) * this.canvas.width) / rect.width;
    const y = ((ev.clientY - rect.top) * this.canvas.height) / rect.height;

    const node = this.hitNode(x, y);
    if (node) {
      this.selectedNode = node.id;
      this.selectedEdge = null;
      this.draw();
      this.showNode(node);
      return;
    }
    const edge = this.hitEdge(x, y);
    if (edge) {
      this.selectedEdge = edge.id;
      this.selectedNode = null;
      this.draw();
      this.showEdge(edge);
    }
  }

  hitNode(x: number, y: number): NodeVM | null {
    if (!this.vm) {
      return null;
    }
    for (const node of this.vm.nodes) {
      const p = this.layout.get(node.id);
      if (p && Math.hypot(p.x - x, p.y - y) <= NODE_RADIUS + 2) {
        return node;
      }
    }
    return null;
  }

  hitEdge(x: number, y: number): EdgeVM | null {
    if (!this.vm) {
      return null;
    }
    for (const edge of this.vm.edges) {
      const a = this.layout.get(edge.source);
      const b = this.layout.get(edge.target);
      if (!a || !b) {
        continue;
      }
      if (pointSegmentDistance(x, y, a.x, a.y, b.x, b.y) <= 4) {
        return edge;
      }
    }
    return null;
  }

  showNode(node: NodeVM): void {
    const panel = el("detail-panel");
    clear(panel);
    panel.appendChild(div("detail-title", `${node.entityType}: ${node.value}`));
    panel.appendChild(div("detail-sub", `confidence ${node.maxConfidence}, degree ${node.degree}`));
    panel.appendChild(div("detail-sub", `${node.provenance.length} source record(s)`));
    const list = div("uid-list");
    for (const uid of node.provenance) {
      const btn = document.createElement("button");
      btn.className = "uid-link";
      btn.textContent = uid;
      btn.addEventListener("click", () => void this.showProvenance(uid));
      list.appendChild(btn);
    }
    panel.appendChild(list);
  }

  showEdge(edge: EdgeVM): void {
    const panel = el("detail-panel");
    clear(panel);
    panel.appendChild(div("detail-title", edge.typePair));
    panel.appendChild(div("detail-hypothesis", edge.hypothesis));
    const srcNode = findNode(this.vm!, edge.source);
    const dstNode = findNode(this.vm!, edge.target);
    if (srcNode && dstNode) {
      panel.appendChild(div("detail-sub", `${srcNode.value} \u2194 ${dstNode.value}`));
    }
    for (const inst of edge.instances) {
      panel.appendChild(this.instanceRow(edge, inst));
    }
  }

  instanceRow(edge: EdgeVM, inst: InstancePayload): HTMLElement {
    const row = div("instance-row");
    const badge = document.createElement("span");
    badge.className = verdictBadgeClass(inst.verdict);
    badge.textContent = inst.verdict;
    row.appendChild(badge);

    const uidBtn = document.createElement("button");
    uidBtn.className = "uid-link";
    uidBtn.textContent = inst.uid;
    uidBtn.addEventListener("click", () => void this.showProvenance(inst.uid));
    row.appendChild(uidBtn);

    if (inst.note) {
      row.appendChild(div("instance-note", `note: ${inst.note}`));
    }

    const controls = div("instance-controls");
    const noteInput = document.createElement("input");
    noteInput.type = "text";
    noteInput.placeholder = "note (required for corrections)";
    const errBox = div("instance-error");

    for (const target of ["valid", "invalid"] as const) {
      const btn = document.createElement("button");
      btn.textContent = `mark ${target}`;
      btn.addEventListener("click", () => {
        if (noteRequired(inst.verdict, target) && noteInput.value.trim() === "") {
          errBox.textContent = "A correction needs a note explaining the change.";
          return;
        }
        void this.submitVerdict(edge, inst, target, noteInput.value, errBox);
      });
      controls.appendChild(btn);
    }
    controls.appendChild(noteInput);
    row.appendChild(controls);
    row.appendChild(errBox);
    return row;
  }

  async submitVerdict(
    edge: EdgeVM,
    inst: InstancePayload,
    target: Verdict & ("valid" | "invalid"),
    note: string,
    errBox: HTMLElement,
  ): Promise<void> {
    if (!this.runId || !this.vm) {
      return;
    }
    try {
      const resp = await this.api.postVerdict(this.runId, {
        edge_id: edge.id,
        uid: inst.uid,
        verdict: target,
        reviewer: "ui",
        note,
      });
      this.vm = withServerUpdate(this.vm, resp);
      this.setBanner(resp.kgca);
      this.renderCounts();
      this.draw();
      const updated = this.vm.edges.find((e) => e.id === edge.id);
      if (updated) {
        this.showEdge(updated);
      }
    } catch (err) {
      errBox.textContent = err instanceof ApiError ? formatApiError(err) : String(err);
    }
  }

  async showProvenance(uid: string): Promise<void> {
    const panel = el("provenance-panel");
    clear(panel);
    try {
      const prov = await this.api.getProvenance(uid);
      panel.appendChild(div("detail-title", `record ${prov.uid}`));
      const rec = prov.record;
      const fields: Array<[string, string]> = [
        ["database", rec.database],
        ["table", rec.table],
        ["path", rec.path],
        ["row", String(rec.lid)],
        ["table csv", prov.table_csv],
      ];
      for (const [name, value] of fields) {
        const row = div("prov-row");
        row.appendChild(div("prov-name", name));
        row.appendChild(div("prov-value", value));
        panel.appendChild(row);
      }
      const pairs = div("prov-pairs");
      for (const [col, value] of Object.entries(rec.pairs)) {
        const row = div("prov-row");
        row.appendChild(div("prov-name", col));
        row.appendChild(div("prov-value", value));
        pairs.appendChild(row);
      }
      panel.appendChild(pairs);
    } catch (err) {
      if (err instanceof ApiError && err.errorType === "CustodyBreach") {
        const warn = div("custody-warning");
        warn.appendChild(div("custody-title", "CUSTODY BREACH"));
        warn.appendChild(div("custody-detail", err.detail));
        panel.appendChild(warn);
      } else if (err instanceof ApiError && err.status === 404) {
        panel.appendChild(div("prov-missing", `No record found for ${uid}.`));
      } else {
        panel.appendChild(div("status-error", err instanceof ApiError ? formatApiError(err) : String(err)));
      }
    }
  }
}

function pointSegmentDistance(px: number, py: number, ax: number, ay: number, bx: number, by: number): number {
  const dx = bx - ax;
  const dy = by - ay;
  const lenSq = dx * dx + dy * dy;
  if (lenSq === 0) {
    return Math.hypot(px - ax, py - ay);
  }
  let t = ((px - ax) * dx + (py - ay) * dy) / lenSq;
  t = Math.max(0, Math.min(1, t));
  return Math.hypot(px - (ax + t * dx), py - (ay + t * dy));
}

window.addEventListener("DOMContentLoaded", () => {
  const app = new App();
  void app.start();
});
