// Deterministic force-directed placement. No randomness anywhere: nodes
// start on a circle ordered by id, so the same graph always lands in the
// same spots and screenshots diff cleanly between runs.

import type { GraphViewModel } from "./viewmodel.js";

export interface PlacedNode {
  id: string;
  x: number;
  y: number;
  pinned: boolean;
}

export interface LayoutOptions {
  width: number;
  height: number;
  iterations?: number;
}

const MARGIN = 40;
const STRIP_HEIGHT = 70;

export function computeLayout(vm: GraphViewModel, opts: LayoutOptions): Map<string, PlacedNode> {
  const iterations = opts.iterations ?? 150;
  const isolated = new Set<string>();
  for (const group of vm.isolatedGroups) {
    for (const member of group.members) {
      isolated.add(member);
    }
  }

  const free = vm.nodes.filter((n) => !isolated.has(n.id)).map((n) => n.id);
  free.sort();

  const placed = new Map<string, PlacedNode>();

  // Isolated nodes sit in a strip along the bottom, alphabetical by group
  // then member, so the main force simulation never has to fight them.
  const stripIds: string[] = [];
  for (const group of vm.isolatedGroups) {
    const members = [...group.members].sort();
    stripIds.push(...members);
  }
  const stripY = opts.height - STRIP_HEIGHT / 2;
  const stripSpan = Math.max(1, stripIds.length);
  stripIds.forEach((id, i) => {
    const x = MARGIN + ((opts.width - 2 * MARGIN) * (i + 0.5)) / stripSpan;
    placed.set(id, { id, x, y: stripY, pinned: true });
  });

  const areaW = opts.width - 2 * MARGIN;
  const areaH = opts.height - STRIP_HEIGHT - 2 * MARGIN;
  const cx = MARGIN + areaW / 2;
  const cy = MARGIN + areaH / 2;
  const radius = Math.min(areaW, areaH) / 2.5;

  const pos = new Map<string, { x: number; y: number }>();
  free.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / Math.max(1, free.length);
    pos.set(id, { x: cx + radius * Math.cos(angle), y: cy + radius * Math.sin(angle) });
  });

  const springs: Array<[string, string]> = [];
  for (const edge of vm.edges) {
    if (pos.has(edge.source) && pos.has(edge.target) && edge.source !== edge.target) {
      springs.push([edge.source, edge.target]);
    }
  }

  const k = Math.sqrt((areaW * areaH) / Math.max(1, free.length));
  let temperature = areaW / 10;
  const cool = temperature / (iterations + 1);

  for (let step = 0; step < iterations; step++) {
    const disp = new Map<string, { x: number; y: number }>();
    for (const id of free) {
      disp.set(id, { x: 0, y: 0 });
    }

    // Pairwise repulsion.
    for (let i = 0; i < free.length; i++) {
      for (let j = i + 1; j < free.length; j++) {
        const a = pos.get(free[i])!;
        const b = pos.get(free[j])!;
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let dist = Math.hypot(dx, dy);
        if (dist < 0.01) {
          // Coincident points get a deterministic nudge along the index axis.
          dx = 0.01 * (i - j);
          dy = 0.01;
          dist = Math.hypot(dx, dy);
        }
        const force = (k * k) / dist;
        const da = disp.get(free[i])!;
        const db = disp.get(free[j])!;
        da.x += (dx / dist) * force;
        da.y += (dy / dist) * force;
        db.x -= (dx / dist) * force;
        db.y -= (dy / dist) * force;
      }
    }

    // Spring attraction along edges.
    for (const [s, t] of springs) {
      const a = pos.get(s)!;
      const b = pos.get(t)!;
      let dx = a.x - b.x;
      let dy = a.y - b.y;
      const dist = Math.max(0.01, Math.hypot(dx, dy));
      const force = (dist * dist) / k;
      const da = disp.get(s)!;
      const db = disp.get(t)!;
      da.x -= (dx / dist) * force;
      da.y -= (dy / dist) * force;
      db.x += (dx / dist) * force;
      db.y += (dy / dist) * force;
    }

    // Mild pull toward the center keeps disconnected components on canvas.
    for (const id of free) {
      const p = pos.get(id)!;
      const d = disp.get(id)!;
      d.x += (cx - p.x) * 0.02;
      d.y += (cy - p.y) * 0.02;
    }

    for (const id of free) {
      const p = pos.get(id)!;
      const d = disp.get(id)!;
      const dist = Math.hypot(d.x, d.y);
      if (dist > 0) {
        const limited = Math.min(dist, temperature);
        p.x += (d.x / dist) * limited;
        p.y += (d.y / dist) * limited;
      }
      p.x = Math.min(MARGIN + areaW, Math.max(MARGIN, p.x));
      p.y = Math.min(MARGIN + areaH, Math.max(MARGIN, p.y));
    }
    temperature = Math.max(0, temperature - cool);
  }

  for (const id of free) {
    const p = pos.get(id)!;
    placed.set(id, { id, x: p.x, y: p.y, pinned: false });
  }
  return placed;
}
