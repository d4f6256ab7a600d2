// Layered drawing for acyclic nets, computed client-side so the server can
// stay layout-free. Longest-path layering, then a few barycenter ordering
// sweeps, then grid coordinates. Everything is deterministic for a given
// node order: ties keep the previous relative order.

import type { NetEdge, NetNode } from "./api.js";

export interface PlacedNode {
  id: string;
  layer: number;
  row: number;
  x: number;
  y: number;
}

export interface Layout {
  nodes: Map<string, PlacedNode>;
  layers: string[][];
  width: number;
  height: number;
}

export interface LayoutOptions {
  columnGap?: number;
  rowGap?: number;
  margin?: number;
  orderingSweeps?: number;
}

const DEFAULTS = { columnGap: 110, rowGap: 70, margin: 60, orderingSweeps: 4 };

function longestPathLayers(nodes: NetNode[], edges: NetEdge[]): Map<string, number> {
  const indeg = new Map<string, number>();
  const out = new Map<string, string[]>();
  for (const n of nodes) {
    indeg.set(n.id, 0);
    out.set(n.id, []);
  }
  for (const e of edges) {
    if (!indeg.has(e.from) || !indeg.has(e.to)) {
      throw new Error(`edge ${e.from}->${e.to} mentions an unknown node`);
    }
    indeg.set(e.to, (indeg.get(e.to) ?? 0) + 1);
    out.get(e.from)!.push(e.to);
  }

  const layer = new Map<string, number>();
  const queue: string[] = [];
  for (const n of nodes) {
    if (indeg.get(n.id) === 0) {
      layer.set(n.id, 0);
      queue.push(n.id);
    }
  }
  let head = 0;
  let done = 0;
  while (head < queue.length) {
    const id = queue[head++]!;
    done += 1;
    const base = layer.get(id)!;
    for (const next of out.get(id)!) {
      const cur = layer.get(next) ?? 0;
      if (base + 1 > cur) layer.set(next, base + 1);
      const left = indeg.get(next)! - 1;
      indeg.set(next, left);
      if (left === 0) queue.push(next);
    }
  }
  if (done !== nodes.length) {
    throw new Error("layout needs an acyclic graph");
  }
  return layer;
}

// One barycenter pass: reorder `free` by the mean row of its neighbours in
// the fixed layer. Nodes without neighbours keep their current row as the
// sort key, and the sort is stable, so repeated runs settle.
function barycenterPass(free: string[], neighbourRows: Map<string, number[]>): string[] {
  const keyed = free.map((id, idx) => {
    const rows = neighbourRows.get(id) ?? [];
    const key = rows.length ? rows.reduce((a, b) => a + b, 0) / rows.length : idx;
    return { id, idx, key };
  });
  keyed.sort((a, b) => (a.key === b.key ? a.idx - b.idx : a.key - b.key));
  return keyed.map((k) => k.id);
}

export function layeredLayout(nodes: NetNode[], edges: NetEdge[], options?: LayoutOptions): Layout {
  const opts = { ...DEFAULTS, ...options };
  if (nodes.length === 0) {
    return { nodes: new Map(), layers: [], width: 2 * opts.margin, height: 2 * opts.margin };
  }

  const layerOf = longestPathLayers(nodes, edges);
  const layerCount = Math.max(...layerOf.values()) + 1;
  const layers: string[][] = Array.from({ length: layerCount }, () => []);
  for (const n of nodes) layers[layerOf.get(n.id)!]!.push(n.id);

  const preds = new Map<string, string[]>();
  const succs = new Map<string, string[]>();
  for (const n of nodes) {
    preds.set(n.id, []);
    succs.set(n.id, []);
  }
  for (const e of edges) {
    preds.get(e.to)!.push(e.from);
    succs.get(e.from)!.push(e.to);
  }

  const rowIn = (layer: string[]) => {
    const rows = new Map<string, number>();
    layer.forEach((id, i) => rows.set(id, i));
    return rows;
  };

  for (let sweep = 0; sweep < opts.orderingSweeps; sweep++) {
    // downwards: order each layer by predecessor rows
    for (let i = 1; i < layers.length; i++) {
      const fixed = rowIn(layers[i - 1]!);
      const rows = new Map<string, number[]>();
      for (const id of layers[i]!) {
        rows.set(id, preds.get(id)!.map((p) => fixed.get(p)).filter((r): r is number => r !== undefined));
      }
      layers[i] = barycenterPass(layers[i]!, rows);
    }
    // upwards: order each layer by successor rows
    for (let i = layers.length - 2; i >= 0; i--) {
      const fixed = rowIn(layers[i + 1]!);
      const rows = new Map<string, number[]>();
      for (const id of layers[i]!) {
        rows.set(id, succs.get(id)!.map((s) => fixed.get(s)).filter((r): r is number => r !== undefined));
      }
      layers[i] = barycenterPass(layers[i]!, rows);
    }
  }

  const tallest = Math.max(...layers.map((l) => l.length));
  const placed = new Map<string, PlacedNode>();
  layers.forEach((layer, li) => {
    const offset = ((tallest - layer.length) * opts.rowGap) / 2;
    layer.forEach((id, row) => {
      placed.set(id, {
        id,
        layer: li,
        row,
        x: opts.margin + li * opts.columnGap,
        y: opts.margin + offset + row * opts.rowGap,
      });
    });
  });

  return {
    nodes: placed,
    layers,
    width: 2 * opts.margin + (layers.length - 1) * opts.columnGap,
    height: 2 * opts.margin + (tallest - 1) * opts.rowGap,
  };
}
