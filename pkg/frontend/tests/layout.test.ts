import { describe, expect, it } from "vitest";

import type { NetEdge, NetNode } from "../src/api.js";
import { layeredLayout } from "../src/layout.js";
import { fig1Graph } from "./helpers.js";

function mkNode(id: string, kind: "place" | "transition" = "place"): NetNode {
  return { id, kind, isSource: false, isSink: false };
}

describe("layeredLayout", () => {
  it("places every node exactly once", () => {
    const g = fig1Graph();
    const layout = layeredLayout(g.nodes, g.edges);
    expect(layout.nodes.size).toBe(g.nodes.length);
    const inLayers = layout.layers.flat();
    expect(inLayers.length).toBe(g.nodes.length);
    expect(new Set(inLayers).size).toBe(g.nodes.length);
  });

  it("keeps edges pointing left to right", () => {
    const g = fig1Graph();
    const layout = layeredLayout(g.nodes, g.edges);
    for (const e of g.edges) {
      const a = layout.nodes.get(e.from)!;
      const b = layout.nodes.get(e.to)!;
      expect(a.layer).toBeLessThan(b.layer);
      expect(a.x).toBeLessThan(b.x);
    }
  });

  it("puts the source in the first column and the sink in the last", () => {
    const g = fig1Graph();
    const layout = layeredLayout(g.nodes, g.edges);
    const source = g.nodes.find((n) => n.isSource)!;
    const sink = g.nodes.find((n) => n.isSink)!;
    expect(layout.nodes.get(source.id)!.layer).toBe(0);
    expect(layout.nodes.get(sink.id)!.layer).toBe(layout.layers.length - 1);
  });

  it("gives no two nodes the same position", () => {
    const g = fig1Graph();
    const layout = layeredLayout(g.nodes, g.edges);
    const seen = new Set<string>();
    for (const n of layout.nodes.values()) {
      const key = `${n.x},${n.y}`;
      expect(seen.has(key)).toBe(false);
      seen.add(key);
    }
  });

  it("is deterministic for a fixed node order", () => {
    const g = fig1Graph();
    const a = layeredLayout(g.nodes, g.edges);
    const b = layeredLayout(g.nodes, g.edges);
    expect(JSON.stringify([...a.nodes.entries()])).toBe(JSON.stringify([...b.nodes.entries()]));
    expect(a.layers).toEqual(b.layers);
  });

  it("handles an empty graph", () => {
    const layout = layeredLayout([], []);
    expect(layout.nodes.size).toBe(0);
    expect(layout.width).toBeGreaterThan(0);
    expect(layout.height).toBeGreaterThan(0);
  });

  it("rejects edges that mention unknown nodes", () => {
    const nodes = [mkNode("a")];
    const edges: NetEdge[] = [{ from: "a", to: "ghost" }];
    expect(() => layeredLayout(nodes, edges)).toThrow(/unknown node/);
  });

  it("rejects cyclic graphs", () => {
    const nodes = [mkNode("a"), mkNode("b", "transition")];
    const edges: NetEdge[] = [
      { from: "a", to: "b" },
      { from: "b", to: "a" },
    ];
    expect(() => layeredLayout(nodes, edges)).toThrow(/acyclic/);
  });

  it("centers shorter layers instead of top-aligning them", () => {
    // diamond: s -> (x | y) -> t, middle layer is the tallest
    const nodes = [mkNode("s"), mkNode("x", "transition"), mkNode("y", "transition"), mkNode("t")];
    const edges: NetEdge[] = [
      { from: "s", to: "x" },
      { from: "s", to: "y" },
      { from: "x", to: "t" },
      { from: "y", to: "t" },
    ];
    const layout = layeredLayout(nodes, edges);
    const s = layout.nodes.get("s")!;
    const x = layout.nodes.get("x")!;
    const y = layout.nodes.get("y")!;
    expect(s.y).toBeGreaterThan(Math.min(x.y, y.y));
    expect(s.y).toBeLessThan(Math.max(x.y, y.y));
  });
});
