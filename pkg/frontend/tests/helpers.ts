import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { AnalysisReport, Marking, Mode, NetGraph } from "../src/api.js";
import type { AnalysisApi, Scheduler } from "../src/state.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf8")) as T;
}

export const fig1Graph = (): NetGraph => fixture<NetGraph>("fig1.net.json");

// Manual clock standing in for setTimeout, so tests drive the debounce.
export class FakeScheduler implements Scheduler {
  private tasks: { at: number; fn: () => void; id: number }[] = [];
  private nextId = 1;
  now = 0;

  set(fn: () => void, ms: number): unknown {
    const id = this.nextId++;
    this.tasks.push({ at: this.now + ms, fn, id });
    return id;
  }

  clear(handle: unknown): void {
    this.tasks = this.tasks.filter((t) => t.id !== handle);
  }

  advance(ms: number): void {
    this.now += ms;
    for (;;) {
      const due = this.tasks
        .filter((t) => t.at <= this.now)
        .sort((a, b) => a.at - b.at || a.id - b.id)[0];
      if (!due) break;
      this.tasks = this.tasks.filter((t) => t.id !== due.id);
      due.fn();
    }
  }

  pendingCount(): number {
    return this.tasks.length;
  }
}

// Let promise callbacks queued by resolved stubs run.
export async function settle(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}

export interface Deferred<T> {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (err: unknown) => void;
}

export function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

export interface RecordedCall {
  marking: Marking;
  mode: Mode;
  signal?: AbortSignal;
}

type Responder = (marking: Marking, mode: Mode, signal?: AbortSignal) => Promise<AnalysisReport>;

export class StubApi implements AnalysisApi {
  analyzeCalls: RecordedCall[] = [];
  witnessCalls: RecordedCall[] = [];
  onAnalyze: Responder;
  onWitness: Responder;

  constructor(onAnalyze?: Responder, onWitness?: Responder) {
    const unstubbed: Responder = () => Promise.reject(new Error("not stubbed"));
    this.onAnalyze = onAnalyze ?? unstubbed;
    this.onWitness = onWitness ?? unstubbed;
  }

  uploadNet(): Promise<{ netId: string }> {
    return Promise.reject(new Error("uploadNet not stubbed"));
  }

  getNet(): Promise<NetGraph> {
    return Promise.reject(new Error("getNet not stubbed"));
  }

  analyze(_netId: string, marking: Marking, mode: Mode, signal?: AbortSignal): Promise<AnalysisReport> {
    this.analyzeCalls.push({ marking, mode, signal });
    return this.onAnalyze(marking, mode, signal);
  }

  witness(_netId: string, marking: Marking, mode: Mode, signal?: AbortSignal): Promise<AnalysisReport> {
    this.witnessCalls.push({ marking, mode, signal });
    return this.onWitness(marking, mode, signal);
  }
}

// Pull data-* attributes back out of the rendered SVG.
export function renderedNodeRoles(svg: string): Record<string, string> {
  const roles: Record<string, string> = {};
  const re = /<g data-id="([^"]*)" data-kind="[^"]*" data-role="([^"]*)"/g;
  for (const m of svg.matchAll(re)) roles[m[1]!] = m[2]!;
  return roles;
}

export function renderedEdgeRoles(svg: string): Record<string, string> {
  const roles: Record<string, string> = {};
  const re = /<line data-from="([^"]*)" data-to="([^"]*)" data-role="([^"]*)"/g;
  for (const m of svg.matchAll(re)) roles[`${m[1]}->${m[2]}`] = m[3]!;
  return roles;
}

export function renderedTokens(svg: string): Record<string, number> {
  const tokens: Record<string, number> = {};
  const re = /<g data-id="([^"]*)" data-kind="place" data-role="[^"]*" data-tokens="(\d+)"/g;
  for (const m of svg.matchAll(re)) tokens[m[1]!] = Number(m[2]);
  return tokens;
}

export function nodeFill(svg: string, id: string): string | null {
  const re = new RegExp(`<g data-id="${id}"[^>]*>(?:<circle|<rect)[^>]*fill="([^"]*)"`);
  const m = svg.match(re);
  return m ? m[1]! : null;
}

export function edgeStroke(svg: string, from: string, to: string): string | null {
  const re = new RegExp(`<line data-from="${from}" data-to="${to}"[^>]*stroke="([^"]*)"`);
  const m = svg.match(re);
  return m ? m[1]! : null;
}

// A minimal report for exercising single view rules in isolation.
export function syntheticReport(overrides: Partial<AnalysisReport>): AnalysisReport {
  return {
    verdict: "reachable",
    mode: "exact",
    source: "structural",
    soundness: "sound",
    marking: {},
    admissibility: "maximum-admissible",
    mp: [],
    missing: [],
    conflicting: [],
    chosenDelta: null,
    divergingPoints: [],
    divinfo: {},
    reaches: {},
    conflicts: [],
    witness: null,
    roles: {},
    edgeRoles: {},
    notes: [],
    ...overrides,
  };
}
