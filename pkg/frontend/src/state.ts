// View state and the interaction loop. The controller owns the selected
// marking, debounces re-analysis while the user is still clicking (200 ms),
// keeps at most one request in flight (superseding aborts the old one), and
// tracks the replay cursor into a witness. No analysis logic lives here —
// every verdict, role, and diagnostic is read off the server's report.

import type { AnalysisReport, Marking, Mode, NetGraph } from "./api.js";
import { ApiError } from "./api.js";

export interface AnalysisApi {
  uploadNet(text: string): Promise<{ netId: string }>;
  getNet(netId: string): Promise<NetGraph>;
  analyze(netId: string, marking: Marking, mode: Mode, signal?: AbortSignal): Promise<AnalysisReport>;
  witness(netId: string, marking: Marking, mode: Mode, signal?: AbortSignal): Promise<AnalysisReport>;
}

export interface Scheduler {
  set(fn: () => void, ms: number): unknown;
  clear(handle: unknown): void;
}

export const realScheduler: Scheduler = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
};

export interface UiError {
  code: string;
  message: string;
}

export interface ViewState {
  net: NetGraph | null;
  marking: Marking;
  mode: Mode;
  report: AnalysisReport | null;
  // true from the first toggle until the (debounced) answer lands
  pending: boolean;
  replayIndex: number | null;
  error: UiError | null;
}

export interface ControllerOptions {
  debounceMs?: number;
  scheduler?: Scheduler;
  mode?: Mode;
}

export type Listener = (state: ViewState) => void;

const DEBOUNCE_MS = 200;

function toUiError(e: unknown): UiError {
  if (e instanceof ApiError) return { code: e.code, message: e.message };
  return { code: "CLIENT_ERROR", message: e instanceof Error ? e.message : String(e) };
}

export class Controller {
  private readonly api: AnalysisApi;
  private readonly scheduler: Scheduler;
  private readonly debounceMs: number;
  private readonly listeners: Listener[] = [];

  private timer: unknown = null;
  private inflight: AbortController | null = null;
  // bumped on every toggle/issue so a late response can't clobber newer state
  private requestSeq = 0;

  state: ViewState;

  constructor(api: AnalysisApi, options: ControllerOptions = {}) {
    this.api = api;
    this.scheduler = options.scheduler ?? realScheduler;
    this.debounceMs = options.debounceMs ?? DEBOUNCE_MS;
    this.state = {
      net: null,
      marking: {},
      mode: options.mode ?? "exact",
      report: null,
      pending: false,
      replayIndex: null,
      error: null,
    };
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      const at = this.listeners.indexOf(fn);
      if (at >= 0) this.listeners.splice(at, 1);
    };
  }

  private notify(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  private invalidate(): void {
    this.requestSeq += 1;
    if (this.timer !== null) {
      this.scheduler.clear(this.timer);
      this.timer = null;
    }
    if (this.inflight !== null) {
      this.inflight.abort();
      this.inflight = null;
    }
  }

  async loadNetText(text: string): Promise<void> {
    this.invalidate();
    try {
      const up = await this.api.uploadNet(text);
      const net = await this.api.getNet(up.netId);
      this.setNet(net);
    } catch (e) {
      this.state = { ...this.state, error: toUiError(e), pending: false };
      this.notify();
      throw e;
    }
  }

  setNet(net: NetGraph): void {
    this.invalidate();
    this.state = {
      net,
      marking: {},
      mode: this.state.mode,
      report: null,
      pending: false,
      replayIndex: null,
      error: null,
    };
    this.notify();
  }

  // Toggle one token on a place. The stale report is dropped immediately;
  // the re-analysis request goes out once the clicks pause for debounceMs.
  togglePlace(id: string): void {
    const net = this.state.net;
    if (!net) return;
    const node = net.nodes.find((n) => n.id === id);
    if (!node || node.kind !== "place") return;

    const marking: Marking = { ...this.state.marking };
    if (marking[id]) {
      delete marking[id];
    } else {
      marking[id] = 1;
    }
    this.invalidate();
    const empty = Object.keys(marking).length === 0;
    this.state = {
      ...this.state,
      marking,
      report: null,
      replayIndex: null,
      error: null,
      pending: !empty,
    };
    if (!empty) {
      this.timer = this.scheduler.set(() => {
        this.timer = null;
        void this.issueAnalysis();
      }, this.debounceMs);
    }
    this.notify();
  }

  setMode(mode: Mode): void {
    if (mode === this.state.mode) return;
    this.invalidate();
    const rerun = this.state.net !== null && Object.keys(this.state.marking).length > 0;
    this.state = { ...this.state, mode, report: null, replayIndex: null, error: null, pending: rerun };
    if (rerun) {
      this.timer = this.scheduler.set(() => {
        this.timer = null;
        void this.issueAnalysis();
      }, this.debounceMs);
    }
    this.notify();
  }

  private async issueAnalysis(): Promise<void> {
    const net = this.state.net;
    if (!net) return;
    if (this.inflight !== null) this.inflight.abort();
    const ctl = new AbortController();
    this.inflight = ctl;
    const seq = ++this.requestSeq;
    try {
      const report = await this.api.analyze(net.netId, this.state.marking, this.state.mode, ctl.signal);
      if (seq !== this.requestSeq) return; // superseded while we waited
      this.inflight = null;
      this.state = { ...this.state, report, pending: false, error: null };
      this.notify();
    } catch (e) {
      if (seq !== this.requestSeq || ctl.signal.aborted) return;
      this.inflight = null;
      this.state = { ...this.state, report: null, pending: false, error: toUiError(e) };
      this.notify();
    }
  }

  replayAvailable(): boolean {
    const r = this.state.report;
    return r !== null && r.verdict !== "not-reachable";
  }

  // Enter replay mode at step 0; fetches the witness lazily if the current
  // report came without one.
  async startReplay(): Promise<void> {
    const net = this.state.net;
    const report = this.state.report;
    if (!net || !report || !this.replayAvailable()) return;
    if (report.witness === null) {
      const seq = ++this.requestSeq;
      try {
        const full = await this.api.witness(net.netId, report.marking, report.mode);
        if (seq !== this.requestSeq) return;
        this.state = { ...this.state, report: full };
      } catch (e) {
        if (seq !== this.requestSeq) return;
        this.state = { ...this.state, error: toUiError(e) };
        this.notify();
        return;
      }
    }
    if (this.state.report?.witness) {
      this.state = { ...this.state, replayIndex: 0 };
    }
    this.notify();
  }

  stepReplay(delta: number): void {
    const witness = this.state.report?.witness;
    if (!witness || this.state.replayIndex === null) return;
    const last = witness.markings.length - 1;
    const next = Math.min(last, Math.max(0, this.state.replayIndex + delta));
    this.state = { ...this.state, replayIndex: next };
    this.notify();
  }

  stopReplay(): void {
    if (this.state.replayIndex === null) return;
    this.state = { ...this.state, replayIndex: null };
    this.notify();
  }

  // What the diagram should show: the replay step while replaying,
  // otherwise the user's selection.
  displayedMarking(): Marking {
    const { report, replayIndex } = this.state;
    if (replayIndex !== null && report?.witness) {
      return report.witness.markings[replayIndex] ?? {};
    }
    return this.state.marking;
  }
}
