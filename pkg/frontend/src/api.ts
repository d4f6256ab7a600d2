// Typed client for the analysis service. The UI consumes the JSON API and
// nothing else: no verdict, color, or concurrency logic lives on this side.

export type NodeKind = "place" | "transition";

export interface NetNode {
  id: string;
  kind: NodeKind;
  isSource: boolean;
  isSink: boolean;
}

export interface NetEdge {
  from: string;
  to: string;
}

export interface StructureViolation {
  code: string;
  message: string;
  nodes: string[];
}

export interface StructureReport {
  isWorkflow: boolean;
  isProper: boolean;
  isAcyclic: boolean;
  isSimpleFreeChoice: boolean;
  isExtendedFreeChoice: boolean;
  violations: StructureViolation[];
  cycle: string[] | null;
}

export interface NetGraph {
  netId: string;
  nodes: NetNode[];
  edges: NetEdge[];
  structureReport: StructureReport;
  soundness: string;
}

export interface UploadResult {
  netId: string;
  structureReport: StructureReport;
  soundness: string;
}

export type Marking = Record<string, number>;
export type Mode = "exact" | "cover";

export interface ConflictInfo {
  x: string;
  y: string;
  kind: string;
  path: string[] | null;
  path2: string[] | null;
  decision: string | null;
}

export interface Witness {
  sequence: string[];
  markings: Marking[];
  subnet: { nodes: string[]; edges: [string, string][] };
}

export interface AnalysisReport {
  verdict: string;
  mode: Mode;
  source: string;
  soundness: string;
  marking: Marking;
  admissibility: string;
  mp: string[];
  missing: string[];
  conflicting: string[];
  chosenDelta: string | null;
  divergingPoints: string[];
  divinfo: Record<string, string[]>;
  reaches: Record<string, string[]>;
  conflicts: ConflictInfo[];
  witness: Witness | null;
  roles: Record<string, string>;
  edgeRoles: Record<string, string>;
  notes: string[];
}

// The few bits of fetch() the client relies on, so tests can stub it
// without a network or a DOM.
export interface HttpResponse {
  status: number;
  text(): Promise<string>;
}

export interface RequestOptions {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
  signal?: AbortSignal;
}

export type FetchLike = (url: string, init?: RequestOptions) => Promise<HttpResponse>;

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, code: string, message: string, detail?: unknown) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.detail = detail;
  }
}

function defaultFetch(): FetchLike {
  if (typeof fetch !== "function") {
    throw new Error("no fetch available; pass one to the Client constructor");
  }
  return (url, init) => fetch(url, init);
}

async function parseBody(res: HttpResponse): Promise<unknown> {
  const text = await res.text();
  if (!text) return null;
  try {
    return JSON.parse(text);
  } catch {
    return text;
  }
}

// Error payloads are {"error": {"code", "message", ...}}; surface them
// verbatim so the page can show the service's own violation codes.
function toApiError(status: number, body: unknown): ApiError {
  if (body && typeof body === "object" && "error" in body) {
    const err = (body as { error: { code?: string; message?: string } }).error;
    return new ApiError(status, err.code ?? `HTTP_${status}`, err.message ?? "request failed", body);
  }
  return new ApiError(status, `HTTP_${status}`, typeof body === "string" ? body : "request failed", body);
}

export class Client {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = defaultFetch(),
  ) {}

  private async request(path: string, init?: RequestOptions): Promise<unknown> {
    const res = await this.fetchImpl(this.baseUrl + path, init);
    const body = await parseBody(res);
    if (res.status < 200 || res.status >= 300) {
      throw toApiError(res.status, body);
    }
    return body;
  }

  uploadNet(text: string): Promise<UploadResult> {
    return this.request("/api/nets", {
      method: "POST",
      headers: { "content-type": "text/plain" },
      body: text,
    }) as Promise<UploadResult>;
  }

  getNet(netId: string): Promise<NetGraph> {
    return this.request(`/api/nets/${netId}`) as Promise<NetGraph>;
  }

  analyze(netId: string, marking: Marking, mode: Mode, signal?: AbortSignal): Promise<AnalysisReport> {
    return this.request(`/api/nets/${netId}/analyze`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ marking, mode }),
      signal,
    }) as Promise<AnalysisReport>;
  }

  witness(netId: string, marking: Marking, mode: Mode, signal?: AbortSignal): Promise<AnalysisReport> {
    return this.request(`/api/nets/${netId}/witness`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ marking, mode }),
      signal,
    }) as Promise<AnalysisReport>;
  }

  concurrency(netId: string): Promise<Record<string, string[]>> {
    return this.request(`/api/nets/${netId}/concurrency`) as Promise<Record<string, string[]>>;
  }
}
