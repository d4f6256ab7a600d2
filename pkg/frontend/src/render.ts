// Pure view code: everything here turns server responses into strings.
// Node and edge colors come from AnalysisReport.roles / .edgeRoles and from
// nowhere else — the client never re-derives a verdict or a diagnostic.

import type { AnalysisReport, ConflictInfo, Marking, NetGraph } from "./api.js";
import type { Layout } from "./layout.js";

// Mirror of the service's role -> color table (also embedded in its DOT
// export); all values are valid CSS color names.
export const PALETTE: Record<string, string> = {
  marked: "pink",
  missing: "green",
  conflicting: "red",
  "conflict-path": "orange",
  "diverging-primary": "orange",
  "diverging-secondary": "blue",
  "diverging-place": "green",
  "witness-path": "violet",
  neutral: "white",
};

export function roleColor(role: string): string {
  return PALETTE[role] ?? PALETTE["neutral"]!;
}

// Role for each node: exactly what the report says, neutral otherwise.
export function nodeRoles(graph: NetGraph, report: AnalysisReport | null): Record<string, string> {
  const roles: Record<string, string> = {};
  for (const n of graph.nodes) {
    roles[n.id] = report?.roles[n.id] ?? "neutral";
  }
  return roles;
}

export function edgeRoleOf(report: AnalysisReport | null, from: string, to: string): string {
  return report?.edgeRoles[`${from}->${to}`] ?? "neutral";
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface RenderView {
  // tokens drawn on places: the live selection, or a replay step
  marking: Marking;
  report: AnalysisReport | null;
}

const PLACE_R = 16;
const TRANS_W = 30;
const TRANS_H = 30;

export function renderSvg(graph: NetGraph, layout: Layout, view: RenderView): string {
  const roles = nodeRoles(graph, view.report);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${layout.width} ${layout.height}" ` +
      `width="${layout.width}" height="${layout.height}" data-net="${esc(graph.netId)}">`,
  );
  parts.push(
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" ` +
      `markerHeight="7" orient="auto-start-reverse">` +
      `<path d="M 0 0 L 10 5 L 0 10 z" fill="#444"/></marker></defs>`,
  );

  for (const e of graph.edges) {
    const a = layout.nodes.get(e.from);
    const b = layout.nodes.get(e.to);
    if (!a || !b) continue;
    const role = edgeRoleOf(view.report, e.from, e.to);
    const stroke = role === "neutral" ? "#888" : roleColor(role);
    const width = role === "neutral" ? 1 : 2.5;
    // trim the line so the arrowhead stops at the node border
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const len = Math.hypot(dx, dy) || 1;
    const pad = PLACE_R + 4;
    const x1 = a.x + (dx / len) * pad;
    const y1 = a.y + (dy / len) * pad;
    const x2 = b.x - (dx / len) * pad;
    const y2 = b.y - (dy / len) * pad;
    parts.push(
      `<line data-from="${esc(e.from)}" data-to="${esc(e.to)}" data-role="${esc(role)}" ` +
        `x1="${x1.toFixed(1)}" y1="${y1.toFixed(1)}" x2="${x2.toFixed(1)}" y2="${y2.toFixed(1)}" ` +
        `stroke="${stroke}" stroke-width="${width}" marker-end="url(#arrow)"/>`,
    );
  }

  for (const n of graph.nodes) {
    const pos = layout.nodes.get(n.id);
    if (!pos) continue;
    const role = roles[n.id] ?? "neutral";
    const fill = roleColor(role);
    const tokens = view.marking[n.id] ?? 0;
    const shared =
      `data-id="${esc(n.id)}" data-kind="${n.kind}" data-role="${esc(role)}" ` +
      `data-tokens="${n.kind === "place" ? tokens : 0}"`;
    if (n.kind === "place") {
      parts.push(
        `<g ${shared} class="node place${n.isSource ? " source" : ""}${n.isSink ? " sink" : ""}">` +
          `<circle cx="${pos.x}" cy="${pos.y}" r="${PLACE_R}" fill="${fill}" stroke="#333" stroke-width="1.5"/>` +
          tokenGlyph(pos.x, pos.y, tokens) +
          `<text x="${pos.x}" y="${pos.y + PLACE_R + 14}" text-anchor="middle" font-size="11">${esc(n.id)}</text>` +
          `</g>`,
      );
    } else {
      parts.push(
        `<g ${shared} class="node transition">` +
          `<rect x="${pos.x - TRANS_W / 2}" y="${pos.y - TRANS_H / 2}" width="${TRANS_W}" height="${TRANS_H}" ` +
          `fill="${fill}" stroke="#333" stroke-width="1.5"/>` +
          `<text x="${pos.x}" y="${pos.y + TRANS_H / 2 + 14}" text-anchor="middle" font-size="11">${esc(n.id)}</text>` +
          `</g>`,
      );
    }
  }

  parts.push("</svg>");
  return parts.join("");
}

function tokenGlyph(cx: number, cy: number, tokens: number): string {
  if (tokens <= 0) return "";
  if (tokens === 1) {
    return `<circle cx="${cx}" cy="${cy}" r="5" fill="#222"/>`;
  }
  return `<text x="${cx}" y="${cy + 4}" text-anchor="middle" font-size="12" font-weight="bold">${tokens}</text>`;
}

// Banner wording: admissibility first while the marking is still short of
// maximum, then the verdict word. Matches the text output of the CLI.
export function bannerText(report: AnalysisReport | null): string {
  if (report === null) return "select places to analyze";
  if (report.admissibility === "not-admissible") return "not admissible";
  if (report.admissibility === "admissible") return "admissible — not maximum";
  switch (report.verdict) {
    case "reachable":
      return "reachable";
    case "coverable":
      return "coverable";
    default:
      return "not reachable";
  }
}

export function conflictLine(c: ConflictInfo): string {
  if (c.kind === "forward-path" || c.kind === "backward-path") {
    const path = (c.path ?? []).join(" -> ");
    return `${c.x} and ${c.y} are never marked together: ${path}`;
  }
  if (c.kind === "unsafe-multiplicity") {
    return `${c.x} cannot hold more than one token (sound nets are safe)`;
  }
  if (c.decision !== null) {
    const p1 = c.path ? c.path.join(" -> ") : "?";
    const p2 = c.path2 ? c.path2.join(" -> ") : "?";
    return `the choice at ${c.decision} separates ${c.x} from ${c.y}: ${p1} vs ${p2}`;
  }
  return `${c.x} and ${c.y} exclude each other`;
}

function listItems(labels: string[]): string {
  return labels.map((l) => `<li>${esc(l)}</li>`).join("");
}

export function renderSidePanel(report: AnalysisReport | null): string {
  if (report === null) {
    return `<p class="hint">Toggle tokens on places; the verdict updates as you go.</p>`;
  }
  const rows: string[] = [];
  rows.push(`<dl class="facts">`);
  rows.push(`<dt>verdict</dt><dd data-field="verdict">${esc(report.verdict)}</dd>`);
  rows.push(`<dt>admissibility</dt><dd data-field="admissibility">${esc(report.admissibility)}</dd>`);
  rows.push(`<dt>mode</dt><dd>${esc(report.mode)}</dd>`);
  if (report.chosenDelta !== null) {
    rows.push(`<dt>diverging transition</dt><dd data-field="chosenDelta">${esc(report.chosenDelta)}</dd>`);
  }
  rows.push(`</dl>`);
  if (report.missing.length) {
    rows.push(`<h3>missing</h3><ul data-field="missing">${listItems(report.missing)}</ul>`);
  }
  if (report.conflicting.length) {
    rows.push(`<h3>conflicting</h3><ul data-field="conflicting">${listItems(report.conflicting)}</ul>`);
  }
  for (const c of report.conflicts) {
    rows.push(`<p class="conflict" data-field="conflict">${esc(conflictLine(c))}</p>`);
  }
  for (const note of report.notes) {
    rows.push(`<p class="note">${esc(note)}</p>`);
  }
  return rows.join("");
}

export function renderError(error: { code: string; message: string } | null): string {
  if (error === null) return "";
  return `<p class="error" data-code="${esc(error.code)}">${esc(error.code)}: ${esc(error.message)}</p>`;
}
