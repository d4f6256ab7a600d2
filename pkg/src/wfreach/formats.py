"""Input and output formats: native net text, marking literals, PNML, DOT.

The native format is line oriented, one declaration per line:

    # comment
    place p1
    trans t1
    arc p1 t1
    source p1
    sink p7

Dense node indices follow declaration order, so parse(format(net)) preserves
the indexing exactly. PNML ingestion maps document order to the same scheme.
"""

from __future__ import annotations

import enum
import re
import xml.etree.ElementTree as ET

from .netcore import Marking, NetError, PetriNet, WorkflowNet, PLACE, TRANSITION


class FormatError(NetError):
    code = "PARSE_ERROR"

    def __init__(self, message, line=None, col=None):
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if col is not None:
                loc += f", col {col}"
            loc += ": "
        super().__init__(loc + message)
        self.line = line
        self.col = col


class MarkingSyntaxError(NetError):
    code = "BAD_MARKING"


class StructureViolationError(NetError):
    """Raised by the validating parse when the net is not analyzable.

    Carries the full structure report so callers can show every violation.
    """

    code = "STRUCTURE_VIOLATION"

    def __init__(self, report):
        lines = "; ".join(v.message for v in report.violations)
        super().__init__(f"net failed structural validation: {lines}")
        self.report = report


def parse_native(text, validate=True):
    """Parse the native format into a WorkflowNet.

    With validate=True (default) the net must pass structural validation
    (workflow shape, acyclic, free choice); violations raise
    StructureViolationError carrying the report.
    """
    nodes = []
    arcs = []
    source = None
    sink = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0]
        if kw == "place":
            if len(parts) != 2:
                raise FormatError("expected: place <id>", lineno)
            nodes.append((parts[1], PLACE))
        elif kw == "trans":
            if len(parts) != 2:
                raise FormatError("expected: trans <id>", lineno)
            nodes.append((parts[1], TRANSITION))
        elif kw == "arc":
            if len(parts) != 3:
                raise FormatError("expected: arc <from> <to>", lineno)
            arcs.append((parts[1], parts[2]))
        elif kw == "source":
            if len(parts) != 2:
                raise FormatError("expected: source <id>", lineno)
            if source is not None:
                raise FormatError("duplicate source declaration", lineno)
            source = parts[1]
        elif kw == "sink":
            if len(parts) != 2:
                raise FormatError("expected: sink <id>", lineno)
            if sink is not None:
                raise FormatError("duplicate sink declaration", lineno)
            sink = parts[1]
        else:
            raise FormatError(f"unknown directive {kw!r}", lineno, col=raw.index(kw) + 1)
    if source is None:
        raise FormatError("missing source declaration")
    if sink is None:
        raise FormatError("missing sink declaration")
    try:
        net = PetriNet(nodes, arcs)
        wf = WorkflowNet(net, source, sink)
    except NetError as e:
        raise FormatError(str(e)) from e
    if validate:
        _validated(wf)
    return wf


def _validated(wf):
    from . import structure

    report = structure.validate_structure(wf)
    if not report.ok():
        raise StructureViolationError(report)
    return wf


def format_native(wf):
    """Canonical native serialization: nodes in dense order, arcs in arc order."""
    net = wf.net
    out = []
    for i in range(net.n):
        out.append(("place " if net.is_place[i] else "trans ") + net.labels[i])
    for i, j in net.arcs:
        out.append(f"arc {net.labels[i]} {net.labels[j]}")
    out.append("source " + net.labels[wf.source])
    out.append("sink " + net.labels[wf.sink])
    return "\n".join(out) + "\n"


_MARKING_RE = re.compile(r"^\s*\[(.*)\]\s*$", re.S)
_ITEM_RE = re.compile(r"^([^\s^]+)\s*(?:\^\s*(\d+))?$")


def parse_marking(net, text):
    """Parse a marking literal like "[p3,p5,p12^2]" into a Marking."""
    m = _MARKING_RE.match(text)
    if not m:
        raise MarkingSyntaxError(f"marking literal must be bracketed: {text!r}")
    body = m.group(1).strip()
    counts = {}
    if body:
        for item in body.split(","):
            item = item.strip()
            im = _ITEM_RE.match(item)
            if not im:
                raise MarkingSyntaxError(f"bad marking item {item!r}")
            label, cnt = im.group(1), int(im.group(2) or 1)
            if cnt < 1:
                raise MarkingSyntaxError(f"bad token count in {item!r}")
            counts[label] = counts.get(label, 0) + cnt
    return Marking.from_labels(net, counts)


def format_marking(net, marking):
    items = []
    for idx in sorted(marking.counts):
        c = marking.counts[idx]
        items.append(net.labels[idx] + (f"^{c}" if c > 1 else ""))
    return "[" + ",".join(items) + "]"


def _local(tag):
    return tag.rsplit("}", 1)[-1]


def parse_pnml(text, validate=True):
    """Parse a PNML document (single net, unweighted arcs) into a WorkflowNet.

    Source and sink are inferred: the unique place with no incoming arcs and
    the unique place with no outgoing arcs. Anything else is an error.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise FormatError(f"bad XML: {e}") from e

    nets = [el for el in root.iter() if _local(el.tag) == "net"]
    if len(nets) != 1:
        raise FormatError(f"expected exactly one <net>, found {len(nets)}")
    nodes = []
    arcs = []
    for el in nets[0].iter():
        tag = _local(el.tag)
        if tag == "place":
            nid = el.get("id")
            if not nid:
                raise FormatError("place without id")
            nodes.append((nid, PLACE))
        elif tag == "transition":
            nid = el.get("id")
            if not nid:
                raise FormatError("transition without id")
            nodes.append((nid, TRANSITION))
        elif tag == "arc":
            src, tgt = el.get("source"), el.get("target")
            if not src or not tgt:
                raise FormatError(f"arc {el.get('id')!r} missing source/target")
            for sub in el.iter():
                if _local(sub.tag) == "inscription":
                    txt = "".join(t.text or "" for t in sub.iter() if _local(t.tag) == "text")
                    if txt.strip() and txt.strip() != "1":
                        raise FormatError(f"weighted arc {el.get('id')!r} unsupported (weight {txt.strip()})")
            arcs.append((src, tgt))

    try:
        net = PetriNet(nodes, arcs)
    except NetError as e:
        raise FormatError(str(e)) from e

    sources = [i for i in net.places() if net.pre[i] == 0]
    sinks = [i for i in net.places() if net.post[i] == 0]
    if len(sources) != 1:
        raise FormatError(
            f"cannot infer source: {len(sources)} places without inputs "
            f"({', '.join(net.labels[i] for i in sources) or 'none'})"
        )
    if len(sinks) != 1:
        raise FormatError(
            f"cannot infer sink: {len(sinks)} places without outputs "
            f"({', '.join(net.labels[i] for i in sinks) or 'none'})"
        )
    wf = WorkflowNet(net, sources[0], sinks[0])
    if validate:
        _validated(wf)
    return wf


def load_net(text, fmt="auto", validate=True):
    """Parse net text in the given format ("native", "pnml", or "auto")."""
    if fmt == "auto":
        fmt = "pnml" if text.lstrip().startswith("<") else "native"
    if fmt == "pnml":
        return parse_pnml(text, validate=validate)
    if fmt == "native":
        return parse_native(text, validate=validate)
    raise ValueError(f"unknown format {fmt!r}")


class ColorRole(str, enum.Enum):
    """Diagnostic roles attached to nodes and edges for rendering."""

    MARKED = "marked"
    MISSING = "missing"
    CONFLICTING = "conflicting"
    CONFLICT_PATH = "conflict-path"
    DIVERGING_PRIMARY = "diverging-primary"
    DIVERGING_SECONDARY = "diverging-secondary"
    DIVERGING_PLACE = "diverging-place"
    WITNESS_PATH = "witness-path"
    NEUTRAL = "neutral"


# Fixed role -> color table used by the DOT export and the UI.
PALETTE = {
    ColorRole.MARKED: "pink",
    ColorRole.MISSING: "green",
    ColorRole.CONFLICTING: "red",
    ColorRole.CONFLICT_PATH: "orange",
    ColorRole.DIVERGING_PRIMARY: "orange",
    ColorRole.DIVERGING_SECONDARY: "blue",
    ColorRole.DIVERGING_PLACE: "green",
    ColorRole.WITNESS_PATH: "violet",
    ColorRole.NEUTRAL: "white",
}


def _role_of(value):
    if value is None:
        return ColorRole.NEUTRAL
    if isinstance(value, ColorRole):
        return value
    return ColorRole(value)


def export_dot(wf, roles=None, edge_roles=None, name="net"):
    """Render the net as DOT. roles: {label: ColorRole}; edge_roles:
    {(from_label, to_label): ColorRole}. Deterministic output: nodes in
    dense order, edges in declaration order."""
    net = wf.net
    roles = roles or {}
    edge_roles = edge_roles or {}
    lines = [f"digraph {name} {{"]
    lines.append("  // role colors: " + ", ".join(f"{r.value}={PALETTE[r]}" for r in ColorRole))
    lines.append("  rankdir=LR;")
    for i in range(net.n):
        label = net.labels[i]
        shape = "ellipse" if net.is_place[i] else "box"
        attrs = [f'shape={shape}']
        role = _role_of(roles.get(label))
        if role is not ColorRole.NEUTRAL:
            attrs.append(f'style=filled,fillcolor="{PALETTE[role]}"')
        extra = ""
        if i == wf.source:
            extra = ',xlabel="source"'
        elif i == wf.sink:
            extra = ',xlabel="sink"'
        lines.append(f'  "{label}" [{",".join(attrs)}{extra}];')
    for i, j in net.arcs:
        a, b = net.labels[i], net.labels[j]
        role = _role_of(edge_roles.get((a, b)))
        if role is not ColorRole.NEUTRAL:
            lines.append(f'  "{a}" -> "{b}" [color="{PALETTE[role]}",penwidth=2];')
        else:
            lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
