"""Structural checks and orderings.

validate_structure reports (rather than raises) the workflow-net shape
conditions, properness, acyclicity, and both free-choice properties, so a
caller can show every violation at once. The analysis pipeline requires
report.ok(): workflow + proper + acyclic + extended free choice (simple
free choice implies extended; extended-only nets are rewritten by
to_simple_free_choice before analysis).
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

from .netcore import PetriNet, WorkflowNet, bits, mask_of, PLACE, TRANSITION


@dataclass
class Violation:
    code: str
    message: str
    nodes: list = field(default_factory=list)


@dataclass
class StructureReport:
    is_workflow: bool
    is_proper: bool
    is_acyclic: bool
    is_simple_fc: bool
    is_extended_fc: bool
    violations: list
    cycle: list | None = None

    def ok(self):
        """True when the net is analyzable (after the simple-FC rewrite if needed)."""
        return self.is_workflow and self.is_proper and self.is_acyclic and self.is_extended_fc

    def to_json_dict(self):
        return {
            "isWorkflow": self.is_workflow,
            "isProper": self.is_proper,
            "isAcyclic": self.is_acyclic,
            "isSimpleFreeChoice": self.is_simple_fc,
            "isExtendedFreeChoice": self.is_extended_fc,
            "violations": [
                {"code": v.code, "message": v.message, "nodes": v.nodes} for v in self.violations
            ],
            "cycle": self.cycle,
        }


def _forward_reach(net, start):
    seen = 1 << start
    todo = [start]
    while todo:
        x = todo.pop()
        rest = net.post[x] & ~seen
        seen |= rest
        todo.extend(bits(rest))
    return seen


def _backward_reach(net, start):
    seen = 1 << start
    todo = [start]
    while todo:
        x = todo.pop()
        rest = net.pre[x] & ~seen
        seen |= rest
        todo.extend(bits(rest))
    return seen


def validate_structure(wf):
    net = wf.net
    violations = []

    is_workflow = True
    if net.pre[wf.source]:
        is_workflow = False
        violations.append(
            Violation(
                "WF_SOURCE_HAS_PRESET",
                f"source {net.labels[wf.source]!r} has incoming arcs",
                net.to_labels(net.pre[wf.source]),
            )
        )
    if net.post[wf.sink]:
        is_workflow = False
        violations.append(
            Violation(
                "WF_SINK_HAS_POSTSET",
                f"sink {net.labels[wf.sink]!r} has outgoing arcs",
                net.to_labels(net.post[wf.sink]),
            )
        )
    on_path = _forward_reach(net, wf.source) & _backward_reach(net, wf.sink)
    stranded = mask_of(range(net.n)) & ~on_path
    if stranded:
        is_workflow = False
        violations.append(
            Violation(
                "WF_NOT_CONNECTED",
                "nodes not on any source-to-sink path: " + ", ".join(net.to_labels(stranded)),
                net.to_labels(stranded),
            )
        )

    is_proper = True
    for t in net.transitions():
        if not net.pre[t]:
            is_proper = False
            violations.append(
                Violation("WF_TRANSITION_EMPTY_PRESET", f"transition {net.labels[t]!r} has no inputs", [net.labels[t]])
            )
        if not net.post[t]:
            is_proper = False
            violations.append(
                Violation("WF_TRANSITION_EMPTY_POSTSET", f"transition {net.labels[t]!r} has no outputs", [net.labels[t]])
            )

    acyclic, cycle = is_acyclic(net)
    if not acyclic:
        violations.append(
            Violation("NOT_ACYCLIC", "net contains a cycle: " + " -> ".join(cycle), cycle)
        )

    simple, simple_viol = check_simple_free_choice(net)
    extended, ext_viol = check_extended_free_choice(net)
    if not simple:
        violations.extend(simple_viol)
    if not extended:
        violations.extend(ext_viol)

    return StructureReport(
        is_workflow=is_workflow,
        is_proper=is_proper,
        is_acyclic=acyclic,
        is_simple_fc=simple,
        is_extended_fc=extended,
        violations=violations,
        cycle=cycle,
    )


def is_acyclic(net):
    """Kahn's algorithm. Returns (True, None) or (False, shortest cycle witness).

    The witness is a closed label sequence v, ..., v of minimal length.
    """
    indeg = [len(list(bits(net.pre[i]))) for i in range(net.n)]
    ready = [i for i in range(net.n) if indeg[i] == 0]
    removed = 0
    seen = list(ready)
    while seen:
        x = seen.pop()
        removed += 1
        for s in bits(net.post[x]):
            indeg[s] -= 1
            if indeg[s] == 0:
                seen.append(s)
    if removed == net.n:
        return True, None

    leftover = mask_of(i for i in range(net.n) if indeg[i] > 0)
    best = None
    for start in bits(leftover):
        # BFS back to start inside the leftover subgraph
        parent = {start: None}
        q = deque([start])
        found = None
        while q and found is None:
            x = q.popleft()
            for s in bits(net.post[x] & leftover):
                if s == start:
                    found = x
                    break
                if s not in parent:
                    parent[s] = x
                    q.append(s)
        if found is not None:
            path = [start]
            node = found
            rev = []
            while node is not None:
                rev.append(node)
                node = parent[node]
            path = list(reversed(rev)) + [start]
            if best is None or len(path) < len(best):
                best = path
    return False, [net.labels[i] for i in best]


def check_simple_free_choice(net):
    """Every place with two or more consumers must be its consumers' whole preset."""
    violations = []
    for p in net.places():
        consumers = net.post[p]
        if consumers.bit_count() < 2:
            continue
        for t in bits(consumers):
            if net.pre[t] != 1 << p:
                violations.append(
                    Violation(
                        "FC_SIMPLE_VIOLATION",
                        f"place {net.labels[p]!r} has multiple consumers but {net.labels[t]!r} "
                        f"has preset {{{', '.join(net.to_labels(net.pre[t]))}}}",
                        [net.labels[p], net.labels[t]],
                    )
                )
    return not violations, violations


def check_extended_free_choice(net):
    """Transitions that share any input place must share all of them."""
    violations = []
    for p in net.places():
        consumers = list(bits(net.post[p]))
        for a, b in zip(consumers, consumers[1:]):
            if net.pre[a] != net.pre[b]:
                violations.append(
                    Violation(
                        "FC_EXTENDED_VIOLATION",
                        f"transitions {net.labels[a]!r} and {net.labels[b]!r} share input "
                        f"{net.labels[p]!r} but have different presets",
                        [net.labels[p], net.labels[a], net.labels[b]],
                    )
                )
    return not violations, violations


def to_simple_free_choice(wf):
    """Rewrite an extended-free-choice net into a simple-free-choice one.

    Every cluster of transitions sharing a multi-place preset is routed
    through one fresh transition and place: {S} -> tau -> mid -> each t.
    Returns (new WorkflowNet, inserted) where inserted maps each fresh label
    to ("tau"|"mid", [original transition labels of its cluster]).
    """
    net = wf.net
    ok, viol = check_extended_free_choice(net)
    if not ok:
        raise ValueError("net is not extended free-choice: " + viol[0].message)

    clusters = {}
    for t in net.transitions():
        pre = net.pre[t]
        if pre.bit_count() >= 2:
            clusters.setdefault(pre, []).append(t)
    clusters = {pre: ts for pre, ts in clusters.items() if len(ts) >= 2}
    if not clusters:
        return wf, {}

    nodes = [(net.labels[i], PLACE if net.is_place[i] else TRANSITION) for i in range(net.n)]
    rewired = {}  # transition idx -> mid label
    dropped = set()  # (i, j) arcs to remove
    new_arcs = []
    inserted = {}
    taken = set(net.labels)

    def fresh(base):
        name = base
        k = 2
        while name in taken:
            name = f"{base}{k}"
            k += 1
        taken.add(name)
        return name

    for pre in sorted(clusters, key=lambda m: min(clusters[m])):
        ts = clusters[pre]
        cluster_labels = [net.labels[t] for t in ts]
        base = "_".join(cluster_labels)
        tau = fresh(base + "_tau")
        mid = fresh(base + "_mid")
        nodes.append((tau, TRANSITION))
        nodes.append((mid, PLACE))
        inserted[tau] = ("tau", cluster_labels)
        inserted[mid] = ("mid", cluster_labels)
        for s in bits(pre):
            new_arcs.append((net.labels[s], tau))
        new_arcs.append((tau, mid))
        for t in ts:
            for s in bits(pre):
                dropped.add((s, t))
            rewired[t] = mid
            new_arcs.append((mid, net.labels[t]))

    arcs = [(net.labels[i], net.labels[j]) for i, j in net.arcs if (i, j) not in dropped]
    arcs.extend(new_arcs)
    new_net = PetriNet(nodes, arcs)
    return WorkflowNet(new_net, net.labels[wf.source], net.labels[wf.sink]), inserted


@dataclass
class TopoOrder:
    """Reverse topological order (sink side first) plus forward numbering.

    order[k] lists nodes with every node after all of its successors;
    ordernr[x] is a bijection onto 0..n-1 with ordernr[a] < ordernr[b] for
    every arc (a, b), so the sink carries the maximal number.
    """

    order: list
    ordernr: list


def reverse_topological_order(net):
    """Deterministic reverse topological order; ties broken by dense index."""
    outdeg = [net.post[i].bit_count() for i in range(net.n)]
    heap = [i for i in range(net.n) if outdeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        x = heapq.heappop(heap)
        order.append(x)
        for p in bits(net.pre[x]):
            outdeg[p] -= 1
            if outdeg[p] == 0:
                heapq.heappush(heap, p)
    if len(order) != net.n:
        raise ValueError("net is cyclic; no topological order exists")
    ordernr = [0] * net.n
    for k, x in enumerate(order):
        ordernr[x] = net.n - 1 - k
    return TopoOrder(order=order, ordernr=ordernr)


def compute_has_path(net, topo=None):
    """HasPath(x) = {x} plus every node reachable from x, as masks.

    Accumulated over the reverse topological order: each node folds in its
    successors' sets, so the whole table is one linear sweep.
    """
    if topo is None:
        topo = reverse_topological_order(net)
    hp = [0] * net.n
    for x in topo.order:
        m = 1 << x
        for s in bits(net.post[x]):
            m |= hp[s]
        hp[x] = m
    return hp
