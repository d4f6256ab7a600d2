"""Concurrency relation and admissibility.

determine_concurrency builds the full relation in one pass over the
transitions' output pairs: whenever two nodes are put into parallel branches
by the same transition, everything only one branch can reach is concurrent
to everything only the other branch can reach. Sets are int bitmasks, so the
inner updates are single mask operations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .netcore import Marking, MarkingError, bits
from .structure import compute_has_path


class ConcurrencyRelation:
    """Per-node concurrency masks. Transitions accumulate entries internally
    (the propagation needs them) but only place pairs are meaningful, so the
    public accessors mask places."""

    def __init__(self, wf, masks):
        self._wf = wf
        self.masks = masks

    def concurrent(self, x, y):
        return bool((self.masks[x] >> y) & 1)

    def places_of(self, x):
        """Mask of places concurrent to node x."""
        return self.masks[x] & self._wf.place_mask

    def place_pairs(self):
        """All unordered concurrent place pairs, as index tuples x < y."""
        out = []
        for x in self._wf.places():
            for y in bits(self.places_of(x)):
                if y > x:
                    out.append((x, y))
        return out


def determine_concurrency(wf, haspath=None):
    net = wf.net
    if haspath is None:
        haspath = compute_has_path(net)
    rel = [0] * net.n

    # siblings: for each node, the other outputs of each producing transition
    siblings = {}
    for t in net.transitions():
        outs = net.post[t]
        if outs.bit_count() < 2:
            continue
        for x in bits(outs):
            siblings[x] = siblings.get(x, 0) | (outs & ~(1 << x))

    for x in sorted(siblings):
        hx = haspath[x]
        for y in bits(siblings[x]):
            hy = haspath[y]
            only_x = hx & ~hy
            for a in bits(only_x):
                rel[a] |= hy & ~haspath[a]
    return ConcurrencyRelation(wf, rel)


MAXIMUM_ADMISSIBLE = "maximum-admissible"
ADMISSIBLE = "admissible"
NOT_ADMISSIBLE = "not-admissible"


@dataclass
class AdmissibilityResult:
    verdict: str
    mp: int  # the tightest concurrency-closed superset of the support
    missing: int  # mp minus support
    conflicting: int  # support members that break admissibility
    unsafe: int  # places requested with multiplicity >= 2


def check_admissibility(wf, rel, marking):
    """Intersection of ||(x) u {x} over the marked places, compared with the
    support. Multiplicities >= 2 can never be reached in a safe net, so they
    are conflicting by themselves."""
    if isinstance(marking, dict):
        marking = Marking(wf.net, marking)
    if not marking.counts:
        raise MarkingError("empty marking: nothing to analyze")
    support = marking.support
    mp = wf.place_mask
    for x in bits(support):
        mp &= rel.masks[x] | (1 << x)
    unsafe = 0
    for p, c in marking.counts.items():
        if c >= 2:
            unsafe |= 1 << p
    missing = mp & ~support
    conflicting = (support & ~mp) | unsafe
    if conflicting:
        return AdmissibilityResult(NOT_ADMISSIBLE, mp, missing, conflicting, unsafe)
    if missing:
        return AdmissibilityResult(ADMISSIBLE, mp, missing, 0, 0)
    return AdmissibilityResult(MAXIMUM_ADMISSIBLE, mp, 0, 0, 0)


FORWARD_PATH = "forward-path"
BACKWARD_PATH = "backward-path"
EXCLUSIVE = "exclusive"
UNSAFE_MULTIPLICITY = "unsafe-multiplicity"


@dataclass
class ConflictExplanation:
    """Why two places can never be marked together.

    kind forward-path/backward-path: `path` walks from one place to the
    other. kind exclusive: `decision` is the place whose choice separates
    them and path/path2 are the node-disjoint routes to x and y.
    """

    x: int
    y: int
    kind: str
    path: list | None = None
    path2: list | None = None
    decision: int | None = None


def shortest_path(net, start, goal):
    """BFS shortest node path start..goal following the flow, or None."""
    if start == goal:
        return [start]
    parent = {start: None}
    q = deque([start])
    while q:
        v = q.popleft()
        for s in bits(net.post[v]):
            if s in parent:
                continue
            parent[s] = v
            if s == goal:
                path = [s]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return list(reversed(path))
            q.append(s)
    return None


def _two_disjoint_paths(net, delta, x, y):
    """Two node-disjoint paths from delta's outputs to x and y (sharing only
    delta). Unit-capacity max flow on the node-split graph, two augmenting
    runs. Returns (path_to_x, path_to_y) as node lists starting at outputs
    of delta, or None."""
    SINK = -1
    # residual edges: dict node -> dict succ -> capacity; nodes are
    # (idx, "in"/"out") tuples plus SINK; delta contributes only its out side.
    cap = {}

    def add(a, b, c):
        cap.setdefault(a, {})[b] = c
        cap.setdefault(b, {}).setdefault(a, 0)

    add((delta, "out"), (delta, "out"), 0)  # ensure key exists
    for v in range(net.n):
        if v == delta:
            continue
        add((v, "in"), (v, "out"), 1)
    for a, b in net.arcs:
        src = (a, "out")
        add(src, (b, "in"), 1)
    add((x, "out"), SINK, 1)
    add((y, "out"), SINK, 1)

    def augment():
        src = (delta, "out")
        parent = {src: None}
        q = deque([src])
        while q:
            v = q.popleft()
            if v == SINK:
                break
            for w in sorted(cap.get(v, ()), key=repr):
                if cap[v][w] > 0 and w not in parent:
                    parent[w] = v
                    q.append(w)
        if SINK not in parent:
            return False
        v = SINK
        while parent[v] is not None:
            u = parent[v]
            cap[u][v] -= 1
            cap[v][u] += 1
            v = u
        return True

    if not (augment() and augment()):
        return None

    # decompose: walk saturated edges from delta twice
    paths = []
    used = set()
    for _ in range(2):
        path = []
        v = (delta, "out")
        while v != SINK:
            nxt = None
            for w, c in cap[v].items():
                if w == v or w in used:
                    continue
                # a saturated forward edge has residual on the reverse side
                if c == 0 and cap.get(w, {}).get(v, 0) > 0 and (w == SINK or isinstance(w, tuple)):
                    nxt = w
                    break
            if nxt is None:
                return None
            if nxt != SINK:
                used.add(nxt)
                if nxt[1] == "in":
                    path.append(nxt[0])
            v = nxt
        paths.append(path)
    a, b = paths
    if a and a[-1] == y:
        a, b = b, a
    if not a or not b or a[-1] != x or b[-1] != y:
        return None
    return a, b


def classify_conflict(wf, haspath, rel, x, y, diverge_fn=None, ordernr=None):
    """Explain why places x and y are not concurrent: a path one way, a path
    the other way, or an exclusive choice at a decision place. Among several
    candidate decision places, the one closest to the pair (largest ordernr)
    wins; without an ordernr, the shortest pair of disjoint paths wins."""
    net = wf.net
    if (haspath[x] >> y) & 1:
        return ConflictExplanation(x, y, FORWARD_PATH, path=shortest_path(net, x, y))
    if (haspath[y] >> x) & 1:
        return ConflictExplanation(x, y, BACKWARD_PATH, path=shortest_path(net, y, x))

    if diverge_fn is not None:
        dp = diverge_fn((1 << x) | (1 << y))
        candidates = list(bits(dp & wf.place_mask))
        if ordernr is not None:
            for d in sorted(candidates, key=lambda d: -ordernr[d]):
                pair = _two_disjoint_paths(net, d, x, y)
                if pair is not None:
                    return ConflictExplanation(x, y, EXCLUSIVE, path=pair[0], path2=pair[1], decision=d)
        else:
            best = None
            for d in candidates:
                pair = _two_disjoint_paths(net, d, x, y)
                if pair is not None:
                    if best is None or len(pair[0]) + len(pair[1]) < len(best[1][0]) + len(best[1][1]):
                        best = (d, pair)
            if best is not None:
                decision, (px, py) = best
                return ConflictExplanation(x, y, EXCLUSIVE, path=px, path2=py, decision=decision)
    return ConflictExplanation(x, y, EXCLUSIVE, decision=None)
