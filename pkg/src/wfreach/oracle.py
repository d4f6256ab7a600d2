"""State-space oracle: the token game, an explicit explorer, and brute-force
baselines for every structural algorithm.

Everything here is deliberately definition-literal and independent of the
fast analysis modules, so the two routes can be compared against each other
in tests. The explorer is capped (default 1e6 states, WFREACH_CAP overrides)
and raises CapExceeded rather than degrading silently.
"""

from __future__ import annotations

import os
import random
from collections import deque
from dataclasses import dataclass

from .netcore import Marking, NetError, PetriNet, WorkflowNet, bits, mask_of, PLACE, TRANSITION

DEFAULT_CAP = 10**6
CAP_ENV = "WFREACH_CAP"


class CapExceeded(NetError):
    code = "CAP_EXCEEDED"

    def __init__(self, cap):
        super().__init__(f"state space exceeds cap of {cap} states")
        self.cap = cap


def resolve_cap(cap=None):
    if cap is not None:
        return cap
    env = os.environ.get(CAP_ENV)
    if env:
        return int(env)
    return DEFAULT_CAP


def enabled(net, marking):
    """Transitions whose whole preset is marked, ascending by index."""
    counts = marking.counts if isinstance(marking, Marking) else marking
    support = 0
    for p in counts:
        support |= 1 << p
    return [t for t in net.transitions() if net.pre[t] & ~support == 0]


def fire(net, marking, t):
    """Fire t: consume one token per input place, produce one per output."""
    counts = dict(marking.counts if isinstance(marking, Marking) else marking)
    for p in bits(net.pre[t]):
        c = counts.get(p, 0)
        if c == 0:
            raise ValueError(f"transition {net.labels[t]!r} is not enabled")
        if c == 1:
            del counts[p]
        else:
            counts[p] = c - 1
    for p in bits(net.post[t]):
        counts[p] = counts.get(p, 0) + 1
    if isinstance(marking, Marking):
        return Marking(net, counts)
    return counts


def _key(counts):
    return tuple(sorted(counts.items()))


@dataclass
class StateGraph:
    """Explicit reachability graph. States are canonical (place, count) tuples."""

    initial: tuple
    states: dict  # key -> {place: count}
    edges: list  # (src key, transition index, dst key)
    succ: dict  # key -> [(transition index, dst key)]

    def support_masks(self):
        out = {}
        for key in self.states:
            out[key] = mask_of(p for p, _ in key)
        return out


def explore(wf, cap=None, start=None):
    """BFS over the token game from [source] (or start), capped."""
    net = wf.net
    cap = resolve_cap(cap)
    if start is None:
        start = {wf.source: 1}
    elif isinstance(start, Marking):
        start = dict(start.counts)
    init = _key(start)
    states = {init: dict(start)}
    succ = {init: []}
    edges = []
    q = deque([init])
    while q:
        key = q.popleft()
        m = states[key]
        for t in enabled(net, m):
            m2 = fire(net, m, t)
            k2 = _key(m2)
            if k2 not in states:
                if len(states) >= cap:
                    raise CapExceeded(cap)
                states[k2] = m2
                succ[k2] = []
                q.append(k2)
            edges.append((key, t, k2))
            succ[key].append((t, k2))
    return StateGraph(initial=init, states=states, edges=edges, succ=succ)


@dataclass
class SoundnessResult:
    sound: bool
    reason: str | None
    counterexample: object
    graph: StateGraph


def check_soundness(wf, cap=None, graph=None):
    """The three soundness conditions, checked on the explicit state graph:
    every state can still complete, completion is clean, no transition is dead.
    """
    if graph is None:
        graph = explore(wf, cap=cap)
    net = wf.net
    final = _key({wf.sink: 1})

    # states that can reach [sink], by reverse BFS over the edges
    pred = {}
    for src, _, dst in graph.edges:
        pred.setdefault(dst, []).append(src)
    can_finish = set()
    if final in graph.states:
        can_finish.add(final)
        q = deque([final])
        while q:
            k = q.popleft()
            for p in pred.get(k, ()):
                if p not in can_finish:
                    can_finish.add(p)
                    q.append(p)
    for key in graph.states:
        if key not in can_finish:
            return SoundnessResult(
                False,
                "state cannot reach the final marking",
                {net.labels[p]: c for p, c in key},
                graph,
            )

    for key in graph.states:
        m = graph.states[key]
        if wf.sink in m and key != final:
            return SoundnessResult(
                False,
                "sink marked together with other tokens",
                {net.labels[p]: c for p, c in key},
                graph,
            )

    fired = {t for _, t, _ in graph.edges}
    for t in net.transitions():
        if t not in fired:
            return SoundnessResult(False, "dead transition", net.labels[t], graph)

    return SoundnessResult(True, None, None, graph)


def brute_concurrency(wf, graph):
    """Place concurrency straight from the states: x || y iff some reachable
    marking covers [x, y]. Returns per-node masks (places only)."""
    net = wf.net
    rel = [0] * net.n
    for key in graph.states:
        m = graph.states[key]
        marked = sorted(m)
        for i, x in enumerate(marked):
            if m[x] >= 2:
                rel[x] |= 1 << x
            for y in marked[i + 1 :]:
                rel[x] |= 1 << y
                rel[y] |= 1 << x
    return rel


def brute_reachable(wf, graph, marking):
    counts = marking.counts if isinstance(marking, Marking) else marking
    return _key(counts) in graph.states


def brute_coverable(wf, graph, marking):
    counts = marking.counts if isinstance(marking, Marking) else marking
    for m in graph.states.values():
        if all(m.get(p, 0) >= c for p, c in counts.items()):
            return True
    return False


def brute_post_dominators(wf):
    """pdom[y] = mask of nodes on every path from y to the sink (reflexive).

    Definition-literal: x post-dominates y iff y cannot reach the sink once
    x is removed. One backward sweep per candidate x.
    """
    net = wf.net
    all_nodes = mask_of(range(net.n))
    pdom = [1 << y for y in range(net.n)]
    for x in range(net.n):
        if x == wf.sink:
            reach = 0
        else:
            reach = 1 << wf.sink
            todo = [wf.sink]
            while todo:
                v = todo.pop()
                rest = net.pre[v] & ~reach & ~(1 << x)
                reach |= rest
                todo.extend(bits(rest))
        # every y (with a path to the sink) not in reach is dominated by x
        for y in bits(all_nodes & ~reach):
            pdom[y] |= 1 << x
    return pdom


def brute_ipdom(wf, pdom=None):
    """Immediate post-dominator per node: the strict post-dominator whose own
    strict set is everyone else's. ipdom(sink) = sink."""
    net = wf.net
    if pdom is None:
        pdom = brute_post_dominators(wf)
    ip = [None] * net.n
    ip[wf.sink] = wf.sink
    for y in range(net.n):
        if y == wf.sink:
            continue
        strict = pdom[y] & ~(1 << y)
        want = strict.bit_count() - 1
        for z in bits(strict):
            if (pdom[z] & ~(1 << z)).bit_count() == want and strict & ~(1 << z) == pdom[z] & ~(1 << z):
                ip[y] = z
                break
    return ip


def brute_pdf(wf, pdom=None):
    """Post-dominance frontier, definition-literal: y is in pdf(x) iff some
    output s of y is post-dominated by x while y itself is not strictly."""
    net = wf.net
    if pdom is None:
        pdom = brute_post_dominators(wf)
    pdf = [0] * net.n
    for x in range(net.n):
        for y in range(net.n):
            strictly_above_y = (pdom[y] >> x) & 1 and x != y
            if strictly_above_y:
                continue
            for s in bits(net.post[y]):
                if (pdom[s] >> x) & 1:
                    pdf[x] |= 1 << y
                    break
    return pdf


def _all_paths(net, start, goal, blocked=0):
    """All simple paths start..goal avoiding blocked nodes (acyclic nets only)."""
    out = []
    path = [start]

    def walk(x):
        if x == goal:
            out.append(list(path))
            return
        for s in bits(net.post[x] & ~blocked):
            path.append(s)
            walk(s)
            path.pop()

    if not (blocked >> start) & 1:
        walk(start)
    return out


def brute_diverging_points(wf, targets):
    """Diverging points by the definition: delta has two outputs with
    node-disjoint paths to two different target nodes. Exponential path
    enumeration; intended for small nets only."""
    net = wf.net
    tlist = list(bits(targets))
    result = 0
    for delta in range(net.n):
        outs = list(bits(net.post[delta]))
        if len(outs) < 2:
            continue
        found = False
        for i, o1 in enumerate(outs):
            for o2 in outs:
                if o1 == o2:
                    continue
                for d1 in tlist:
                    for d2 in tlist:
                        if d1 == d2:
                            continue
                        for rho1 in _all_paths(net, o1, d1):
                            used = mask_of(rho1)
                            if _all_paths(net, o2, d2, blocked=used):
                                found = True
                                break
                        if found:
                            break
                    if found:
                        break
                if found:
                    break
            if found:
                break
        if found:
            result |= 1 << delta
    return result


def verify_path_to_end(wf, graph, paths_per_place=25, rng=None):
    """Check that along any sampled place-to-sink path, at most one node is
    marked in any reachable state. Returns a violating (path, state) pair or
    None."""
    net = wf.net
    rng = rng or random.Random(0)
    masks = graph.support_masks()
    for p in net.places():
        paths = _all_paths(net, p, wf.sink)
        if len(paths) > paths_per_place:
            paths = rng.sample(paths, paths_per_place)
        for rho in paths:
            pm = mask_of(rho)
            for key, sm in masks.items():
                inter = pm & sm
                if inter.bit_count() > 1:
                    return [net.labels[i] for i in rho], {net.labels[i]: c for i, c in key}
    return None


class _Builder:
    def __init__(self):
        self.nodes = []
        self.arcs = []
        self.np = 0
        self.nt = 0

    def place(self):
        self.np += 1
        label = f"p{self.np}"
        self.nodes.append((label, PLACE))
        return label

    def trans(self):
        self.nt += 1
        label = f"t{self.nt}"
        self.nodes.append((label, TRANSITION))
        return label

    def arc(self, a, b):
        self.arcs.append((a, b))


def generate_sound_afw(seed, size=12):
    """Generate a sound acyclic free-choice workflow net.

    Recursive block composition between an entry and an exit place: a plain
    transition, a sequence through a fresh middle place, an XOR of parallel
    sub-blocks on the same place pair (place-bordered), or an AND split/join
    through fresh transition borders. Deterministic per seed; `size` steers
    the rough place count.
    """
    rng = random.Random(seed)
    b = _Builder()
    source = b.place()
    sink = b.place()

    def build(entry, exit_, budget):
        if budget <= 1:
            t = b.trans()
            b.arc(entry, t)
            b.arc(t, exit_)
            return
        kind = rng.choices(("seq", "xor", "and", "leaf"), weights=(4, 3, 3, 1))[0]
        if kind == "leaf":
            t = b.trans()
            b.arc(entry, t)
            b.arc(t, exit_)
        elif kind == "seq":
            mid = b.place()
            split = rng.randint(1, budget - 1)
            build(entry, mid, split)
            build(mid, exit_, budget - split)
        elif kind == "xor":
            k = rng.randint(2, min(3, budget))
            for _ in range(k):
                build(entry, exit_, max(1, budget // k))
        else:  # and
            k = rng.randint(2, min(3, budget))
            split = b.trans()
            join = b.trans()
            b.arc(entry, split)
            b.arc(join, exit_)
            for _ in range(k):
                a = b.place()
                z = b.place()
                b.arc(split, a)
                b.arc(z, join)
                build(a, z, max(1, (budget - 2) // k))
        return

    build(source, sink, max(1, size))
    net = PetriNet(b.nodes, b.arcs)
    return WorkflowNet(net, source, sink)
