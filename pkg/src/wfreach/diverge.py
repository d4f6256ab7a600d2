"""Diverging points: the decision nodes from which a marking's places fan out.

A worklist seeded with the marked places climbs the post-dominance
frontiers. Every frontier node collects which marked places flow into it
(divinfo) and through which direct predecessors (reaches); frontier nodes
reached through only one contributor decide nothing and are pruned.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .netcore import Marking, MarkingError, bits


@dataclass
class DivergeData:
    divpoints: int  # mask, pruned
    divinfo: dict  # node -> mask of marked places that flow into it
    reaches: dict  # node -> mask of direct contributors (places or diverging points)
    pruned: int  # mask of frontier nodes dropped by the single-contributor filter


def compute_diverging_points(wf, pdf, marking, literal=False):
    """Worklist accumulation over the post-dominance frontiers.

    By default a node is re-queued only when its divinfo/reaches actually
    grew (same fixpoint, fewer passes); literal=True re-queues every visited
    frontier node not already queued, for differential testing.
    """
    if isinstance(marking, Marking):
        support = marking.support
    else:
        support = marking
    if support.bit_count() < 2:
        raise MarkingError("diverging points need at least two marked places")

    divpoints = 0
    divinfo = {}
    reaches = {}
    queue = deque(bits(support))
    queued = set(queue)
    while queue:
        x = queue.popleft()
        queued.discard(x)
        flow = divinfo.get(x, 0) | ((1 << x) & support)
        for d in bits(pdf[x]):
            divpoints |= 1 << d
            changed = False
            nd = divinfo.get(d, 0) | flow
            if nd != divinfo.get(d, 0):
                divinfo[d] = nd
                changed = True
            nr = reaches.get(d, 0) | (1 << x)
            if nr != reaches.get(d, 0):
                reaches[d] = nr
                changed = True
            if (literal or changed) and d not in queued:
                queue.append(d)
                queued.add(d)

    pruned = 0
    for d in bits(divpoints):
        if reaches.get(d, 0).bit_count() <= 1:
            pruned |= 1 << d
    return DivergeData(divpoints=divpoints & ~pruned, divinfo=divinfo, reaches=reaches, pruned=pruned)


def iterated_pdf(pdf, targets):
    """Fixpoint of folding the frontier sets back in: pdf(D), then
    pdf(D u pdf(D)), and so on until nothing new appears."""
    result = 0
    while True:
        nxt = result
        for x in bits(targets | result):
            nxt |= pdf[x]
        if nxt == result:
            return result
        result = nxt
