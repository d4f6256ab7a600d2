"""Immediate post-dominators and post-dominance frontiers.

The tree is built over the reverse topological order with the classic
two-finger intersection: ordernr increases along every flow arc, so both
fingers climb ipdom chains toward the sink until they meet. On acyclic
input one sweep suffices (asserted); the outer fixpoint loop is kept so the
shape matches the general formulation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .netcore import bits
from .structure import TopoOrder, reverse_topological_order


def com_imm_post_dom(finger_x, finger_y, ipdom, ordernr):
    """Two-finger intersection: nearest common ancestor in the (partial)
    post-dominator tree."""
    while finger_x != finger_y:
        while ordernr[finger_x] < ordernr[finger_y]:
            finger_x = ipdom[finger_x]
        while ordernr[finger_y] < ordernr[finger_x]:
            finger_y = ipdom[finger_y]
    return finger_x


def compute_immediate_post_dominators(wf, topo=None):
    """ipdom per node; ipdom[sink] = sink. Nodes are refined in reverse
    topological order, folding each node's outputs together. Outputs whose
    ipdom is still undefined are skipped (they cannot refine anything yet);
    on acyclic nets every output is already processed, so nothing is ever
    skipped and the sweep converges immediately."""
    net = wf.net
    if topo is None:
        topo = reverse_topological_order(net)
    on = topo.ordernr
    ipdom = [None] * net.n
    ipdom[wf.sink] = wf.sink

    passes = 0
    changed = True
    while changed:
        changed = False
        passes += 1
        if passes > net.n + 1:
            raise RuntimeError("post-dominator computation failed to converge")
        for x in topo.order:
            if x == wf.sink:
                continue
            outs = [s for s in bits(net.post[x]) if ipdom[s] is not None]
            if not outs:
                continue
            new = outs[0]
            for s in outs[1:]:
                new = com_imm_post_dom(s, new, ipdom, on)
            if ipdom[x] != new:
                ipdom[x] = new
                changed = True
    assert passes <= 2, "expected single-pass convergence on acyclic input"
    return ipdom


def post_dominance_frontier(wf, ipdom):
    """pdf[n] = mask of multi-output nodes x such that n post-dominates one
    of x's outputs but not x itself: walk each output's ipdom chain up to
    ipdom(x), tagging every node passed."""
    net = wf.net
    pdf = [0] * net.n
    for x in range(net.n):
        if net.post[x].bit_count() < 2:
            continue
        stop = ipdom[x]
        for s in bits(net.post[x]):
            runner = s
            guard = net.n + 1
            while runner != stop:
                pdf[runner] |= 1 << x
                runner = ipdom[runner]
                guard -= 1
                if guard == 0:
                    raise RuntimeError("frontier walk left the dominator chain")
    return pdf


@dataclass
class PostDomData:
    topo: TopoOrder
    ipdom: list
    pdf: list


def compute_postdom(wf, topo=None):
    if topo is None:
        topo = reverse_topological_order(wf.net)
    ipdom = compute_immediate_post_dominators(wf, topo)
    pdf = post_dominance_frontier(wf, ipdom)
    return PostDomData(topo=topo, ipdom=ipdom, pdf=pdf)
