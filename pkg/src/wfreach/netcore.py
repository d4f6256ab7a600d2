"""Petri net core: the node space, flow relation, and markings.

All nodes (places and transitions) share one dense index space, numbered in
declaration order. Node sets are plain Python ints used as bitmasks over
that space; the analysis algorithms are mostly mask algebra, which keeps
them fast without pulling in numpy.
"""

from __future__ import annotations


class NetError(Exception):
    """Base class for net construction and marking errors."""

    code = "NET_ERROR"


class NetConstructionError(NetError):
    code = "NET_CONSTRUCTION"


class UnknownNodeError(NetError):
    code = "UNKNOWN_PLACE"

    def __init__(self, label):
        super().__init__(f"unknown place or node: {label!r}")
        self.label = label


class MarkingError(NetError):
    code = "BAD_MARKING"


PLACE = "place"
TRANSITION = "transition"


def bits(mask):
    """Yield the set bit positions of an int mask, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices):
    m = 0
    for i in indices:
        m |= 1 << i
    return m


class PetriNet:
    """A bipartite net over a dense node index space.

    nodes: ordered (label, kind) pairs, kind one of "place"/"transition".
    arcs: ordered (from_label, to_label) pairs.
    """

    def __init__(self, nodes, arcs):
        self.labels = []
        self.is_place = []
        self.index = {}
        for label, kind in nodes:
            if label in self.index:
                raise NetConstructionError(f"duplicate node label {label!r}")
            if kind not in (PLACE, TRANSITION):
                raise NetConstructionError(f"bad node kind {kind!r} for {label!r}")
            self.index[label] = len(self.labels)
            self.labels.append(label)
            self.is_place.append(kind == PLACE)
        self.n = len(self.labels)

        self.place_mask = mask_of(i for i in range(self.n) if self.is_place[i])
        self.trans_mask = mask_of(i for i in range(self.n) if not self.is_place[i])

        self.pre = [0] * self.n
        self.post = [0] * self.n
        self.arcs = []
        seen = set()
        for a, b in arcs:
            if a not in self.index:
                raise NetConstructionError(f"arc from unknown node {a!r}")
            if b not in self.index:
                raise NetConstructionError(f"arc to unknown node {b!r}")
            i, j = self.index[a], self.index[b]
            if self.is_place[i] == self.is_place[j]:
                raise NetConstructionError(f"arc {a!r} -> {b!r} connects two nodes of the same kind")
            if (i, j) in seen:
                raise NetConstructionError(f"duplicate arc {a!r} -> {b!r}")
            seen.add((i, j))
            self.arcs.append((i, j))
            self.post[i] |= 1 << j
            self.pre[j] |= 1 << i

    def places(self):
        return (i for i in range(self.n) if self.is_place[i])

    def transitions(self):
        return (i for i in range(self.n) if not self.is_place[i])

    def preset(self, x):
        return self.pre[x]

    def postset(self, x):
        return self.post[x]

    def node(self, label):
        try:
            return self.index[label]
        except KeyError:
            raise UnknownNodeError(label) from None

    def to_labels(self, mask):
        """Labels for a node mask, in dense index order."""
        return [self.labels[i] for i in bits(mask)]


class WorkflowNet:
    """A Petri net with a designated source and sink place.

    The constructor only checks that source and sink exist and are places;
    the structural workflow-net conditions (empty source preset, empty sink
    postset, connectivity, properness) are checked by structure.validate_structure
    so that violations can be reported rather than raised.
    """

    def __init__(self, net, source, sink):
        self.net = net
        self.source = net.node(source) if isinstance(source, str) else source
        self.sink = net.node(sink) if isinstance(sink, str) else sink
        if not net.is_place[self.source]:
            raise NetConstructionError(f"source {net.labels[self.source]!r} is not a place")
        if not net.is_place[self.sink]:
            raise NetConstructionError(f"sink {net.labels[self.sink]!r} is not a place")

    # delegation helpers so algorithms can take either view
    @property
    def labels(self):
        return self.net.labels

    @property
    def is_place(self):
        return self.net.is_place

    @property
    def n(self):
        return self.net.n

    @property
    def place_mask(self):
        return self.net.place_mask

    @property
    def trans_mask(self):
        return self.net.trans_mask

    def places(self):
        return self.net.places()

    def transitions(self):
        return self.net.transitions()

    def preset(self, x):
        return self.net.pre[x]

    def postset(self, x):
        return self.net.post[x]

    def node(self, label):
        return self.net.node(label)

    def to_labels(self, mask):
        return self.net.to_labels(mask)


class Marking:
    """A multiset of places, stored as {place index: count} with counts >= 1."""

    __slots__ = ("counts", "support")

    def __init__(self, net, counts):
        self.counts = {}
        support = 0
        for idx, cnt in counts.items():
            if not isinstance(cnt, int) or cnt < 0:
                raise MarkingError(f"bad token count {cnt!r}")
            if cnt == 0:
                continue
            if not net.is_place[idx]:
                raise MarkingError(f"marking assigns tokens to transition {net.labels[idx]!r}")
            self.counts[idx] = cnt
            support |= 1 << idx
        self.support = support

    @classmethod
    def from_labels(cls, net, label_counts):
        counts = {}
        for label, cnt in label_counts.items():
            idx = net.node(label)
            counts[idx] = counts.get(idx, 0) + cnt
        return cls(net, counts)

    def count(self, idx):
        return self.counts.get(idx, 0)

    def total(self):
        return sum(self.counts.values())

    def is_safe(self):
        return all(c == 1 for c in self.counts.values())

    def as_key(self):
        """Canonical hashable form."""
        return tuple(sorted(self.counts.items()))

    def __eq__(self, other):
        return isinstance(other, Marking) and self.counts == other.counts

    def __hash__(self):
        return hash(self.as_key())

    def __len__(self):
        return len(self.counts)

    def __repr__(self):
        inner = ",".join(f"{p}^{c}" if c > 1 else str(p) for p, c in sorted(self.counts.items()))
        return f"Marking[{inner}]"


def singleton_marking(net, idx):
    return Marking(net, {idx: 1})
