"""End-to-end reachability and coverability verdicts with diagnostics.

The pipeline: structural validation, an optional rewrite to simple free
choice, a soundness gate, then the quadratic decision (admissibility plus
diverging points) with conflict explanations, witness construction, and
color-role assignment for rendering. Nets that keep the workflow shape but
fail the structural preconditions (cyclic, not free-choice, unsound) are
answered by the state-space oracle instead and the report says so.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import oracle
from .concurrency import (
    MAXIMUM_ADMISSIBLE,
    NOT_ADMISSIBLE,
    UNSAFE_MULTIPLICITY,
    AdmissibilityResult,
    ConcurrencyRelation,
    ConflictExplanation,
    check_admissibility,
    classify_conflict,
    determine_concurrency,
)
from .diverge import compute_diverging_points
from .formats import ColorRole, StructureViolationError, parse_marking
from .netcore import Marking, MarkingError, bits, mask_of
from .postdom import compute_postdom
from .structure import (
    compute_has_path,
    reverse_topological_order,
    to_simple_free_choice,
    validate_structure,
)

REACHABLE = "reachable"
COVERABLE = "coverable"
NOT_REACHABLE = "not-reachable"

EXACT = "exact"
COVER = "cover"

SOUND = "sound"
UNSOUND = "unsound"
ASSUMED = "assumed"


@dataclass
class Witness:
    """A firing sequence from the initial marking, every marking along the
    way, and the partial run net the replay traces."""

    sequence: list  # transition indices in firing order
    markings: list  # Marking per prefix; len(sequence) + 1 entries
    nodes: int  # mask of nodes the replay touches
    edges: list  # arcs (a, b) used by the replay

    def to_json_dict(self, net):
        return {
            "sequence": [net.labels[t] for t in self.sequence],
            "markings": [
                {net.labels[p]: c for p, c in sorted(m.counts.items())} for m in self.markings
            ],
            "subnet": {
                "nodes": [net.labels[i] for i in bits(self.nodes)],
                "edges": [[net.labels[a], net.labels[b]] for a, b in self.edges],
            },
        }


@dataclass
class AnalysisReport:
    """Everything one marking query produced. Masks speak the original net's
    vocabulary; `diverge` keeps the working-net data and is translated on
    JSON export."""

    verdict: str
    mode: str
    marking: Marking
    admissibility: AdmissibilityResult
    diverge: object = None
    chosen_delta: int | None = None
    conflicts: list = field(default_factory=list)
    witness: Witness | None = None
    roles: dict = field(default_factory=dict)  # label -> ColorRole
    edge_roles: dict = field(default_factory=dict)  # (from, to) labels -> ColorRole
    soundness: str = SOUND
    source: str = "structural"
    notes: list = field(default_factory=list)
    _analyzer: object = None

    def to_json_dict(self):
        an = self._analyzer
        orig = an.orig
        tr = an.tr
        adm = self.admissibility
        wlabels = an.work.net.labels

        points, divinfo, reaches = [], {}, {}
        if self.diverge is not None:
            div = self.diverge
            points = [wlabels[i] for i in bits(div.divpoints)]
            for i in bits(div.divpoints | div.pruned):
                divinfo[wlabels[i]] = orig.to_labels(tr.mask(div.divinfo.get(i, 0)))
                reaches[wlabels[i]] = orig.to_labels(tr.mask(div.reaches.get(i, 0)))

        conflicts = []
        for exp in self.conflicts:
            conflicts.append(
                {
                    "x": wlabels[exp.x],
                    "y": wlabels[exp.y],
                    "kind": exp.kind,
                    "path": [orig.labels[i] for i in tr.path(exp.path)] if exp.path else None,
                    "path2": [orig.labels[i] for i in tr.path(exp.path2)] if exp.path2 else None,
                    "decision": tr.label(exp.decision) if exp.decision is not None else None,
                }
            )

        return {
            "verdict": self.verdict,
            "mode": self.mode,
            "source": self.source,
            "soundness": self.soundness,
            "marking": {orig.labels[p]: c for p, c in sorted(self.marking.counts.items())},
            "admissibility": adm.verdict,
            "mp": orig.to_labels(adm.mp),
            "missing": orig.to_labels(adm.missing),
            "conflicting": orig.to_labels(adm.conflicting),
            "chosenDelta": tr.label(self.chosen_delta) if self.chosen_delta is not None else None,
            "divergingPoints": points,
            "divinfo": divinfo,
            "reaches": reaches,
            "conflicts": conflicts,
            "witness": self.witness.to_json_dict(orig.net) if self.witness else None,
            "roles": {label: role.value for label, role in sorted(self.roles.items())},
            "edgeRoles": {
                f"{a}->{b}": role.value for (a, b), role in sorted(self.edge_roles.items())
            },
            "notes": list(self.notes),
        }


class _Translator:
    """Maps working-net artifacts back to the original net. Original nodes
    keep their indices in the working net; inserted nodes sit above orig_n
    and expand to the cluster they stand for."""

    def __init__(self, orig, work, inserted):
        self.orig = orig
        self.work = work
        self.orig_n = orig.n
        self.orig_all = (1 << orig.n) - 1
        self.expand = {}
        for label, (kind, members) in inserted.items():
            idx = work.node(label)
            if kind == "tau":
                self.expand[idx] = mask_of(orig.node(m) for m in members)
            else:  # mid stands for the cluster's shared input places
                self.expand[idx] = orig.preset(orig.node(members[0]))

    @property
    def identity(self):
        return not self.expand

    def mask(self, m):
        out = m & self.orig_all
        for i in bits(m & ~self.orig_all):
            out |= self.expand.get(i, 0)
        return out

    def drop(self, m):
        return m & self.orig_all

    def path(self, nodes_):
        return [i for i in nodes_ if i < self.orig_n]

    def label(self, idx):
        return self.work.net.labels[idx]

    def marking(self, counts):
        """Working-net marking to original counts; each token on a mid place
        puts one token back on every place of the cluster's preset."""
        out = {}
        for p, c in counts.items():
            if p < self.orig_n:
                out[p] = out.get(p, 0) + c
            else:
                for q in bits(self.expand[p]):
                    out[q] = out.get(q, 0) + c
        return out


def _bfs_haspath(net):
    """Forward reachability per node (itself included). Plain BFS, so it
    also works on cyclic nets where the topological sweep does not."""
    out = [0] * net.n
    for s in range(net.n):
        mask = 1 << s
        q = deque([s])
        while q:
            x = q.popleft()
            for y in bits(net.post[x]):
                if not (mask >> y) & 1:
                    mask |= 1 << y
                    q.append(y)
        out[s] = mask
    return out


class NetAnalyzer:
    """Validates one net, runs the soundness gate once, caches the quadratic
    precomputations, and then answers as many marking queries as asked.

    The caches are built exactly once and never mutated afterwards, so
    independent markings may be analyzed concurrently.
    """

    def __init__(self, wf, assume_sound=False, cap=None):
        self.orig = wf
        self.assume_sound = assume_sound
        self.cap = cap
        self.structure = validate_structure(wf)
        if not (self.structure.is_workflow and self.structure.is_proper):
            raise StructureViolationError(self.structure)
        self.work = wf
        self.inserted = {}
        self.tr = _Translator(wf, wf, {})
        self.soundness = None  # SoundnessResult when the oracle ran
        self.soundness_label = None
        self.source = None
        self.graph = None  # oracle state graph when explored
        self.base_notes = []
        self._caches = None
        self._ocaches = None
        self._prepared = False

    # -- pipeline ---------------------------------------------------------

    def prepare(self):
        """Soundness gate + optional free-choice rewrite; runs once."""
        if self._prepared:
            return self
        if self.structure.ok():
            if self.assume_sound:
                self.source = "structural"
                self.soundness_label = ASSUMED
            else:
                result = oracle.check_soundness(self.orig, cap=self.cap)
                self.soundness = result
                self.graph = result.graph
                if result.sound:
                    self.source = "structural"
                    self.soundness_label = SOUND
                else:
                    self.source = "oracle"
                    self.soundness_label = UNSOUND
                    self.base_notes.append(
                        f"net is not sound ({result.reason}: {result.counterexample}); "
                        "verdicts come from the state-space oracle"
                    )
        else:
            self.source = "oracle"
            codes = sorted({v.code for v in self.structure.violations})
            self.base_notes.append(
                "structural preconditions not met (%s); verdicts come from the "
                "state-space oracle" % ", ".join(codes)
            )
            result = oracle.check_soundness(self.orig, cap=self.cap)
            self.soundness = result
            self.graph = result.graph
            self.soundness_label = SOUND if result.sound else UNSOUND
        if self.source == "structural" and not self.structure.is_simple_fc:
            self.work, self.inserted = to_simple_free_choice(self.orig)
            self.tr = _Translator(self.orig, self.work, self.inserted)
            self.base_notes.append(
                "extended free-choice input rewritten to simple free choice; "
                "inserted nodes: " + ", ".join(sorted(self.inserted))
            )
        self._prepared = True
        return self

    def caches(self):
        self.prepare()
        if self._caches is None:
            work = self.work
            topo = reverse_topological_order(work.net)
            haspath = compute_has_path(work.net, topo)
            rel = determine_concurrency(work, haspath)
            pd = compute_postdom(work, topo)
            self._caches = (topo, haspath, rel, pd)
        return self._caches

    def _oracle_caches(self):
        if self._ocaches is None:
            masks = oracle.brute_concurrency(self.orig, self.graph)
            rel = ConcurrencyRelation(self.orig, masks)
            haspath = _bfs_haspath(self.orig.net)
            self._ocaches = (rel, haspath)
        return self._ocaches

    # -- analysis ---------------------------------------------------------

    def analyze(self, marking, mode=EXACT):
        self.prepare()
        if isinstance(marking, str):
            marking = parse_marking(self.orig.net, marking)
        elif isinstance(marking, dict):
            if any(isinstance(k, str) for k in marking):
                marking = Marking.from_labels(self.orig.net, marking)
            else:
                marking = Marking(self.orig.net, marking)
        if mode not in (EXACT, COVER):
            raise ValueError(f"unknown mode {mode!r}")
        if not marking.counts:
            raise MarkingError("empty marking: nothing to analyze")
        if self.source == "oracle":
            report = self._oracle_verdict(marking, mode)
        else:
            report = self._structural_verdict(marking, mode)
        report._analyzer = self
        report.soundness = self.soundness_label
        report.source = self.source
        report.notes = self.base_notes + report.notes
        self._assign_roles(report)
        return report

    def _structural_verdict(self, marking, mode):
        topo, haspath, rel, pd = self.caches()
        work = self.work
        wmarking = marking if self.tr.identity else Marking(work.net, dict(marking.counts))
        adm = check_admissibility(work, rel, wmarking)
        report = AnalysisReport(
            verdict=NOT_REACHABLE,
            mode=mode,
            marking=marking,
            admissibility=self._translate_adm(adm),
        )
        supp = wmarking.support

        if adm.verdict == NOT_ADMISSIBLE:
            report.conflicts = self._explain_conflicts(wmarking, rel, topo, haspath, pd)
            for p in bits(adm.unsafe):
                report.conflicts.append(ConflictExplanation(p, p, UNSAFE_MULTIPLICITY))
                report.notes.append(
                    f"{work.net.labels[p]} is requested with {wmarking.count(p)} tokens, "
                    "but a sound free-choice workflow net is safe"
                )
            return report

        if supp.bit_count() == 1:
            # Too small for the diverging-point machinery. Soundness already
            # guarantees the place gets marked in some run, and an empty
            # concurrency set means nothing else is ever marked with it.
            if adm.verdict == MAXIMUM_ADMISSIBLE:
                report.verdict = REACHABLE if mode == EXACT else COVERABLE
            else:
                report.verdict = COVERABLE
            return report

        div = compute_diverging_points(work, pd.pdf, wmarking)
        report.diverge = div
        if div.divpoints & ~self.tr.orig_all:
            report.notes.append(
                "diverging points include nodes inserted by the free-choice "
                "rewrite: " + ", ".join(work.net.labels[i] for i in bits(div.divpoints & ~self.tr.orig_all))
            )
        chosen = None
        for d in bits(div.divpoints & work.trans_mask):
            union = haspath[d] & ~(1 << d) & supp
            accumulated = div.divinfo.get(d, 0)
            if union != accumulated:
                report.notes.append(
                    "diverging-point bookkeeping disagrees at %s: the worklist "
                    "gathered {%s} but paths give {%s}"
                    % (
                        work.net.labels[d],
                        ",".join(work.to_labels(accumulated)),
                        ",".join(work.to_labels(union)),
                    )
                )
            if chosen is None and union == supp:
                chosen = d
        report.chosen_delta = chosen
        if chosen is None:
            return report
        if adm.verdict == MAXIMUM_ADMISSIBLE and mode == EXACT:
            report.verdict = REACHABLE
        else:
            report.verdict = COVERABLE
        return report

    def _translate_adm(self, adm):
        if self.tr.identity:
            return adm
        # Dropping inserted places loses nothing: whenever a mid place is
        # concurrency-compatible with the whole support, so is every place of
        # the preset it stands for, and those are kept on their own merit.
        return AdmissibilityResult(
            adm.verdict,
            self.tr.drop(adm.mp),
            self.tr.drop(adm.missing),
            adm.conflicting,
            adm.unsafe,
        )

    def _explain_conflicts(self, wmarking, rel, topo, haspath, pd):
        work = self.work

        def diverge_fn(pair_mask):
            return compute_diverging_points(work, pd.pdf, pair_mask).divpoints

        out = []
        supp = list(bits(wmarking.support))
        for i, x in enumerate(supp):
            for y in supp[i + 1 :]:
                if not rel.concurrent(x, y):
                    out.append(
                        classify_conflict(work, haspath, rel, x, y, diverge_fn, topo.ordernr)
                    )
        return out

    def _oracle_verdict(self, marking, mode):
        rel, haspath = self._oracle_caches()
        orig = self.orig
        adm = check_admissibility(orig, rel, marking)
        report = AnalysisReport(
            verdict=NOT_REACHABLE, mode=mode, marking=marking, admissibility=adm
        )
        exact = oracle.brute_reachable(orig, self.graph, marking)
        coverable = oracle.brute_coverable(orig, self.graph, marking)
        if mode == EXACT and exact:
            report.verdict = REACHABLE
        elif coverable:
            report.verdict = COVERABLE
        if report.verdict == NOT_REACHABLE and adm.verdict == NOT_ADMISSIBLE:
            supp = list(bits(marking.support))
            for i, x in enumerate(supp):
                for y in supp[i + 1 :]:
                    if not rel.concurrent(x, y):
                        report.conflicts.append(classify_conflict(orig, haspath, rel, x, y))
            for p in bits(adm.unsafe):
                report.conflicts.append(ConflictExplanation(p, p, UNSAFE_MULTIPLICITY))
        return report

    # -- witness ----------------------------------------------------------

    def build_witness(self, report):
        """A firing sequence realizing a positive verdict, self-validated by
        replay before it is returned."""
        if report.verdict not in (REACHABLE, COVERABLE):
            raise ValueError("witness construction needs a reachable or coverable verdict")
        exact = report.verdict == REACHABLE
        if self.source == "oracle":
            wit = self._oracle_witness(report.marking, exact)
        else:
            wit = self._guided_witness(report.marking, exact)
        report.witness = wit
        return wit

    def _guided_witness(self, marking, exact):
        topo, haspath, rel, pd = self.caches()
        work = self.work
        net = work.net
        target = dict(marking.counts)
        target_mask = mask_of(target)
        state = {work.source: 1}
        seq = []
        states = [dict(state)]
        limit = max(1, work.trans_mask.bit_count() * work.place_mask.bit_count())

        for _ in range(limit):
            if self._covers(state, target) and (not exact or state == target):
                break
            satisfied = 0
            for p, c in target.items():
                if state.get(p, 0) >= c:
                    satisfied |= 1 << p
            remaining = target_mask & ~satisfied
            # never consume a token that already rests on a wanted place
            cands = [t for t in oracle.enabled(net, state) if net.pre[t] & satisfied == 0]
            if not cands:
                raise RuntimeError(
                    "internal: guided witness search got stuck; was the net "
                    "really sound?"
                )
            t = cands[0]
            pre = net.pre[t]
            if pre.bit_count() == 1:
                p = pre.bit_length() - 1
                if net.post[p].bit_count() >= 2:
                    # a free choice: follow the branch that still leads to the
                    # most outstanding target places
                    best = None
                    for u in cands:
                        if net.pre[u] != pre:
                            continue
                        score = (haspath[u] & remaining).bit_count()
                        if best is None or score > best[0]:
                            best = (score, u)
                    t = best[1]
            state = oracle.fire(net, state, t)
            seq.append(t)
            states.append(dict(state))
        else:
            raise RuntimeError(
                "internal: guided witness search did not terminate; was the "
                "net really sound?"
            )

        # translate to the original vocabulary (tau firings vanish)
        out_seq = []
        out_marks = [Marking(self.orig.net, self.tr.marking(states[0]))]
        for k, t in enumerate(seq):
            after = Marking(self.orig.net, self.tr.marking(states[k + 1]))
            if t < self.tr.orig_n:
                out_seq.append(t)
                out_marks.append(after)
            elif after != out_marks[-1]:
                raise RuntimeError("internal: inserted transition changed the marking")

        self._validate_replay(out_seq, out_marks, target, exact)
        return self._package_witness(out_seq, out_marks)

    def _oracle_witness(self, marking, exact):
        graph = self.graph
        target = dict(marking.counts)

        def hit(key):
            m = graph.states[key]
            return m == target if exact else self._covers(m, target)

        parent = {graph.initial: None}
        goal = None
        q = deque([graph.initial])
        while q:
            key = q.popleft()
            if hit(key):
                goal = key
                break
            for t, dst in graph.succ[key]:
                if dst not in parent:
                    parent[dst] = (key, t)
                    q.append(dst)
        if goal is None:
            raise RuntimeError("internal: verdict does not match the explored state graph")
        rev = []
        key = goal
        while parent[key] is not None:
            key, t = parent[key]
            rev.append(t)
        out_seq = rev[::-1]
        state = {self.orig.source: 1}
        out_marks = [Marking(self.orig.net, state)]
        for t in out_seq:
            state = oracle.fire(self.orig.net, state, t)
            out_marks.append(Marking(self.orig.net, state))
        self._validate_replay(out_seq, out_marks, target, exact)
        return self._package_witness(out_seq, out_marks)

    @staticmethod
    def _covers(state, target):
        return all(state.get(p, 0) >= c for p, c in target.items())

    def _validate_replay(self, out_seq, out_marks, target, exact):
        net = self.orig.net
        cur = {self.orig.source: 1}
        if Marking(net, cur) != out_marks[0]:
            raise RuntimeError("internal: witness does not start at the initial marking")
        for k, t in enumerate(out_seq):
            cur = oracle.fire(net, cur, t)
            if Marking(net, cur) != out_marks[k + 1]:
                raise RuntimeError("internal: witness replay diverged from its markings")
        final = out_marks[-1].counts
        ok = final == target if exact else self._covers(final, target)
        if not ok:
            raise RuntimeError("internal: witness replay missed the requested marking")

    def _package_witness(self, out_seq, out_marks):
        orig = self.orig
        nodes = 0
        for m in out_marks:
            nodes |= m.support
        edges = []
        seen = set()
        for t in out_seq:
            nodes |= 1 << t
            for p in bits(orig.preset(t)):
                if (p, t) not in seen:
                    seen.add((p, t))
                    edges.append((p, t))
            for q in bits(orig.postset(t)):
                if (t, q) not in seen:
                    seen.add((t, q))
                    edges.append((t, q))
        return Witness(sequence=out_seq, markings=out_marks, nodes=nodes, edges=edges)

    # -- rendering roles --------------------------------------------------

    def _assign_roles(self, report):
        orig = self.orig
        work = self.work
        roles = {}
        edge_roles = {}

        def put_mask(mask, role):
            for i in bits(mask):
                roles.setdefault(orig.labels[i], role)

        def put_path(path, role, skip_ends=True):
            path = self.tr.path(path)
            inner = path[1:-1] if skip_ends else path
            for i in inner:
                roles.setdefault(orig.labels[i], role)
            for a, b in zip(path, path[1:]):
                edge_roles.setdefault((orig.labels[a], orig.labels[b]), role)

        adm = report.admissibility
        put_mask(adm.conflicting, ColorRole.CONFLICTING)
        put_mask(report.marking.support, ColorRole.MARKED)
        put_mask(adm.missing, ColorRole.MISSING)

        div = report.diverge
        if div is not None:
            supp = report.marking.support
            blocked = div.divpoints | supp
            if report.chosen_delta is not None:
                put_mask(self.tr.mask(1 << report.chosen_delta), ColorRole.WITNESS_PATH)
                self._paint_flows(
                    report.chosen_delta, div, blocked, ColorRole.WITNESS_PATH, put_path, set()
                )
            put_mask(self.tr.mask(div.divpoints & work.place_mask), ColorRole.DIVERGING_PLACE)

            depth = {}

            def depth_of(d):
                if d not in depth:
                    kids = div.reaches.get(d, 0) & div.divpoints
                    depth[d] = 0 if not kids else 1 + max(depth_of(k) for k in bits(kids))
                return depth[d]

            for d in bits(div.divpoints & work.trans_mask):
                if d == report.chosen_delta:
                    continue
                role = (
                    ColorRole.DIVERGING_PRIMARY
                    if depth_of(d) % 2 == 0
                    else ColorRole.DIVERGING_SECONDARY
                )
                put_mask(self.tr.mask(1 << d), role)
                self._paint_flows(d, div, blocked, role, put_path, set())

        for exp in report.conflicts:
            if exp.decision is not None:
                put_mask(self.tr.mask(1 << exp.decision), ColorRole.DIVERGING_PLACE)
            for path in (exp.path, exp.path2):
                if path:
                    put_path(path, ColorRole.CONFLICT_PATH)

        report.roles = roles
        report.edge_roles = edge_roles

    def _paint_flows(self, start, div, blocked, role, put_path, visited):
        """Color a breadth-first route from a diverging node toward each node
        it feeds; routes continue through pruned pass-through nodes."""
        if start in visited:
            return
        visited.add(start)
        for r in bits(div.reaches.get(start, 0)):
            path = self._flow_path(start, r, blocked)
            if path is not None:
                put_path(path, role)
            if (div.pruned >> r) & 1:
                self._paint_flows(r, div, blocked, role, put_path, visited)

    def _flow_path(self, start, goal, blocked):
        net = self.work.net
        allowed_ends = (1 << start) | (1 << goal)
        prev = {start: None}
        q = deque([start])
        while q:
            x = q.popleft()
            if x == goal:
                path = []
                while x is not None:
                    path.append(x)
                    x = prev[x]
                return path[::-1]
            for y in bits(net.post[x]):
                if y in prev:
                    continue
                if (blocked >> y) & 1 and not (allowed_ends >> y) & 1:
                    continue
                prev[y] = x
                q.append(y)
        return None


# -- module-level conveniences mirroring the public operations -------------


def is_reachable(wf, marking, mode=EXACT, assume_sound=False, cap=None):
    """One-shot analysis of a single marking on a fresh analyzer."""
    return NetAnalyzer(wf, assume_sound=assume_sound, cap=cap).analyze(marking, mode)


def build_witness(wf, report):
    an = report._analyzer
    if an is None:
        raise ValueError("report was not produced by a NetAnalyzer")
    return an.build_witness(report)


def assign_roles(wf, report):
    an = report._analyzer
    if an is None:
        raise ValueError("report was not produced by a NetAnalyzer")
    an._assign_roles(report)
    return report.roles, report.edge_roles
