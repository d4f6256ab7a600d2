"""Invariant checks over randomly generated sound nets.

Each property pits the quadratic algorithms against the state-space oracle
or against a structural fact that must hold on sound acyclic free-choice
workflow nets. Nets come from the block-structured generator, so soundness
holds by construction and the oracle stays cheap.
"""

import functools
import random

from hypothesis import HealthCheck, given, settings, strategies as st

from wfreach import oracle
from wfreach.concurrency import ADMISSIBLE, MAXIMUM_ADMISSIBLE, check_admissibility
from wfreach.decide import COVERABLE, NOT_REACHABLE, REACHABLE, NetAnalyzer
from wfreach.diverge import compute_diverging_points
from wfreach.netcore import Marking, bits, mask_of
from wfreach.postdom import compute_immediate_post_dominators
from wfreach.structure import TopoOrder

COMMON = dict(
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.data_too_large],
)

seeds = st.integers(min_value=0, max_value=299)


@functools.lru_cache(maxsize=400)
def bundle(seed):
    wf = oracle.generate_sound_afw(seed, size=8 + (seed % 7) * 2)
    an = NetAnalyzer(wf)
    an.prepare()
    assert an.source == "structural", "generator must only emit sound nets"
    topo, haspath, rel, pd = an.caches()
    return wf, an, an.graph, topo, haspath, rel, pd


def draw_support(data, wf, k):
    places = [p for p in wf.places()]
    k = min(k, len(places))
    return data.draw(
        st.lists(st.sampled_from(places), min_size=k, max_size=k, unique=True),
        label="support",
    )


@given(seed=seeds, data=st.data())
@settings(**COMMON)
def test_verdicts_match_the_oracle(seed, data):
    wf, an, graph, *_ = bundle(seed)
    k = data.draw(st.integers(1, 4), label="k")
    support = draw_support(data, wf, k)
    counts = {p: 1 for p in support}
    if data.draw(st.booleans(), label="bump"):
        counts[support[0]] = 2
    marking = Marking(wf.net, counts)
    exact = oracle.brute_reachable(wf, graph, marking)
    cover = oracle.brute_coverable(wf, graph, marking)

    report = an.analyze(marking, mode="exact")
    assert (report.verdict == REACHABLE) == exact
    assert (report.verdict in (REACHABLE, COVERABLE)) == cover
    assert (report.verdict == NOT_REACHABLE) == (not cover)

    report = an.analyze(marking, mode="cover")
    assert (report.verdict == COVERABLE) == cover
    assert report.verdict != REACHABLE


@given(seed=seeds)
@settings(**COMMON)
def test_concurrency_matches_the_oracle(seed):
    wf, an, graph, topo, haspath, rel, pd = bundle(seed)
    brute = oracle.brute_concurrency(wf, graph)
    for p in wf.places():
        assert rel.places_of(p) == brute[p] & wf.place_mask, wf.labels[p]


@given(seed=seeds)
@settings(**COMMON)
def test_postdominators_match_the_oracle(seed):
    wf, an, graph, topo, haspath, rel, pd = bundle(seed)
    assert pd.ipdom == oracle.brute_ipdom(wf)
    assert pd.pdf == oracle.brute_pdf(wf)


def shuffled_reverse_topo(net, rng):
    """A valid reverse topological order with random tie-breaking, to pin
    down that the dominator tree does not depend on which one is used."""
    outdeg = [net.post[i].bit_count() for i in range(net.n)]
    ready = [i for i in range(net.n) if outdeg[i] == 0]
    order = []
    while ready:
        x = ready.pop(rng.randrange(len(ready)))
        order.append(x)
        for p in bits(net.pre[x]):
            outdeg[p] -= 1
            if outdeg[p] == 0:
                ready.append(p)
    assert len(order) == net.n
    ordernr = [0] * net.n
    for k, x in enumerate(order):
        ordernr[x] = net.n - 1 - k
    return TopoOrder(order=order, ordernr=ordernr)


@given(seed=seeds, shuffle=st.integers(0, 10**6))
@settings(**COMMON)
def test_ipdom_independent_of_topological_order(seed, shuffle):
    wf, an, graph, topo, haspath, rel, pd = bundle(seed)
    alt = shuffled_reverse_topo(wf.net, random.Random(shuffle))
    assert compute_immediate_post_dominators(wf, alt) == pd.ipdom


@given(seed=seeds, data=st.data())
@settings(**COMMON)
def test_diverging_points_literal_matches_gated(seed, data):
    wf, an, graph, topo, haspath, rel, pd = bundle(seed)
    support = draw_support(data, wf, data.draw(st.integers(2, 4), label="k"))
    if len(support) < 2:
        return
    mask = mask_of(support)
    a = compute_diverging_points(wf, pd.pdf, mask)
    b = compute_diverging_points(wf, pd.pdf, mask, literal=True)
    assert a.divpoints == b.divpoints
    assert a.pruned == b.pruned
    assert a.divinfo == b.divinfo
    assert a.reaches == b.reaches


@given(seed=st.integers(0, 150), data=st.data())
@settings(**COMMON)
def test_diverging_points_match_the_definition(seed, data):
    # The path-disjointness definition and the frontier worklist are claimed
    # equivalent for sets of places that can be marked together, so draw
    # subsets of reachable supports. Brute path enumeration caps the size.
    wf = oracle.generate_sound_afw(seed, size=5)
    if wf.n > 20:
        return
    an = NetAnalyzer(wf)
    an.prepare()
    topo, haspath, rel, pd = an.caches()
    supports = sorted({m for m in an.graph.support_masks().values() if m.bit_count() >= 2})
    if not supports:
        return
    base = list(bits(data.draw(st.sampled_from(supports), label="state")))
    k = data.draw(st.integers(2, min(3, len(base))), label="k")
    support = data.draw(
        st.lists(st.sampled_from(base), min_size=k, max_size=k, unique=True), label="support"
    )
    mask = mask_of(support)
    div = compute_diverging_points(wf, pd.pdf, mask)
    assert div.divpoints == oracle.brute_diverging_points(wf, mask)


@given(seed=seeds, data=st.data())
@settings(**COMMON)
def test_no_bookkeeping_disagreement_notes(seed, data):
    wf, an, graph, *_ = bundle(seed)
    support = draw_support(data, wf, data.draw(st.integers(1, 4), label="k"))
    report = an.analyze(Marking(wf.net, {p: 1 for p in support}))
    assert not any("disagrees" in note for note in report.notes), report.notes


@given(seed=seeds)
@settings(**COMMON)
def test_paths_hold_at_most_one_token(seed):
    wf, an, graph, *_ = bundle(seed)
    assert oracle.verify_path_to_end(wf, graph, rng=random.Random(seed)) is None


@given(seed=seeds)
@settings(**COMMON)
def test_reachable_states_are_safe(seed):
    wf, an, graph, *_ = bundle(seed)
    for m in graph.states.values():
        assert all(c <= 1 for c in m.values())


@given(seed=seeds)
@settings(**COMMON)
def test_concurrency_symmetric_irreflexive_and_path_free(seed):
    wf, an, graph, topo, haspath, rel, pd = bundle(seed)
    for x in range(wf.n):
        m = rel.masks[x]
        assert not (m >> x) & 1
        for y in bits(m):
            assert rel.concurrent(y, x)
            assert not (haspath[x] >> y) & 1
            assert not (haspath[y] >> x) & 1


@given(seed=seeds, data=st.data())
@settings(**COMMON)
def test_concurrent_paths_first_meet_at_a_transition(seed, data):
    wf, an, graph, topo, haspath, rel, pd = bundle(seed)
    pairs = rel.place_pairs()
    if not pairs:
        return
    x, y = data.draw(st.sampled_from(pairs), label="pair")
    rng = random.Random(seed ^ 0x5EED)
    for rho_x in _sample_paths(wf, x, rng):
        on_x = set(rho_x)
        for rho_y in _sample_paths(wf, y, rng):
            first = next(i for i in rho_y if i in on_x)
            assert not wf.net.is_place[first], (
                f"paths from {wf.labels[x]} and {wf.labels[y]} first share "
                f"{wf.labels[first]}"
            )


def _sample_paths(wf, start, rng, limit=8):
    paths = oracle._all_paths(wf.net, start, wf.sink)
    if len(paths) > limit:
        paths = rng.sample(paths, limit)
    return paths


@given(seed=seeds, data=st.data())
@settings(**COMMON)
def test_diverging_place_arms_are_nested(seed, data):
    wf, an, graph, topo, haspath, rel, pd = bundle(seed)
    support = draw_support(data, wf, data.draw(st.integers(2, 4), label="k"))
    if len(support) < 2:
        return
    marking = Marking(wf.net, {p: 1 for p in support})
    adm = check_admissibility(wf, rel, marking)
    if adm.verdict not in (MAXIMUM_ADMISSIBLE, ADMISSIBLE):
        return
    supp = marking.support
    div = compute_diverging_points(wf, pd.pdf, marking)
    for delta in bits(div.divpoints & wf.place_mask):
        arms = [haspath[o] & supp for o in bits(wf.net.post[delta])]
        for i, a in enumerate(arms):
            for b in arms[i + 1 :]:
                assert a & b in (a, b), wf.labels[delta]


@given(seed=seeds)
@settings(**COMMON)
def test_reachable_supports_are_maximum_admissible(seed):
    wf, an, graph, topo, haspath, rel, pd = bundle(seed)
    for key in graph.states:
        if not key:
            continue
        marking = Marking(wf.net, dict(key))
        adm = check_admissibility(wf, rel, marking)
        assert adm.verdict == MAXIMUM_ADMISSIBLE, dict(key)


@given(seed=seeds, data=st.data())
@settings(**COMMON)
def test_positive_verdicts_always_yield_a_replayable_witness(seed, data):
    wf, an, graph, *_ = bundle(seed)
    support = draw_support(data, wf, data.draw(st.integers(1, 4), label="k"))
    marking = Marking(wf.net, {p: 1 for p in support})
    mode = data.draw(st.sampled_from(["exact", "cover"]), label="mode")
    report = an.analyze(marking, mode=mode)
    if report.verdict == NOT_REACHABLE:
        return
    wit = an.build_witness(report)  # raises if the replay fails
    final = wit.markings[-1]
    if report.verdict == REACHABLE:
        assert final == marking
    else:
        assert all(final.count(p) >= c for p, c in marking.counts.items())
