from __future__ import annotations

import pytest

from wfreach import oracle
from wfreach.concurrency import (
    ADMISSIBLE,
    MAXIMUM_ADMISSIBLE,
    NOT_ADMISSIBLE,
    check_admissibility,
    classify_conflict,
    determine_concurrency,
    shortest_path,
)
from wfreach.formats import parse_marking
from wfreach.netcore import MarkingError, mask_of
from wfreach.structure import compute_has_path


def nodes(wf, labels):
    return mask_of(wf.node(l) for l in labels)


@pytest.fixture(scope="module")
def fig1_rel(fig1):
    return determine_concurrency(fig1)


def test_fig1_p15(fig1, fig1_rel):
    assert fig1_rel.places_of(fig1.node("p15")) == nodes(fig1, ["p6"])


def test_fig1_p3_p5(fig1, fig1_rel):
    assert fig1_rel.places_of(fig1.node("p3")) == nodes(
        fig1, ["p4", "p8", "p9", "p10", "p11", "p12", "p13", "p14", "p17", "p18"]
    )
    assert fig1_rel.places_of(fig1.node("p5")) == nodes(fig1, ["p12", "p14"])


def test_fig1_source_isolated(fig1, fig1_rel):
    assert fig1_rel.places_of(fig1.node("p1")) == 0
    assert fig1_rel.places_of(fig1.node("p7")) == 0


def test_matches_bruteforce_on_fixtures(fig1, fig5, fig12):
    for wf in (fig1, fig5, fig12):
        graph = oracle.explore(wf)
        brute = oracle.brute_concurrency(wf, graph)
        fast = determine_concurrency(wf)
        for p in wf.places():
            assert fast.places_of(p) == brute[p] & wf.place_mask, wf.labels[p]


def test_symmetry_irreflexive(fig1, fig1_rel):
    for x in fig1.places():
        assert not fig1_rel.concurrent(x, x)
        for y in fig1.places():
            assert fig1_rel.concurrent(x, y) == fig1_rel.concurrent(y, x)


def test_admissibility_maximum(fig1, fig1_rel):
    m = parse_marking(fig1.net, "[p5,p12,p14]")
    res = check_admissibility(fig1, fig1_rel, m)
    assert res.verdict == MAXIMUM_ADMISSIBLE
    assert res.missing == 0 and res.conflicting == 0


def test_admissibility_missing(fig1, fig1_rel):
    m = parse_marking(fig1.net, "[p9,p10]")
    res = check_admissibility(fig1, fig1_rel, m)
    assert res.verdict == ADMISSIBLE
    assert res.missing == nodes(fig1, ["p2", "p3", "p11", "p12", "p13", "p14", "p16", "p17", "p18"])
    assert res.conflicting == 0


def test_admissibility_conflict(fig1, fig1_rel):
    m = parse_marking(fig1.net, "[p3,p5]")
    res = check_admissibility(fig1, fig1_rel, m)
    assert res.verdict == NOT_ADMISSIBLE
    assert res.conflicting == nodes(fig1, ["p3", "p5"])
    assert res.mp == nodes(fig1, ["p12", "p14"])


def test_admissibility_unsafe_multiplicity(fig1, fig1_rel):
    m = parse_marking(fig1.net, "[p9^2]")
    res = check_admissibility(fig1, fig1_rel, m)
    assert res.verdict == NOT_ADMISSIBLE
    assert res.conflicting == nodes(fig1, ["p9"])


def test_admissibility_empty_marking(fig1, fig1_rel):
    with pytest.raises(MarkingError):
        check_admissibility(fig1, fig1_rel, parse_marking(fig1.net, "[]"))


def test_fig5_xyz_maximum(fig5):
    rel = determine_concurrency(fig5)
    res = check_admissibility(fig5, rel, parse_marking(fig5.net, "[x,y,z]"))
    assert res.verdict == MAXIMUM_ADMISSIBLE


def test_conflict_forward_path(fig1):
    hp = compute_has_path(fig1.net)
    rel = determine_concurrency(fig1, hp)
    exp = classify_conflict(fig1, hp, rel, fig1.node("p3"), fig1.node("p5"))
    assert exp.kind == "forward-path"
    assert [fig1.labels[i] for i in exp.path] == ["p3", "t4", "p5"]


def test_conflict_backward_path(fig1):
    hp = compute_has_path(fig1.net)
    rel = determine_concurrency(fig1, hp)
    exp = classify_conflict(fig1, hp, rel, fig1.node("p5"), fig1.node("p8"))
    assert exp.kind == "backward-path"
    assert [fig1.labels[i] for i in exp.path] == ["p8", "t4", "p5"]


def test_conflict_exclusive(fig12):
    from wfreach.diverge import compute_diverging_points
    from wfreach.postdom import compute_postdom

    hp = compute_has_path(fig12.net)
    rel = determine_concurrency(fig12, hp)
    pd = compute_postdom(fig12)

    def diverge_fn(support):
        return compute_diverging_points(fig12, pd.pdf, support).divpoints

    exp = classify_conflict(fig12, hp, rel, fig12.node("p5"), fig12.node("p7"), diverge_fn)
    assert exp.kind == "exclusive"
    assert fig12.labels[exp.decision] == "p4"
    assert [fig12.labels[i] for i in exp.path] == ["t3", "p5"]
    assert [fig12.labels[i] for i in exp.path2] == ["t4", "p7"]


def test_shortest_path_trivial(fig1):
    assert shortest_path(fig1.net, fig1.node("p1"), fig1.node("p1")) == [fig1.node("p1")]
    assert shortest_path(fig1.net, fig1.node("p7"), fig1.node("p1")) is None
