import pytest

import oracles
from distnet import generators
from distnet.distributed import check_distributed
from distnet.mstruct import (UNKNOWN, MWitness, conflict_structure, distributability_verdict,
                             find_fully_reachable_pure_M, pure_m_candidates)
from distnet.net import Limits, PetriNet, reachability


def plain_random(seed, **kw):
    R = generators.random_net(seed, **kw)
    return PetriNet({p: R.initial[p] for p in R.places}, list(R.transitions), R.flow, name=R.name)


def test_conflict_structure_m_shape(m_shape):
    cs = conflict_structure(m_shape)
    assert cs.order == ("t", "u", "v")
    assert cs.conflicts("t", "u") and cs.conflicts("u", "v")
    assert not cs.conflicts("t", "v") and not cs.conflicts("t", "t")
    assert cs.lt_conflict("t", "u") and not cs.lt_conflict("u", "t")
    assert cs.le_conflict("v", "v") and cs.eq_conflict("u", "t")
    assert cs.below("u") == ["t"] and cs.above("u") == ["v"]
    assert cs.rank("v") == 2


def test_conflict_structure_json(single):
    cs = conflict_structure(single)
    assert cs.to_json() == {"order": ["a"], "ordered_conflicts": []}


def test_candidates_m_shape(m_shape):
    assert pure_m_candidates(m_shape) == [("t", "u", "v")]


def test_m_shape_witness(m_shape):
    w = find_fully_reachable_pure_M(m_shape)
    assert isinstance(w, MWitness)
    assert (w.t, w.u, w.v) == ("t", "u", "v")
    assert w.marking == {"p": 1, "q": 1}


def test_ladder_has_no_fully_reachable_m(ladder):
    assert find_fully_reachable_pure_M(ladder) is None
    assert oracles.pure_m_witnesses(ladder) == []


def test_ladder_with_unguarded_first_transition(ladder):
    flow = {k: w for k, w in ladder.flow.items() if k != ("p", "1")}
    N = PetriNet({p: ladder.initial[p] for p in ladder.places}, ladder.labels, flow)
    hits = oracles.pure_m_witnesses(N)
    w = find_fully_reachable_pure_M(N)
    assert hits and isinstance(w, MWitness)
    assert any((w.t, w.u, w.v) == h[:3] and tuple(sorted(w.marking.items())) == h[3] for h in hits)
    assert len({w.t, w.u, w.v}) == 3 and w.t < w.v
    assert (w.t, w.u, w.v) == ("1", "2", "3")


def test_truncated_search_is_unknown():
    N = PetriNet({"p": 1, "q": 1, "s": 0}, ["t", "u", "v", "g"],
                 {("p", "t"): 1, ("p", "u"): 1, ("q", "u"): 1, ("q", "v"): 1,
                  ("s", "t"): 1, ("g", "s"): 1})
    # t needs s, which only appears after g fires, so the first marking has no hit
    assert find_fully_reachable_pure_M(N, Limits(max_markings=1)) is UNKNOWN
    assert isinstance(find_fully_reachable_pure_M(N), MWitness)


def test_verdict_outcomes(m_shape, tau_conflict, ladder):
    assert distributability_verdict(m_shape).outcome == "not-distributable"
    assert distributability_verdict(ladder).outcome == "distributable"
    v = distributability_verdict(tau_conflict)
    assert v.outcome == "inapplicable" and "plain" in v.reason
    free = PetriNet(["s"], ["g"], {("g", "s"): 1})
    assert distributability_verdict(free).outcome == "inapplicable"
    non_scn = PetriNet({"s": 2}, ["t", "u"], {("s", "t"): 1, ("s", "u"): 1})
    assert "structural conflict" in distributability_verdict(non_scn).reason
    pump = PetriNet({"s": 1, "r": 0}, ["t"], {("s", "t"): 1, ("t", "s"): 1, ("t", "r"): 1})
    assert distributability_verdict(pump, Limits(max_markings=20)).outcome == "unknown"


def test_verdict_json(m_shape):
    d = distributability_verdict(m_shape).to_json()
    assert d["outcome"] == "not-distributable"
    assert d["witness"] == {"t": "t", "u": "u", "v": "v", "marking": {"p": 1, "q": 1}}


SHAPE = dict(places=4, transitions=5, tokens=3)


@pytest.mark.parametrize("seed", range(100))
def test_search_matches_oracle(seed):
    N = plain_random(seed, **SHAPE)
    lim = Limits(max_markings=5000)
    if reachability(N, lim).truncated:
        pytest.skip("unbounded instance")
    hits = oracles.pure_m_witnesses(N)
    w = find_fully_reachable_pure_M(N, lim)
    if not hits:
        assert w is None
    else:
        assert isinstance(w, MWitness)
        assert ((w.t, w.u, w.v), tuple(sorted(w.marking.items()))) in {(h[:3], h[3]) for h in hits}


@pytest.mark.parametrize("seed", range(100))
def test_distributed_has_no_pure_m(seed):
    N = plain_random(seed, **SHAPE)
    lim = Limits(max_markings=5000)
    if check_distributed(N, limits=lim).is_yes:
        assert find_fully_reachable_pure_M(N, lim) is None


def test_random_sample_is_mixed():
    lim = Limits(max_markings=5000)
    nets = [plain_random(s, **SHAPE) for s in range(100)]
    with_m = sum(isinstance(find_fully_reachable_pure_M(N, lim), MWitness) for N in nets)
    dist = sum(check_distributed(N, limits=lim).is_yes for N in nets)
    assert with_m >= 10 and dist >= 10
