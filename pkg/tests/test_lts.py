import pytest

from distnet import generators
from distnet.distributed import externally_to_distributed
from distnet.lts import (Lts, NotDeterministic, STView, SplitView, TruncatedError,
                         branching_bisim_deterministic_target, branching_bisim_divergence,
                         branching_split_bisim_nets, build_interleaving_lts, build_split_lts,
                         build_st_lts, build_step_lts, detect_divergence, divergent_indices,
                         interleaving_branching_divergence, lts_to_dot, minus, plus,
                         ready_pairs, step_ready_pairs, step_readiness_equivalent)
from distnet.multiset import SignedMultiset, ms
from distnet.net import TAU, Limits, PetriNet


def lts(*triples, truncated=False):
    return Lts.from_triples(0, triples, truncated=truncated)


def seq_net():
    return PetriNet({"p": 1, "q": 0, "r": 0}, ["a", "b"],
                    {("p", "a"): 1, ("a", "q"): 1, ("q", "b"): 1, ("b", "r"): 1}, name="seq")


def choice_net():
    return PetriNet({"p": 1, "q": 0, "r": 0}, ["a", "b"],
                    {("p", "a"): 1, ("a", "q"): 1, ("p", "b"): 1, ("b", "r"): 1}, name="choice")


def tau_loop_net():
    return PetriNet({"s": 1}, {"h": TAU}, {("s", "h"): 1, ("h", "s"): 1})


def test_interleaving_m_shape(m_shape):
    L = build_interleaving_lts(m_shape)
    assert L.labels_of(0) == {"a", "b", "c"}
    assert len(L) == 4
    assert L.state(0) == m_shape.initial


def test_interleaving_tau_loop_and_empty():
    L = build_interleaving_lts(tau_loop_net())
    assert len(L) == 1 and L.edges == [(SignedMultiset({"s": 1}), TAU, SignedMultiset({"s": 1}))]
    L = build_interleaving_lts(PetriNet())
    assert len(L) == 1 and L.edge_count() == 0


def test_step_lts(m_shape):
    L = build_step_lts(m_shape)
    assert ms("a", "c") in L.labels_of(0)
    L = build_step_lts(seq_net())
    assert all(lab.cardinality() == 1 for _, lab, _ in L.edges)
    two_tau = PetriNet({"s": 1, "r": 1}, {"g": TAU, "h": TAU}, {("s", "g"): 1, ("r", "h"): 1})
    L = build_step_lts(two_tau)
    assert {lab for _, lab, _ in L.edges} == {TAU}


def test_split_single(single):
    L = build_split_lts(single)
    M0 = single.initial
    s0 = L.state(0)
    assert s0.marking == M0 and s0.firing == SignedMultiset()
    [(lab, j)] = L.successors(0)
    assert lab == plus("a")
    s1 = L.state(j)
    assert s1.marking == M0 - single.preset("a") and s1.firing == ms("a")
    [(lab2, k)] = L.successors(j)
    assert lab2 == minus("a")
    assert L.state(k).marking == M0 + single.effect("a") and not L.state(k).firing


def test_split_overlap(m_shape):
    L = build_split_lts(m_shape)
    after_a = dict((lab, j) for lab, j in L.successors(0))[plus("a")]
    assert plus("c") in L.labels_of(after_a)


def test_split_tau():
    L = build_split_lts(tau_loop_net())
    assert L.edges == [(L.state(0), TAU, L.state(0))]


def test_st_single(single):
    L = build_st_lts(single)
    [(lab, j)] = L.successors(0)
    assert lab == plus("a")
    assert L.labels_of(j) == {minus("a", 1)}


def test_st_two_copies():
    N = PetriNet({"s": 2}, ["a"], {("s", "a"): 1})
    view = STView(N, Limits(max_firing_len=2))
    s = view.initial
    for _ in range(2):
        s = dict(view.successors(s))[plus("a")]
    ends = dict(view.successors(s))
    assert set(ends) == {minus("a", 1), minus("a", 2)}
    assert view.decode(ends[minus("a", 2)]).firing == ("a",)


def test_st_truncates_at_firing_cap():
    N = PetriNet(["s"], ["a"], {("a", "s"): 1})
    L = build_st_lts(N, Limits(max_firing_len=2, max_markings=1000))
    assert L.truncated


@pytest.mark.parametrize("seed", range(25))
def test_st_projects_onto_split(seed):
    N = generators.random_net(seed, places=3, transitions=3, tokens=2)
    lim = Limits(max_markings=3000, max_firing_len=3)
    st_view, split_view = STView(N, lim), SplitView(N, lim)
    L_st = st_view.materialize()
    L_split = split_view.materialize()

    def proj(v):
        return (v.marking, SignedMultiset(list(v.firing)))

    split_edges = {((a.marking, a.firing), lab if lab == TAU else lab[:2], (b.marking, b.firing))
                   for a, lab, b in L_split.edges}
    for a, lab, b in L_st.edges:
        plain = lab if lab == TAU else lab[:2]
        assert (proj(a), plain, proj(b)) in split_edges or L_split.truncated


@pytest.mark.parametrize("seed", range(40))
def test_split_start_iff_interleaving(seed):
    N = generators.random_net(seed, places=3, transitions=3, tokens=2)
    lim = Limits(max_markings=2000, max_firing_len=4)
    L = build_split_lts(N, lim)
    I = build_interleaving_lts(N, lim)
    if I.truncated:
        pytest.skip("unbounded instance")
    acts = {}
    for i in range(len(I)):
        acts[I.state(i)] = {lab for lab in I.labels_of(i) if lab != TAU}
    for i in range(len(L)):
        st = L.state(i)
        starts = {lab[1] for lab in L.labels_of(i) if lab != TAU and lab[0] == "+"}
        if st.marking in acts and sum(st.firing.values()) < lim.max_firing_len:
            assert starts == acts[st.marking]


def test_plain_lts_deterministic(ladder):
    assert build_interleaving_lts(ladder).is_deterministic()


def test_ready_pairs_basic():
    assert ready_pairs(lts((0, "a", 1))) == {((), frozenset({"a"})), (("a",), frozenset())}
    assert ready_pairs(lts((0, TAU, 0))) == set()


def test_ready_pairs_m_shape(m_shape):
    assert ((), frozenset({"a", "b", "c"})) in ready_pairs(build_interleaving_lts(m_shape))


def test_ready_pairs_cycle_needs_bound():
    L = lts((0, "a", 0))
    with pytest.raises(ValueError):
        ready_pairs(L)
    assert ready_pairs(L, max_trace_len=2) == {((), frozenset({"a"})), (("a",), frozenset({"a"})),
                                               (("a", "a"), frozenset({"a"}))}


def test_step_ready_pairs_m_shape(m_shape):
    R = {(p.trace, p.menu) for p in step_ready_pairs(m_shape)}
    assert ((), frozenset({ms("a"), ms("b"), ms("c"), ms("a", "c")})) in R
    assert (("b",), frozenset()) in R


def test_step_ready_pairs_no_stable():
    assert step_ready_pairs(tau_loop_net(), max_trace_len=3) == set()


def test_step_ready_truncated():
    pump = PetriNet(["s"], ["a"], {("a", "s"): 1})
    with pytest.raises(TruncatedError):
        step_ready_pairs(pump, Limits(max_markings=10))
    assert step_readiness_equivalent(pump, pump, Limits(max_markings=10)).is_unknown


def test_step_readiness_equivalence(m_shape, tau_conflict):
    assert step_readiness_equivalent(m_shape, m_shape).is_yes
    assert step_readiness_equivalent(externally_to_distributed(tau_conflict), tau_conflict).is_yes
    v = step_readiness_equivalent(seq_net(), choice_net())
    assert v.is_no and v.witness is not None


def test_divergence():
    assert divergent_indices(lts((0, TAU, 0))) == {0}
    assert detect_divergence(lts((0, TAU, 1), (1, TAU, 2))) == set()
    L = lts((0, TAU, 1), (1, TAU, 2), (2, TAU, 3), (3, TAU, 2), (0, "a", 4))
    assert divergent_indices(L) == {0, 1, 2, 3}
    assert detect_divergence(L) == {L.state(i) for i in range(4)}


def test_branching_bisim():
    L = lts((0, "a", 1), (1, "b", 2))
    assert branching_bisim_divergence(L, L).is_yes
    tau_b = lts((0, "a", 1), (1, TAU, 2), (2, "b", 3), (1, "b", 3))
    assert branching_bisim_divergence(tau_b, L).is_yes
    assert branching_bisim_divergence(lts((0, "a", 1), (0, "b", 2)), lts((0, "a", 1))).is_no


def test_branching_bisim_not_weak():
    # a.(tau.b + c) vs a.(b + c): weakly but not branching bisimilar
    L1 = lts((0, "a", 1), (1, TAU, 2), (2, "b", 3), (1, "c", 4))
    L2 = lts((0, "a", 1), (1, "b", 2), (1, "c", 3))
    assert branching_bisim_divergence(L1, L2).is_no


def test_branching_bisim_divergence_cases():
    div = lts((0, TAU, 0), (0, "a", 1))
    calm = lts((0, "a", 1))
    assert branching_bisim_divergence(div, calm).is_no
    v = branching_bisim_divergence(div, div)
    assert v.is_unknown and v.note == "unknown-divergence"
    with pytest.raises(TruncatedError):
        branching_bisim_divergence(lts((0, "a", 1), truncated=True), calm)


def test_deterministic_target():
    L = lts((0, "a", 1), (1, "b", 2))
    assert branching_bisim_deterministic_target(L, L).is_yes
    assert branching_bisim_deterministic_target(lts((0, "a", 1), (1, TAU, 2), (2, "b", 3)), L).is_yes
    v = branching_bisim_deterministic_target(lts((0, TAU, 1), (1, TAU, 0), (0, "a", 2)), lts((0, "a", 1)))
    assert v.is_no and "(e)" in v.note
    with pytest.raises(NotDeterministic):
        branching_bisim_deterministic_target(L, lts((0, "a", 1), (0, "a", 2)))


def test_split_bisim_nets(single):
    assert branching_split_bisim_nets(single, single).is_yes
    other = PetriNet({"p": 1, "r": 0}, {"a": "b"}, {("p", "a"): 1, ("a", "r"): 1})
    assert branching_split_bisim_nets(single, other).is_no
    with pytest.raises(ValueError):
        branching_split_bisim_nets(single, tau_loop_net())


def test_interleaving_branching_nets(m_shape):
    assert interleaving_branching_divergence(m_shape, m_shape).is_yes
    assert interleaving_branching_divergence(seq_net(), choice_net()).is_no


def test_lts_to_dot(m_shape):
    text = lts_to_dot(build_interleaving_lts(m_shape), "m_shape")
    assert text.startswith('digraph "m_shape"') or text.startswith("digraph m_shape")
    assert text.count("->") == build_interleaving_lts(m_shape).edge_count() + 1
