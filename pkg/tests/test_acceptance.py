"""Acceptance criteria 1 to 10. A PASS/FAIL line per criterion is printed
in the terminal summary."""

import random
import time

import pytest

import oracles
from conftest import load
from distnet import generators
from distnet.confrepl import (build_conflict_replicating, mimic_multiset, sinvariant_check,
                              synthesize, exec_trans, pi_pair_place)
from distnet.distributed import (Component, add_location_controls, canonical_distribution,
                                 check_distributed, check_essentially_distributed,
                                 check_externally_distributed, compose,
                                 decompose_to_lsga, Distribution, externally_to_distributed)
from distnet.lts import (SplitView, branching_split_bisim_nets, build_split_lts,
                         step_ready_pairs, step_readiness_equivalent)
from distnet.mstruct import MWitness, conflict_structure, distributability_verdict
from distnet.multiset import SignedMultiset
from distnet.net import (Limits, PetriNet, concurrency_relation, fire, enabled,
                         is_structural_conflict_net, net_equal, reachability)
from distnet.reversible import elide_sides, expand

BIG = Limits(max_markings=10**6)
DESK_NETS = ["single", "conflict", "conflict_conc"]
SEED = 20240611
INSTANCES = 200

_synth_cache = {}


def synthesized(name):
    if name not in _synth_cache:
        _synth_cache[name] = synthesize(load(name), BIG)
    return _synth_cache[name]


def menu_key(pairs):
    return {(tuple(tr), frozenset(tuple(sorted(X.items())) for X in menu)) for tr, menu in pairs}


# 1 ---------------------------------------------------------------------

@pytest.mark.criterion(1)
def test_m_shape_not_distributable():
    N = load("m_shape")
    t0 = time.perf_counter()
    d = distributability_verdict(N)
    elapsed = time.perf_counter() - t0
    assert d.outcome == "not-distributable"
    assert isinstance(d.witness, MWitness)
    assert (d.witness.t, d.witness.u, d.witness.v) == ("t", "u", "v")
    assert d.witness.marking == SignedMultiset({"p": 1, "q": 1})
    assert elapsed < 1.0


# 2 ---------------------------------------------------------------------

BOTTOM = ("1", "2", "3", "4", "5")


@pytest.mark.criterion(2)
def test_ladder_distributable():
    assert distributability_verdict(load("ladder")).outcome == "distributable"


@pytest.mark.criterion(2)
def test_ladder_conflict_structure():
    cs = conflict_structure(load("ladder"))
    bottom = {(i, j) for i, j in cs.ordered if i in BOTTOM and j in BOTTOM}
    assert bottom == {("1", "2"), ("2", "3"), ("3", "4"), ("3", "5"), ("4", "5")}


@pytest.mark.criterion(2)
def test_ladder_visible_skeleton():
    N = load("ladder")
    t0 = time.perf_counter()
    E = expand(build_conflict_replicating(N))
    elapsed = time.perf_counter() - t0
    visible = {t: E.labels[t] for t in E.transitions if E.is_visible(t)}
    bottom_execs = {t: a for t, a in visible.items()
                    if any(t == exec_trans(i, j) for i in BOTTOM for j in BOTTOM)}
    expected = {
        exec_trans("1", "1"): "a", exec_trans("1", "2"): "a",
        exec_trans("2", "2"): "b", exec_trans("2", "3"): "b",
        exec_trans("3", "3"): "c", exec_trans("3", "4"): "c", exec_trans("3", "5"): "c",
        exec_trans("4", "4"): "d", exec_trans("4", "5"): "d",
        exec_trans("5", "5"): "e",
    }
    assert bottom_execs == expected
    # every visible transition of the implementation is an exec
    assert all(t.startswith("exec[") for t in visible)
    assert elapsed < 30.0


@pytest.mark.criterion(2)
def test_ladder_equivalence_not_refuted():
    N = load("ladder")
    E = expand(build_conflict_replicating(N))
    v = branching_split_bisim_nets(E, N)
    assert not v.is_no


# 3 ---------------------------------------------------------------------

@pytest.mark.criterion(3)
def test_tau_conflict_external_but_not_essential():
    N = load("tau_conflict")
    t0 = time.perf_counter()
    ext = check_externally_distributed(N)
    ess = check_essentially_distributed(N)
    elapsed = time.perf_counter() - t0
    assert ext.is_yes
    assert ess.is_no
    assert elapsed < 1.0


# 4 ---------------------------------------------------------------------

@pytest.mark.criterion(4)
@pytest.mark.parametrize("name", DESK_NETS)
def test_correctness_equivalence(name):
    t0 = time.perf_counter()
    rep = synthesized(name)
    v = rep.checks["branching_split_bisimilar"]
    assert v.is_yes, v
    assert not v.truncated
    assert time.perf_counter() - t0 < 600


# 5 ---------------------------------------------------------------------

@pytest.mark.criterion(5)
@pytest.mark.parametrize("name", DESK_NETS)
def test_implementation_distributed(name):
    rep = synthesized(name)
    assert rep.checks["essentially_distributed"].is_yes
    assert rep.checks["distributed_after_conversion"].is_yes
    assert rep.checks["no_violating_chain"].is_yes


# 6 ---------------------------------------------------------------------

@pytest.mark.criterion(6)
@pytest.mark.parametrize("name", DESK_NETS + ["ladder"])
def test_elide_conservation(name):
    R = build_conflict_replicating(load(name))
    E = expand(R)
    pairs = 0
    for t in R.reversible_transitions():
        for w in R.interfaces_of(t):
            lhs, rhs = elide_sides(R, E, t, w)
            assert lhs == rhs, (t, w)
            pairs += 1
    assert pairs > 0


# 7 ---------------------------------------------------------------------

@pytest.mark.criterion(7)
@pytest.mark.parametrize("name", DESK_NETS)
def test_mimic_identity(name):
    N = load(name)
    cs = conflict_structure(N)
    E = expand(build_conflict_replicating(N))
    checked = 0
    for i in cs.order:
        for j in cs.order:
            if not cs.le_conflict(i, j):
                continue
            total = SignedMultiset()
            for x, n in mimic_multiset(N, cs, i, j).items():
                total = total + n * E.effect(x)
            assert total.restrict(set(N.places)) == N.effect(i), (i, j)
            checked += 1
    assert checked == len(cs.order) + len(cs.ordered)


# 8 ---------------------------------------------------------------------

@pytest.mark.criterion(8)
def test_sinvariant_conflict():
    N = load("conflict")
    E = synthesized("conflict").implementation
    v = sinvariant_check(E, N, "a", "b", BIG)
    assert v.is_yes, v
    assert not v.truncated


@pytest.mark.criterion(8)
def test_sinvariant_detects_extra_token():
    N = load("conflict")
    E = synthesized("conflict").implementation
    place = pi_pair_place("a", "b")
    bad = E.replace(initial=E.initial + SignedMultiset({place: 1}))
    v = sinvariant_check(bad, N, "a", "b", BIG)
    assert v.is_no
    assert v.witness["tokens"] == 2


# 9 ---------------------------------------------------------------------

def _reachable_sample(N, rng, k=5):
    g = reachability(N, Limits(max_markings=2000))
    idx = rng.sample(range(len(g)), min(k, len(g)))
    return [g.marking(i) for i in idx]


@pytest.mark.criterion(9)
def test_firing_law():
    rng = random.Random(SEED)
    checked = 0
    for s in range(INSTANCES):
        N = generators.random_net(SEED + s, places=4, transitions=4, tokens=3)
        for M in _reachable_sample(N, rng):
            for G in oracles.enabled_steps(N, dict(M.items())):
                G = SignedMultiset(G)
                assert enabled(N, M, G)
                M2 = fire(N, M, G)
                eff = SignedMultiset()
                for t, n in G.items():
                    eff = eff + n * N.effect(t)
                assert M2 == M + eff
                assert M2.is_multiset()
                checked += 1
    assert checked >= INSTANCES


def _prefixed_component(seed, prefix, mailbox_in=None, mailbox_out=None):
    """Random sequential component with element ids under `prefix`; it may
    read from mailbox_in and write to mailbox_out."""
    C = generators.random_component(seed)
    ren = {x: f"{prefix}{x}" for x in list(C.net.places) + list(C.net.transitions)}
    arcs = {(ren[x], ren[y]): w for (x, y), w in C.net.flow.items()}
    places = {ren[p]: C.net.initial[p] for p in C.net.places}
    labels = {ren[t]: C.net.labels[t] for t in C.net.transitions}
    ins = {ren[p] for p in C.inputs}
    outs = {ren[p] for p in C.outputs}
    first = ren[C.net.transitions[0]]
    if mailbox_in:
        places[mailbox_in] = 0
        arcs[(mailbox_in, first)] = 1
        ins.add(mailbox_in)
    if mailbox_out:
        places[mailbox_out] = 0
        arcs[(first, mailbox_out)] = 1
        outs.add(mailbox_out)
    return Component(PetriNet(places, labels, arcs, name=prefix), ins, outs)


def _triple(s):
    A = _prefixed_component(SEED + 3 * s, "A", mailbox_out="mAB")
    B = _prefixed_component(SEED + 3 * s + 1, "B", mailbox_in="mAB", mailbox_out="mBC")
    C = _prefixed_component(SEED + 3 * s + 2, "C", mailbox_in="mBC")
    return A, B, C


@pytest.mark.criterion(9)
def test_compose_associative():
    for s in range(INSTANCES):
        A, B, C = _triple(s)
        left = compose([compose([A, B]), C])
        right = compose([A, compose([B, C])])
        assert net_equal(left.net, right.net)
        assert left.inputs == right.inputs and left.outputs == right.outputs
        assert "mAB" in left.inputs and "mAB" not in left.outputs


@pytest.mark.criterion(9)
def test_lsga_is_distributed():
    small = Limits(max_markings=20_000)
    for s in range(INSTANCES):
        net = compose(list(_triple(s))).net
        v = check_distributed(net, None, small)
        assert v.is_yes or v.is_unknown, (s, v)
        assert not v.is_no


@pytest.mark.criterion(9)
def test_distributed_implies_structural_conflict():
    hits = 0
    for s in range(INSTANCES):
        N = generators.random_net(SEED + s, places=4, transitions=4, tokens=2)
        conc = concurrency_relation(N)
        if check_distributed(N, None, conc=conc).is_yes:
            hits += 1
            assert is_structural_conflict_net(N, conc=conc).is_yes
    assert hits > 0


def _partitions(xs):
    if not xs:
        yield []
        return
    head, rest = xs[0], xs[1:]
    for part in _partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[head] + part[k]] + part[k + 1:]
        yield [[head]] + part


@pytest.mark.criterion(9)
def test_canonical_distribution_sufficient():
    """If any distribution makes N distributed, the canonical one does
    (exhaustive over all partitions of S and T)."""
    some = 0
    for s in range(INSTANCES):
        N = generators.random_net(SEED + s, places=3, transitions=3, tokens=2)
        conc = concurrency_relation(N)
        canon = check_distributed(N, None, conc=conc).is_yes
        elems = list(N.places) + list(N.transitions)
        exists = False
        for part in _partitions(elems):
            D = Distribution({x: min(block) for block in part for x in block})
            if check_distributed(N, D, conc=conc).is_yes:
                exists = True
                break
        assert exists == canon, s
        some += exists
    assert some > 0


@pytest.mark.criterion(9)
def test_split_bisim_implies_step_readiness():
    certified = 0
    small = Limits(max_markings=20_000)
    for s, N in enumerate(bounded_nets(INSTANCES, places=3, transitions=3, tokens=2, name="spec")):
        labels = {t: f"x{k}" for k, t in enumerate(N.transitions)}
        N = N.replace(labels=labels)
        for other in (add_location_controls(N), N,
                      generators.random_net(SEED + s + 7919, places=3, transitions=3,
                                            tokens=2).replace(labels=labels)):
            v = branching_split_bisim_nets(other, N, small)
            if not v.is_yes:
                continue
            certified += 1
            w = step_readiness_equivalent(other, N, small)
            assert w.is_yes, (N, other, w)
    assert certified >= INSTANCES


def bounded_nets(count, **kw):
    """The first `count` seeded random nets whose state space is finite."""
    out, s = [], 0
    while len(out) < count:
        N = generators.random_net(SEED + s, **kw)
        s += 1
        if not reachability(N, Limits(max_markings=5_000, max_tokens_per_place=8)).truncated:
            out.append(N)
    return out


@pytest.mark.criterion(9)
def test_split_reachability_characterization():
    lim = Limits(max_markings=50_000, max_firing_len=3)
    for N in bounded_nets(INSTANCES, places=3, transitions=3, tokens=2, tau_ratio=0.3):
        view = SplitView(N, lim)
        L = view.materialize()
        got = {(tuple(sorted(v.marking.items())), tuple(sorted(v.firing.items())))
               for v in map(view.decode, L.values)}
        assert got == oracles.split_reachable(N, 3), N.name
        reach = {tuple(sorted(M.items())) for M in reachability(N, lim).nodes}
        for mk, uk in got:
            U = SignedMultiset(dict(uk))
            assert all(N.is_visible(t) for t in U)
            pre_u = SignedMultiset()
            for t, n in U.items():
                pre_u = pre_u + n * N.preset(t)
            assert tuple(sorted((SignedMultiset(dict(mk)) + pre_u).items())) in reach


# 10 --------------------------------------------------------------------

def _fixture_suite():
    nets = [load(n) for n in ("m_shape", "tau_conflict", "single", "conflict", "conflict_conc")]
    f2 = load("tau_conflict")
    nets.append(externally_to_distributed(f2))
    nets.append(PetriNet({"p": 1, "q": 0, "r": 0}, {"a": "a", "b": "b"},
                         {("p", "a"): 1, ("a", "q"): 1, ("q", "b"): 1, ("b", "r"): 1}, name="seq"))
    nets.append(PetriNet({"p": 1, "q": 0}, {"a": "a", "b": "b"},
                         {("p", "a"): 1, ("a", "q"): 1, ("q", "b"): 1, ("b", "p"): 1}, name="loop"))
    nets.append(PetriNet({"p": 2, "q": 0}, {"a": "a", "b": "a", "h": "τ"},
                         {("p", "a"): 1, ("a", "q"): 2, ("q", "b"): 1, ("p", "h"): 1, ("h", "q"): 1},
                         name="weights"))
    for k in range(2, 9):
        nets.extend(bounded_nets(8, places=4, transitions=k, tokens=2, tau_ratio=0.25))
    return [N for N in nets if len(N.transitions) <= 8]


@pytest.mark.criterion(10)
def test_step_ready_pairs_match_brute_force():
    depth = 4
    for N in _fixture_suite():
        lim = Limits(max_markings=20_000)
        got = menu_key(step_ready_pairs(N, lim, max_trace_len=depth))
        want = oracles.step_ready_pairs(N, depth, free_cap=lim.max_step_size)
        assert got == want, N.name
