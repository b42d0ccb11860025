"""Components with interfaces, asynchronous composition and distributions."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .multiset import SignedMultiset, sort_key
from .net import (DEFAULT_LIMITS, TAU, Limits, NetError, PetriNet,
                  concurrency_relation)
from .verdict import Verdict, no, unknown, yes


class InvalidComponent(ValueError):
    pass


class CompositionError(ValueError):
    pass


class NotDistributed(ValueError):
    pass


@dataclass(frozen=True)
class Component:
    net: PetriNet
    inputs: frozenset = frozenset()
    outputs: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))

    def interface_problems(self) -> list:
        N = self.net
        out = []
        places = set(N.places)
        for p in sorted((self.inputs | self.outputs) - places, key=sort_key):
            out.append({"problem": "interface place not declared", "place": p})
        for p in sorted(self.inputs & self.outputs, key=sort_key):
            out.append({"problem": "place is both input and output", "place": p})
        for p in sorted(self.outputs & places, key=sort_key):
            if N.postset(p):
                out.append({"problem": "output place has posttransitions", "place": p,
                            "transitions": sorted(N.postset(p).support(), key=sort_key)})
        return out


def validate_component(C: Component, mode: str = "structural",
                       limits: Limits = DEFAULT_LIMITS, budget: int = 100_000) -> Verdict:
    """Is C a sequential component? Interface violations yield `no` with
    note "invalid interface"; non-sequentiality yields note "not sequential".

    Structural mode searches for the control set Q; if the search exceeds
    `budget` nodes it falls back to the behavioural check, noted in the
    verdict.
    """
    probs = C.interface_problems()
    if probs:
        return no({"interface": probs}, "invalid interface")
    if mode == "structural":
        found, q = find_control_set(C, budget)
        if found is True:
            return yes({"Q": sorted(q, key=sort_key)}, "control set found")
        if found is False:
            return no(None, "not sequential: no control set Q exists")
        res = _behavioural(C, limits)
        return Verdict(res.status, res.witness,
                       "structural search budget exceeded; behavioural check: " + res.note,
                       res.truncated)
    if mode == "behavioral":
        return _behavioural(C, limits)
    raise ValueError(f"unknown mode {mode!r}")


def _behavioural(C: Component, limits: Limits) -> Verdict:
    conc = concurrency_relation(C.net, limits)
    for t, u in conc:
        return no({"pair": (t, u), "marking": conc.witnesses[(t, u)]},
                  "not sequential: two transitions fire concurrently")
    if conc.truncated:
        return unknown("reachability truncated")
    return yes(None, "no reachable marking enables a two-element step")


def find_control_set(C: Component, budget: int = 100_000):
    """Exact search for Q with |pre(t)|Q| = |post(t)|Q| = 1 for all t and
    |M0|Q| = 1. Returns (True, Q), (False, None) or (None, None) when the
    node budget runs out."""
    N = C.net
    cand = [p for p in N.places if p not in C.inputs and p not in C.outputs]
    cset = set(cand)
    cons = []
    for t in N.transitions:
        cons.append({p: w for p, w in N.preset(t).items() if p in cset})
        cons.append({p: w for p, w in N.postset(t).items() if p in cset})
    cons.append({p: n for p, n in N.initial.items() if p in cset})
    nodes = [0]

    def propagate(val: dict) -> bool:
        changed = True
        while changed:
            changed = False
            for con in cons:
                total = sum(w for p, w in con.items() if val.get(p) == 1)
                if total > 1:
                    return False
                free = [p for p in con if p not in val]
                if total == 1:
                    for p in free:
                        val[p] = 0
                        changed = True
                    continue
                ones = []
                for p in free:
                    if con[p] > 1:
                        val[p] = 0
                        changed = True
                    else:
                        ones.append(p)
                if not ones:
                    return False
                if len(ones) == 1:
                    val[ones[0]] = 1
                    changed = True
        return True

    def search(val: dict):
        nodes[0] += 1
        if nodes[0] > budget:
            return None
        if not propagate(val):
            return False
        best = None
        for con in cons:
            if any(val.get(p) == 1 for p in con):
                continue
            ones = [p for p in con if p not in val]
            if best is None or len(ones) < len(best):
                best = ones
        if best is None:
            return {p for p, v in val.items() if v == 1}
        for p in sorted(best, key=sort_key):
            got = search({**val, p: 1})
            if got is None:
                return None
            if got is not False:
                return got
        return False

    res = search({})
    if res is None:
        return None, None
    if res is False:
        return False, None
    return True, frozenset(res)


def compose(components: list) -> Component:
    """Asynchronous parallel composition."""
    comps = list(components)
    if not comps:
        raise CompositionError("nothing to compose")
    for C in comps:
        probs = C.interface_problems()
        if probs:
            raise InvalidComponent(f"{C.net.name}: {probs[0]['problem']} ({probs[0]['place']})")
    for a in range(len(comps)):
        for b in range(a + 1, len(comps)):
            A, B = comps[a], comps[b]
            ea = set(A.net.places) | set(A.net.transitions)
            eb = set(B.net.places) | set(B.net.transitions)
            ia, ib = A.inputs | A.outputs, B.inputs | B.outputs
            if ea & eb != ia & ib:
                bad = sorted((ea & eb) ^ (ia & ib), key=sort_key)
                raise CompositionError(f"components overlap outside their interfaces at {bad}")
            if A.inputs & B.inputs:
                raise CompositionError(f"shared input places {sorted(A.inputs & B.inputs, key=sort_key)}")
    places: set = set()
    transitions: dict = {}
    arcs: dict = {}
    initial = SignedMultiset()
    for C in comps:
        N = C.net
        places.update(N.places)
        for t in N.transitions:
            if t in transitions and transitions[t] != N.labels[t]:
                raise CompositionError(f"label disagreement on {t!r}")
            transitions[t] = N.labels[t]
        for k, w in N.flow.items():
            arcs[k] = w
        initial = initial + N.initial
    inputs = frozenset().union(*(C.inputs for C in comps))
    outputs = frozenset().union(*(C.outputs for C in comps)) - inputs
    name = comps[0].net.name if len(comps) == 1 else "composition"
    net = PetriNet(sorted(places, key=sort_key), transitions, arcs, initial, name=name)
    return Component(net, inputs, outputs)


class Distribution:
    """Assignment of places and transitions to locations."""

    def __init__(self, location: dict):
        self.location = dict(location)

    def __getitem__(self, x):
        return self.location[x]

    def same(self, x, y) -> bool:
        return self.location[x] == self.location[y]

    def classes(self) -> dict:
        out: dict = {}
        for x, loc in self.location.items():
            out.setdefault(loc, set()).add(x)
        return {loc: out[loc] for loc in sorted(out, key=sort_key)}

    def __eq__(self, other):
        return isinstance(other, Distribution) and self.location == other.location

    def __repr__(self):
        return f"Distribution({self.location!r})"

    def to_json(self) -> dict:
        return {str(loc): sorted(map(str, members)) for loc, members in self.classes().items()}


def canonical_distribution(N: PetriNet) -> Distribution:
    parent = {x: x for x in N.places + N.transitions}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in N.transitions:
        for s in N.preset(t):
            a, b = find(s), find(t)
            if a != b:
                parent[a] = b
    members: dict = {}
    for x in parent:
        members.setdefault(find(x), []).append(x)
    loc = {}
    for group in members.values():
        least = min(group, key=sort_key)
        for x in group:
            loc[x] = least
    return Distribution(loc)


def preset_overlap_chain(N: PetriNet, t, u) -> Optional[list]:
    """Shortest t = t0, ..., tn = u with consecutive presets overlapping."""
    if t == u:
        return [t]
    by_place: dict = {}
    for x in N.transitions:
        for s in N.preset(x):
            by_place.setdefault(s, []).append(x)
    prev = {t: None}
    queue = deque([t])
    while queue:
        x = queue.popleft()
        for s in N.preset(x):
            for y in by_place[s]:
                if y not in prev:
                    prev[y] = x
                    if y == u:
                        chain = [u]
                        while prev[chain[-1]] is not None:
                            chain.append(prev[chain[-1]])
                        return chain[::-1]
                    queue.append(y)
    return None


def find_violating_chain(N: PetriNet, limits: Limits = DEFAULT_LIMITS, conc=None) -> Optional[dict]:
    """A chain t0 ... tn with t0 concurrent to tn and overlapping
    consecutive presets, or None if the explored markings show none."""
    conc = conc if conc is not None else concurrency_relation(N, limits)
    for t, u in conc:
        chain = preset_overlap_chain(N, t, u)
        if chain is not None:
            return {"chain": chain, "marking": conc.witnesses[(t, u)]}
    return None


def chain_free(N: PetriNet, limits: Limits = DEFAULT_LIMITS, conc=None) -> Verdict:
    """`yes` iff no violating chain exists (an independent route to
    distributedness that avoids building a distribution)."""
    conc = conc if conc is not None else concurrency_relation(N, limits)
    w = find_violating_chain(N, limits, conc)
    if w is not None:
        return no(w, "violating chain")
    if conc.truncated:
        return unknown("reachability truncated")
    return yes()


def _check(N: PetriNet, D: Optional[Distribution], limits: Limits, relevant, kind: str, conc=None) -> Verdict:
    canonical = D is None
    D = D if D is not None else canonical_distribution(N)
    for t in N.transitions:
        for s in N.preset(t):
            if not D.same(s, t):
                return no({"condition": "1", "place": s, "transition": t},
                          "a transition is not co-located with a preplace")
    conc = conc if conc is not None else concurrency_relation(N, limits)
    for t, u in conc:
        if relevant(t, u) and D.same(t, u):
            w = {"condition": kind, "pair": (t, u), "location": D[t],
                 "marking": conc.witnesses[(t, u)]}
            if canonical:
                w["chain"] = preset_overlap_chain(N, t, u)
            return no(w, "concurrent transitions share a location")
    if conc.truncated:
        return unknown("reachability truncated")
    return yes()


def check_distributed(N: PetriNet, D: Optional[Distribution] = None,
                      limits: Limits = DEFAULT_LIMITS, conc=None) -> Verdict:
    return _check(N, D, limits, lambda t, u: True, "2", conc)


def check_essentially_distributed(N: PetriNet, limits: Limits = DEFAULT_LIMITS, conc=None) -> Verdict:
    vis = N.is_visible
    return _check(N, None, limits, lambda t, u: vis(t) or vis(u), "2'", conc)


def check_externally_distributed(N: PetriNet, limits: Limits = DEFAULT_LIMITS, conc=None) -> Verdict:
    vis = N.is_visible
    return _check(N, None, limits, lambda t, u: vis(t) and vis(u), "2''", conc)


def _fresh(base: str, taken: set) -> str:
    name, n = base, 0
    while name in taken:
        n += 1
        name = f"{base}_{n}"
    taken.add(name)
    return name


def control_place_name(loc) -> str:
    return f"ctl[{loc}]"


def add_location_controls(N: PetriNet) -> PetriNet:
    """One marked control place per canonical location holding transitions,
    on a self-loop with each of them."""
    D = canonical_distribution(N)
    taken = set(N.places) | set(N.transitions)
    places = {p: N.initial[p] for p in N.places}
    arcs = dict(N.flow)
    for loc, members in D.classes().items():
        ts = sorted((x for x in members if x in N.labels), key=sort_key)
        if not ts:
            continue
        c = _fresh(control_place_name(loc), taken)
        places[c] = 1
        for t in ts:
            arcs[(c, t)] = arcs.get((c, t), 0) + 1
            arcs[(t, c)] = arcs.get((t, c), 0) + 1
    return PetriNet(places, N.labels, arcs, name=N.name)


def essentially_to_distributed(N: PetriNet, limits: Limits = DEFAULT_LIMITS, check: bool = True) -> PetriNet:
    if check:
        v = check_essentially_distributed(N, limits)
        if v.is_no:
            raise NotDistributed(f"net is not essentially distributed: {v.witness}")
    return add_location_controls(N)


def externally_to_distributed(N: PetriNet, limits: Limits = DEFAULT_LIMITS, check: bool = True) -> PetriNet:
    if check:
        v = check_externally_distributed(N, limits)
        if v.is_no:
            raise NotDistributed(f"net is not externally distributed: {v.witness}")
    return add_location_controls(N)


def decompose_to_lsga(N: PetriNet, D: Optional[Distribution] = None,
                      limits: Limits = DEFAULT_LIMITS, check: bool = True):
    """Split a distributed net into sequential components, one per location.

    Each component gets the places and transitions of its location, the
    postplaces of its transitions lying elsewhere as outputs, all its own
    places as inputs, and a marked control place on a self-loop with every
    one of its transitions. Returns (components, recomposed net).
    """
    D = D if D is not None else canonical_distribution(N)
    if check:
        v = check_distributed(N, D, limits)
        if not v.is_yes:
            raise NotDistributed(f"net is not distributed w.r.t. the distribution: {v.note}")
    taken = set(N.places) | set(N.transitions)
    comps = []
    for loc, members in D.classes().items():
        ps = {x for x in members if x in set(N.places)}
        ts = {x for x in members if x in N.labels}
        outs = set()
        for t in ts:
            outs.update(p for p in N.postset(t) if p not in members)
        ctl = _fresh(control_place_name(loc), taken)
        places = {p: N.initial[p] for p in sorted(ps, key=sort_key)}
        places.update({p: 0 for p in outs})
        places[ctl] = 1
        arcs = {}
        for (x, y), w in N.flow.items():
            if x in ts or y in ts:
                arcs[(x, y)] = w
        for t in ts:
            arcs[(ctl, t)] = 1
            arcs[(t, ctl)] = 1
        net = PetriNet(places, {t: N.labels[t] for t in ts}, arcs, name=f"{N.name}@{loc}")
        comps.append(Component(net, frozenset(ps), frozenset(outs)))
    recomposed = compose(comps).net
    return comps, PetriNet(recomposed.places, recomposed.labels, recomposed.flow,
                           recomposed.initial, name=N.name + "_lsga")


__all__ = [
    "Component", "Distribution", "InvalidComponent", "CompositionError", "NotDistributed",
    "validate_component", "find_control_set", "compose", "canonical_distribution",
    "check_distributed", "check_essentially_distributed", "check_externally_distributed",
    "essentially_to_distributed", "externally_to_distributed", "add_location_controls",
    "decompose_to_lsga", "preset_overlap_chain", "find_violating_chain", "chain_free", "TAU", "NetError",
]
