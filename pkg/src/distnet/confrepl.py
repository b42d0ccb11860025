"""Conflict replicating implementation of a plain net, and the synthesis
pipeline that builds and checks it.

Element names:
  places      copy[p][c], pi[j], pre[j][k], transin[h][j], transout[h][j],
              pi[h#j], fetchin[q][c][i][j], fetchout[q][c][i][j]
  transitions dist[p], ini[j], trans[h][j], exec[i][j], fetch[q][c][i][j],
              fetched[i][j], complete[i][j]
Interface places follow the reversible module (undo@i(t) etc.).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .distributed import (check_distributed, check_essentially_distributed,
                          chain_free, essentially_to_distributed)
from .lts import branching_split_bisim_nets
from .mstruct import ConflictStructure, conflict_structure, distributability_verdict
from .multiset import SignedMultiset, sort_key
from .net import (DEFAULT_LIMITS, TAU, Limits, NetError, PetriNet,
                  concurrency_from_graph, finitary_guard, is_plain, reachability)
from .reversible import (ReversibleNet, ack_place, elide_trans, expand,
                         fire_trans, reset_place, took_place, undo_far_trans,
                         undo_place, rho_place)
from .verdict import Verdict, jsonable, no, unknown, yes


class SynthesisRefused(ValueError):
    def __init__(self, verdict):
        super().__init__(f"net is {verdict.outcome}: {verdict.reason}")
        self.verdict = verdict


def copy_place(p, c):
    return f"copy[{p}][{c}]"


def pi_place(j):
    return f"pi[{j}]"


def pre_place(j, k):
    return f"pre[{j}][{k}]"


def transin_place(h, j):
    return f"transin[{h}][{j}]"


def transout_place(h, j):
    return f"transout[{h}][{j}]"


def pi_pair_place(h, j):
    return f"pi[{h}#{j}]"


def fetchin_place(q, c, i, j):
    return f"fetchin[{q}][{c}][{i}][{j}]"


def fetchout_place(q, c, i, j):
    return f"fetchout[{q}][{c}][{i}][{j}]"


def dist_trans(p):
    return f"dist[{p}]"


def ini_trans(j):
    return f"ini[{j}]"


def trans_trans(h, j):
    return f"trans[{h}][{j}]"


def exec_trans(i, j):
    return f"exec[{i}][{j}]"


def fetch_trans(q, c, i, j):
    return f"fetch[{q}][{c}][{i}][{j}]"


def fetched_trans(i, j):
    return f"fetched[{i}][{j}]"


def complete_trans(i, j):
    return f"complete[{i}][{j}]"


def undo_interface_set(cs: ConflictStructure, i) -> list:
    """Transitions whose preparation an execution of i may have to undo:
    ini[c] for c =# i and trans[b][c] for b <# c =# i."""
    out = [ini_trans(c) for c in cs.order if cs.eq_conflict(c, i)]
    out += [trans_trans(b, c) for c in cs.order if cs.eq_conflict(c, i) for b in cs.below(c)]
    if len(set(out)) != len(out):
        raise NetError(f"undo interface set of {i!r} has repeated elements")
    return out


def build_conflict_replicating(N: PetriNet, self_guard: bool = True) -> ReversibleNet:
    """The conflict replicating implementation of plain N as a reversible net.

    With `self_guard` every j also gets a marked place pi[j#j] which each
    exec[i][j] consumes and fetched[i][j] returns, so location j cannot
    start a second execution before the first has been fetched. Without
    it a maximal j (no l with j <# l) can execute twice in a row.
    """
    if not is_plain(N).is_yes:
        raise NetError("the conflict replicating implementation needs a plain net")
    if not finitary_guard(N).is_yes:
        raise NetError("every transition needs a nonempty preset")
    cs = conflict_structure(N)
    T = cs.order
    places: dict = {p: N.initial[p] for p in N.places}
    labels: dict = {}
    rarcs: dict = {}
    ui: set = set()

    def place(p, n=0):
        if p in places and places[p] != n:
            raise NetError(f"place {p!r} generated twice with different markings")
        if p in labels:
            raise NetError(f"generated id {p!r} collides with a transition")
        places[p] = n

    def trans(t, label=TAU):
        if t in labels or t in places:
            raise NetError(f"generated transition {t!r} collides with an existing element")
        labels[t] = label

    def arc(p, t, kind, w=1):
        key = (p, t, kind)
        if key in rarcs:
            raise NetError(f"arc {key} generated twice")
        rarcs[key] = w

    def guards_of(j):
        out = [pi_pair_place(j, l) for l in cs.above(j)]
        if self_guard:
            out.append(pi_pair_place(j, j))
        return out

    # places
    for j in T:
        for p in N.preset(j):
            place(copy_place(p, j))
        place(pi_place(j), 1)
        for h in cs.below(j):
            place(transin_place(h, j))
            place(transout_place(h, j))
            place(pi_pair_place(h, j), 1)
        if self_guard:
            place(pi_pair_place(j, j), 1)
        for k in T:
            if cs.le_conflict(j, k):
                place(pre_place(j, k))
        for i in T:
            if cs.le_conflict(i, j):
                for q in N.preset(i):
                    for c in N.postset(q):
                        place(fetchin_place(q, c, i, j))
                        place(fetchout_place(q, c, i, j))
    UI = {i: undo_interface_set(cs, i) for i in T}
    for i in T:
        for t in UI[i]:
            ui.add((i, t))
            for mk in (undo_place, reset_place, ack_place):
                place(mk(i, t))

    # distributors
    for p in N.places:
        if N.postset(p):
            d = dist_trans(p)
            trans(d)
            arc(p, d, "in")
            for c in N.postset(p):
                arc(copy_place(p, c), d, "out")

    # reversible preparation steps
    for j in T:
        t = ini_trans(j)
        trans(t)
        for p, w in N.preset(j).items():
            arc(copy_place(p, j), t, "early", w)
        arc(pi_place(j), t, "late")
        for k in T:
            if cs.le_conflict(j, k):
                arc(pre_place(j, k), t, "far")
        for h in cs.below(j):
            arc(transin_place(h, j), t, "far")
        for h in cs.below(j):
            t = trans_trans(h, j)
            trans(t)
            arc(transin_place(h, j), t, "early")
            arc(pi_pair_place(h, j), t, "late")
            arc(transout_place(h, j), t, "far")

    # execution and cleanup
    for j in T:
        for i in T:
            if not cs.le_conflict(i, j):
                continue
            e = exec_trans(i, j)
            trans(e, N.labels[i])
            arc(pre_place(i, j), e, "in")
            arc(pre_place(i, j), e, "out")
            for h in cs.below(j):
                arc(transout_place(h, j), e, "in")
                arc(transout_place(h, j), e, "out")
            for g in guards_of(j):
                arc(g, e, "in")
            for t in UI[i]:
                arc(undo_place(i, t), e, "out")
            fd = fetched_trans(i, j)
            trans(fd)
            for q, wq in N.preset(i).items():
                for c in N.postset(q):
                    arc(fetchin_place(q, c, i, j), e, "out")
                    f = fetch_trans(q, c, i, j)
                    trans(f)
                    arc(fetchin_place(q, c, i, j), f, "in")
                    arc(copy_place(q, c), f, "in", wq)
                    arc(fetchout_place(q, c, i, j), f, "out")
                    arc(fetchout_place(q, c, i, j), fd, "in")
            for t in UI[i]:
                arc(reset_place(i, t), fd, "out")
            for g in guards_of(j):
                arc(g, fd, "out")
            cp = complete_trans(i, j)
            trans(cp)
            for t in UI[i]:
                arc(ack_place(i, t), cp, "in")
            for r, w in N.postset(i).items():
                arc(r, cp, "out", w)

    return ReversibleNet(places, labels, rarcs, ui=ui, interfaces=T,
                         name=N.name + "_impl")


def mimic_multiset(N: PetriNet, cs: ConflictStructure, i, j) -> SignedMultiset:
    """The multiset of implementation transitions whose joint effect,
    restricted to the places of N, should equal the effect of i."""
    acc: dict = {exec_trans(i, j): 1, fetched_trans(i, j): 1, complete_trans(i, j): 1}
    for p, w in N.preset(i).items():
        acc[dist_trans(p)] = acc.get(dist_trans(p), 0) + w
        for c in N.postset(p):
            acc[fetch_trans(p, c, i, j)] = 1
    for t in undo_interface_set(cs, i):
        acc[elide_trans(t, i)] = 1
    return SignedMultiset(acc)


def sinvariant_places(N: PetriNet, cs: ConflictStructure, j, l) -> list:
    """The place set that must always hold exactly one token, for j <# l."""
    if not cs.lt_conflict(j, l):
        raise ValueError(f"need {j!r} <# {l!r}")
    out = []
    for i in cs.order:
        if cs.le_conflict(i, j):
            q = min(N.preset(i), key=sort_key)
            out.append(fetchin_place(q, i, i, j))
            out.append(fetchout_place(q, i, i, j))
    t = trans_trans(j, l)
    f = transout_place(j, l)
    out += [pi_pair_place(j, l), f, took_place(f, t), rho_place(t)]
    return out


def sinvariant_transitions(cs: ConflictStructure, j, l) -> list:
    t = trans_trans(j, l)
    out = [exec_trans(i, j) for i in cs.order if cs.le_conflict(i, j)]
    out += [fire_trans(t), undo_far_trans(t, transout_place(j, l))]
    out += [exec_trans(k, l) for k in cs.order if cs.le_conflict(k, l)]
    return out


def sinvariant_check(impl: PetriNet, spec: PetriNet, j, l,
                     limits: Limits = DEFAULT_LIMITS, cs: Optional[ConflictStructure] = None) -> Verdict:
    """Exactly one token in the invariant place set at every reachable
    marking, and no two transitions of the matching set concurrently
    enabled."""
    cs = cs if cs is not None else conflict_structure(spec)
    S = sinvariant_places(spec, cs, j, l)
    c = impl.compiled
    idx = [c.pidx[p] for p in S]
    g = reachability(impl, limits)
    for m in g.raw_states:
        n = sum(m[k] for k in idx)
        if n != 1:
            return no({"marking": c.decode(m), "tokens": n, "places": S},
                      "invariant set does not hold exactly one token")
    ts = set(sinvariant_transitions(cs, j, l))
    conc = concurrency_from_graph(impl, g)
    for t, u in conc:
        if t in ts and u in ts:
            return no({"pair": (t, u), "marking": conc.witnesses[(t, u)]},
                      "two transitions of the invariant set fire concurrently")
    if g.truncated:
        return unknown("reachability truncated")
    return yes({"places": S, "markings": len(g)})


@dataclass
class SynthesisReport:
    specification: PetriNet
    reversible_form: ReversibleNet
    implementation: PetriNet
    distributed_form: Optional[PetriNet] = None
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def all_passed(self) -> bool:
        return all(v.is_yes for v in self.checks.values())

    @property
    def any_failed(self) -> bool:
        return any(v.is_no for v in self.checks.values())

    def to_json(self) -> dict:
        return {
            "specification": self.specification.name,
            "implementation": {"places": len(self.implementation.places),
                               "transitions": len(self.implementation.transitions)},
            "checks": {k: v.to_json() for k, v in self.checks.items()},
            "notes": list(self.notes),
        }


def synthesize(N: PetriNet, limits: Limits = DEFAULT_LIMITS, check_equivalence: bool = True,
               equivalence_limits: Optional[Limits] = None) -> SynthesisReport:
    start = time.perf_counter()
    verdict = distributability_verdict(N, limits)
    if verdict.outcome != "distributable":
        raise SynthesisRefused(verdict)
    R = build_conflict_replicating(N)
    impl = expand(R)
    report = SynthesisReport(N, R, impl)
    g = reachability(impl, limits)
    conc = concurrency_from_graph(impl, g)
    report.checks["essentially_distributed"] = check_essentially_distributed(impl, limits, conc=conc)
    if g.truncated:
        report.notes.append(f"implementation reachability truncated ({g.cause}) at {len(g)} markings")
    if report.checks["essentially_distributed"].is_no:
        report.notes.append("conversion skipped: implementation not essentially distributed")
    else:
        conv = essentially_to_distributed(impl, limits, check=False)
        report.distributed_form = conv
        gc = reachability(conv, limits)
        cc = concurrency_from_graph(conv, gc)
        report.checks["distributed_after_conversion"] = check_distributed(conv, None, limits, conc=cc)
        report.checks["no_violating_chain"] = chain_free(conv, limits, conc=cc)
    if check_equivalence:
        el = equivalence_limits or limits
        eq = branching_split_bisim_nets(impl, N, el)
        report.checks["branching_split_bisimilar"] = eq
        if eq.is_unknown:
            report.notes.append("equivalence check " + eq.note)
    report.seconds = time.perf_counter() - start
    return report


__all__ = [
    "build_conflict_replicating", "synthesize", "sinvariant_check", "SynthesisReport",
    "SynthesisRefused", "mimic_multiset", "undo_interface_set", "jsonable",
]
