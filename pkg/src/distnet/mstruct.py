"""Conflict structure and the distributability verdict."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .multiset import SignedMultiset, sort_key
from .net import (DEFAULT_LIMITS, Limits, PetriNet, finitary_guard, is_plain,
                  is_structural_conflict_net, reachability)
from .net import concurrency_from_graph


@dataclass(frozen=True)
class ConflictStructure:
    order: tuple            # transitions in ascending order
    conflict: frozenset     # unordered pairs as sorted tuples
    ordered: frozenset      # (i, j) with i < j and i # j

    def rank(self, t) -> int:
        return self.order.index(t)

    def conflicts(self, i, j) -> bool:
        return i != j and tuple(sorted((i, j), key=sort_key)) in self.conflict

    def eq_conflict(self, i, j) -> bool:
        """i =# j: equal or in conflict."""
        return i == j or self.conflicts(i, j)

    def lt_conflict(self, i, j) -> bool:
        return (i, j) in self.ordered

    def le_conflict(self, i, j) -> bool:
        return i == j or (i, j) in self.ordered

    def below(self, j) -> list:
        """All h with h <# j."""
        return [h for h in self.order if (h, j) in self.ordered]

    def above(self, j) -> list:
        """All l with j <# l."""
        return [l for l in self.order if (j, l) in self.ordered]

    def to_json(self) -> dict:
        return {"order": list(self.order),
                "ordered_conflicts": [list(p) for p in sorted(self.ordered, key=sort_key)]}


def conflict_structure(N: PetriNet) -> ConflictStructure:
    order = N.transitions
    conflict = set()
    ordered = set()
    pres = {t: N.preset(t).support() for t in order}
    for a, i in enumerate(order):
        for j in order[a + 1:]:
            if pres[i] & pres[j]:
                conflict.add((i, j))
                ordered.add((i, j))
    return ConflictStructure(tuple(order), frozenset(conflict), frozenset(ordered))


@dataclass(frozen=True)
class MWitness:
    t: object
    u: object
    v: object
    marking: SignedMultiset

    def to_json(self) -> dict:
        return {"t": self.t, "u": self.u, "v": self.v,
                "marking": {str(k): n for k, n in self.marking.items()}}


def pure_m_candidates(N: PetriNet) -> list:
    """Structural triples (t, u, v), t < v: t and u share a preplace, u and v
    share a preplace, t and v share none."""
    pres = {t: N.preset(t).support() for t in N.transitions}
    out = []
    for u in N.transitions:
        nb = [x for x in N.transitions if x != u and pres[x] & pres[u]]
        for a, t in enumerate(nb):
            for v in nb[a + 1:]:
                if not (pres[t] & pres[v]):
                    out.append((t, u, v))
    out.sort(key=sort_key)
    return out


class _Unknown:
    def __repr__(self):
        return "UNKNOWN"


UNKNOWN = _Unknown()


def find_fully_reachable_pure_M(N: PetriNet, limits: Limits = DEFAULT_LIMITS, graph=None):
    """First reachable marking (breadth-first) enabling every transition of
    a candidate triple. Returns an MWitness, None, or UNKNOWN when the
    search was truncated without a hit.

    Since the union of presets is a pointwise maximum, it is covered by M
    exactly when each of the three transitions is enabled at M.
    """
    cands = pure_m_candidates(N)
    if not cands:
        return None
    graph = graph if graph is not None else reachability(N, limits)
    c = N.compiled
    by_u: dict = {}
    for t, u, v in cands:
        by_u.setdefault(c.tidx[u], []).append((c.tidx[t], c.tidx[v]))
    for m in graph.raw_states:
        en = set(c.enabled(m))
        hits = []
        for u, pairs in by_u.items():
            if u in en:
                hits.extend((t, u, v) for t, v in pairs if t in en and v in en)
        if hits:
            t, u, v = min((c.trans[t], c.trans[u], c.trans[v]) for t, u, v in hits)
            return MWitness(t, u, v, c.decode(m))
    if graph.truncated:
        return UNKNOWN
    return None


@dataclass(frozen=True)
class DistributabilityVerdict:
    outcome: str   # distributable | not-distributable | inapplicable | unknown
    witness: Optional[object] = None
    reason: str = ""

    def to_json(self) -> dict:
        d = {"outcome": self.outcome}
        if self.reason:
            d["reason"] = self.reason
        if self.witness is not None:
            w = self.witness
            d["witness"] = w.to_json() if hasattr(w, "to_json") else w
        return d


def distributability_verdict(N: PetriNet, limits: Limits = DEFAULT_LIMITS) -> DistributabilityVerdict:
    plain = is_plain(N)
    if not plain.is_yes:
        return DistributabilityVerdict("inapplicable", plain.witness, "net is not plain: " + plain.note)
    fin = finitary_guard(N)
    if not fin.is_yes:
        return DistributabilityVerdict("inapplicable", fin.witness, "finitary guard fails: " + fin.note)
    graph = reachability(N, limits)
    scn = is_structural_conflict_net(N, limits, conc=concurrency_from_graph(N, graph))
    if scn.is_no:
        return DistributabilityVerdict("inapplicable", scn.witness,
                                       "not a structural conflict net: " + scn.note)
    if scn.is_unknown:
        return DistributabilityVerdict("unknown", None, "reachability truncated")
    w = find_fully_reachable_pure_M(N, limits, graph)
    if isinstance(w, MWitness):
        return DistributabilityVerdict("not-distributable", w, "fully reachable pure M")
    if w is UNKNOWN:
        return DistributabilityVerdict("unknown", None, "reachability truncated")
    return DistributabilityVerdict("distributable", None, "no fully reachable pure M")
