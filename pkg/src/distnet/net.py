"""Labelled place/transition nets: firing, bounded reachability, predicates."""

from __future__ import annotations

from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable, Optional

from .multiset import EMPTY, SignedMultiset, sort_key
from .verdict import Verdict, no, unknown, yes

TAU = "τ"


class NetError(ValueError):
    """Ill-formed net or reference to an undeclared element."""


class NotEnabled(ValueError):
    pass


@dataclass(frozen=True)
class Limits:
    max_markings: int = 100_000
    max_tokens_per_place: int = 16
    max_firing_len: int = 8
    # multiplicity cap for preset-free transitions when enumerating all steps
    max_step_size: int = 2

    def to_json(self) -> dict:
        return {
            "max_markings": self.max_markings,
            "max_tokens_per_place": self.max_tokens_per_place,
            "max_firing_len": self.max_firing_len,
            "max_step_size": self.max_step_size,
        }


DEFAULT_LIMITS = Limits()


class PetriNet:
    """A finite labelled net (S, T, F, M0, l).

    `places` is an iterable of ids or a mapping id -> initial tokens.
    `transitions` is an iterable of ids or a mapping id -> label; a missing
    label defaults to the transition id, TAU marks an internal transition.
    `arcs` is a mapping (src, dst) -> weight or an iterable of (src, dst)
    or (src, dst, weight) triples. Zero weights are dropped.
    """

    def __init__(self, places=(), transitions=(), arcs=(), initial=None,
                 labels=None, name: str = "net"):
        self.name = name
        init: dict = {}
        if isinstance(places, Mapping):
            init.update({p: n for p, n in places.items() if n})
            places = list(places)
        lab: dict = {}
        if isinstance(transitions, Mapping):
            lab.update(transitions)
            transitions = list(transitions)
        if labels:
            lab.update(labels)
        if initial is not None:
            for p, n in SignedMultiset(initial).items():
                init[p] = init.get(p, 0) + n
        pset, tset = set(places), set(transitions)
        if len(pset) != len(list(places)) or len(tset) != len(list(transitions)):
            raise NetError("duplicate element id")
        both = pset & tset
        if both:
            raise NetError(f"ids used as both place and transition: {sorted(both)}")
        self.places = tuple(sorted(pset, key=sort_key))
        self.transitions = tuple(sorted(tset, key=sort_key))

        flow: dict = {}
        items = arcs.items() if isinstance(arcs, Mapping) else (
            ((a[0], a[1]), a[2] if len(a) > 2 else 1) for a in arcs)
        for (x, y), w in items:
            if not isinstance(w, int) or w < 0:
                raise NetError(f"bad arc weight {w!r} on {x}->{y}")
            if not ((x in pset and y in tset) or (x in tset and y in pset)):
                raise NetError(f"arc {x}->{y} must join a declared place and transition")
            if w:
                flow[(x, y)] = flow.get((x, y), 0) + w
        self.flow = flow

        m0 = SignedMultiset(init)
        if not m0.is_multiset():
            raise NetError("initial marking must be nonnegative")
        extra = m0.support() - pset
        if extra:
            raise NetError(f"initial marking on undeclared places {sorted(extra, key=sort_key)}")
        self.initial = m0
        for t in lab:
            if t not in tset:
                raise NetError(f"label for undeclared transition {t!r}")
        self.labels = {t: lab.get(t, t) for t in self.transitions}

        pre: dict = {x: {} for x in self.places + self.transitions}
        post: dict = {x: {} for x in self.places + self.transitions}
        for (x, y), w in flow.items():
            post[x][y] = w
            pre[y][x] = w
        self._pre = {x: SignedMultiset(d) for x, d in pre.items()}
        self._post = {x: SignedMultiset(d) for x, d in post.items()}
        self._compiled = None

    # structure
    def _check(self, x):
        if x not in self._pre:
            raise NetError(f"unknown element {x!r}")

    def preset(self, x) -> SignedMultiset:
        self._check(x)
        return self._pre[x]

    def postset(self, x) -> SignedMultiset:
        self._check(x)
        return self._post[x]

    def effect(self, t) -> SignedMultiset:
        self._check(t)
        if t not in self.labels:
            raise NetError(f"effect is defined for transitions only, got place {t!r}")
        return self._post[t] - self._pre[t]

    def label(self, t):
        return self.labels[t]

    def is_visible(self, t) -> bool:
        return self.labels[t] != TAU

    def weight(self, x, y) -> int:
        return self.flow.get((x, y), 0)

    def step_preset(self, G) -> SignedMultiset:
        acc: dict = {}
        for t, n in SignedMultiset(G).items():
            for p, w in self.preset(t).items():
                acc[p] = acc.get(p, 0) + n * w
        return SignedMultiset(acc)

    def step_effect(self, G) -> SignedMultiset:
        acc: dict = {}
        for t, n in SignedMultiset(G).items():
            for p, w in self.effect(t).items():
                acc[p] = acc.get(p, 0) + n * w
        return SignedMultiset(acc)

    def step_label(self, G) -> SignedMultiset:
        acc: dict = {}
        for t, n in SignedMultiset(G).items():
            a = self.labels[t]
            acc[a] = acc.get(a, 0) + n
        return SignedMultiset(acc)

    def canonical_key(self):
        return (
            self.places,
            self.transitions,
            tuple(sorted(self.flow.items(), key=lambda kv: sort_key(kv[0]))),
            self.initial,
            tuple((t, self.labels[t]) for t in self.transitions),
        )

    def __eq__(self, other):
        if not isinstance(other, PetriNet):
            return NotImplemented
        return self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())

    def __repr__(self):
        return (f"PetriNet({self.name!r}, |S|={len(self.places)}, "
                f"|T|={len(self.transitions)}, |F|={len(self.flow)})")

    def replace(self, **changes) -> "PetriNet":
        """Copy with some of places/transitions/arcs/initial/labels/name replaced."""
        args = dict(places=self.places, transitions=self.transitions,
                    arcs=dict(self.flow), initial=self.initial,
                    labels=dict(self.labels), name=self.name)
        args.update(changes)
        return PetriNet(**args)

    @property
    def compiled(self) -> "Compiled":
        if self._compiled is None:
            self._compiled = Compiled(self)
        return self._compiled


class Compiled:
    """Index-based view of a net for exploration; markings are bytes."""

    def __init__(self, net: PetriNet):
        self.net = net
        self.places = net.places
        self.trans = net.transitions
        self.pidx = {p: i for i, p in enumerate(self.places)}
        self.tidx = {t: i for i, t in enumerate(self.trans)}
        self.pre = [tuple((self.pidx[p], w) for p, w in net.preset(t).items()) for t in self.trans]
        self.post = [tuple((self.pidx[p], w) for p, w in net.postset(t).items()) for t in self.trans]
        self.eff = [tuple((self.pidx[p], w) for p, w in net.effect(t).items()) for t in self.trans]
        self.visible = [net.is_visible(t) for t in self.trans]
        self.labels = [net.labels[t] for t in self.trans]
        self.by_first = [[] for _ in self.places]
        self.free = []
        for k, pre in enumerate(self.pre):
            if pre:
                self.by_first[min(i for i, _ in pre)].append(k)
            else:
                self.free.append(k)
        self.m0 = self.encode(net.initial)

    def encode(self, marking) -> bytes:
        b = bytearray(len(self.places))
        for p, n in SignedMultiset(marking).items():
            if p not in self.pidx:
                raise NetError(f"unknown place {p!r}")
            if n < 0 or n > 255:
                raise NetError(f"token count {n} on {p!r} outside the explorable range 0..255")
            b[self.pidx[p]] = n
        return bytes(b)

    def decode(self, m: bytes) -> SignedMultiset:
        return SignedMultiset._raw(tuple((self.places[i], v) for i, v in enumerate(m) if v))

    def enabled(self, m: bytes) -> list:
        out = list(self.free)
        pre = self.pre
        for i, v in enumerate(m):
            if v:
                for k in self.by_first[i]:
                    for j, w in pre[k]:
                        if m[j] < w:
                            break
                    else:
                        out.append(k)
        out.sort()
        return out

    def is_enabled(self, m: bytes, k: int) -> bool:
        return all(m[j] >= w for j, w in self.pre[k])

    def fire(self, m: bytes, k: int, cap: int) -> Optional[bytes]:
        """Fire transition k; None if a place would exceed `cap` tokens."""
        b = bytearray(m)
        for i, d in self.eff[k]:
            v = b[i] + d
            if v > cap:
                return None
            b[i] = v
        return bytes(b)

    def fire_step(self, m: bytes, step, cap: int) -> Optional[bytes]:
        acc = list(m)
        for k, n in step:
            for i, d in self.eff[k]:
                acc[i] += n * d
        if max(acc, default=0) > cap:
            return None
        return bytes(acc)

    def steps(self, m: bytes, allowed=None, free_cap: int = 2):
        """All nonempty steps enabled at m, as tuples of (transition, count).

        Bounded backtracking in transition order. Multiplicities are limited
        by the tokens available; preset-free transitions by `free_cap`.
        """
        cands = [k for k in self.enabled(m) if allowed is None or allowed[k]]
        out: list = []
        rem = list(m)

        def rec(pos: int, chosen: list):
            if pos == len(cands):
                if chosen:
                    out.append(tuple(chosen))
                return
            k = cands[pos]
            pre = self.pre[k]
            if pre:
                cmax = min(rem[j] // w for j, w in pre)
            else:
                cmax = free_cap
            for c in range(cmax, -1, -1):
                if c:
                    for j, w in pre:
                        rem[j] -= c * w
                    chosen.append((k, c))
                rec(pos + 1, chosen)
                if c:
                    chosen.pop()
                    for j, w in pre:
                        rem[j] += c * w

        rec(0, [])
        return out


# element-level operations

def preset_postset_effect(N: PetriNet, x):
    """(preset, postset, effect) of x; the effect is only defined for transitions."""
    return N.preset(x), N.postset(x), N.effect(x)


def enabled(N: PetriNet, M, G) -> bool:
    G = SignedMultiset(G)
    if not G or not G.is_multiset():
        raise ValueError("a step is a nonempty multiset of transitions")
    return N.step_preset(G) <= SignedMultiset(M)


def fire(N: PetriNet, M, G) -> SignedMultiset:
    if not enabled(N, M, G):
        raise NotEnabled(f"step {SignedMultiset(G)!r} is not enabled at {SignedMultiset(M)!r}")
    return SignedMultiset(M) + N.step_effect(G)


# exploration

class Exploration:
    """Result of a bounded breadth-first search over hashable states."""

    def __init__(self):
        self.states: list = []
        self.index: dict = {}
        self.edges: list = []  # (src index, label, dst index)
        self.truncated = False
        self.causes: set = set()

    @property
    def cause(self) -> Optional[str]:
        return ",".join(sorted(self.causes)) or None


def bfs(initial, successors, max_states: int, keep_edges: bool = True) -> Exploration:
    """Breadth-first closure. `successors(s)` yields (label, s') pairs, where
    s' may be None to report a successor cut off by a token bound."""
    ex = Exploration()
    ex.states.append(initial)
    ex.index[initial] = 0
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for lab, nxt in successors(ex.states[i]):
            if nxt is None:
                ex.truncated = True
                ex.causes.add("max-tokens")
                continue
            j = ex.index.get(nxt)
            if j is None:
                if len(ex.states) >= max_states:
                    ex.truncated = True
                    ex.causes.add("max-markings")
                    continue
                j = len(ex.states)
                ex.states.append(nxt)
                ex.index[nxt] = j
                queue.append(j)
            if keep_edges:
                ex.edges.append((i, lab, j))
    return ex


class ReachGraph:
    """Reachable markings of a net (bounded), breadth-first ordered."""

    def __init__(self, net: PetriNet, ex: Exploration, step_mode: str):
        self.net = net
        self.step_mode = step_mode
        self._ex = ex
        self.truncated = ex.truncated
        self.cause = ex.cause

    @property
    def raw_states(self) -> list:
        return self._ex.states

    def __len__(self):
        return len(self._ex.states)

    def marking(self, i: int) -> SignedMultiset:
        return self.net.compiled.decode(self._ex.states[i])

    @property
    def nodes(self) -> list:
        return [self.marking(i) for i in range(len(self))]

    @property
    def initial(self) -> SignedMultiset:
        return self.marking(0)

    def _step(self, lab) -> SignedMultiset:
        c = self.net.compiled
        if isinstance(lab, int):
            return SignedMultiset({c.trans[lab]: 1})
        return SignedMultiset({c.trans[k]: n for k, n in lab})

    @property
    def edges(self) -> list:
        return [(self.marking(i), self._step(lab), self.marking(j)) for i, lab, j in self._ex.edges]

    @property
    def raw_edges(self) -> list:
        return self._ex.edges


def reachability(N: PetriNet, limits: Limits = DEFAULT_LIMITS, step_mode: str = "single") -> ReachGraph:
    c = N.compiled
    cap = min(limits.max_tokens_per_place, 255)
    if step_mode == "single":
        def succ(m):
            for k in c.enabled(m):
                yield k, c.fire(m, k, cap)
    elif step_mode == "all-steps":
        def succ(m):
            for st in c.steps(m, free_cap=limits.max_step_size):
                yield st, c.fire_step(m, st, cap)
    else:
        raise ValueError(f"unknown step mode {step_mode!r}")
    ex = bfs(c.m0, succ, limits.max_markings)
    if step_mode == "all-steps" and c.free:
        # steps of preset-free transitions are unbounded; the enumeration was capped
        ex.truncated = True
        ex.causes.add("step-bound")
    return ReachGraph(N, ex, step_mode)


def _pair(t, u):
    return (t, u) if sort_key(t) <= sort_key(u) else (u, t)


class ConcurrencyRelation:
    """Unordered pairs t, u (t = u allowed) such that {t}+{u} is enabled at
    some explored reachable marking."""

    def __init__(self, pairs, truncated: bool, witnesses: dict):
        self.pairs = frozenset(pairs)
        self.truncated = truncated
        self.witnesses = witnesses  # pair -> marking enabling it

    def __contains__(self, pair):
        return _pair(*pair) in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs, key=sort_key))

    def __len__(self):
        return len(self.pairs)

    def __eq__(self, other):
        if isinstance(other, ConcurrencyRelation):
            return self.pairs == other.pairs
        return self.pairs == frozenset(_pair(*p) for p in other)

    __hash__ = None


def concurrency_from_graph(N: PetriNet, graph: ReachGraph) -> ConcurrencyRelation:
    c = N.compiled
    pre_maps = [dict(p) for p in c.pre]
    overlap: dict = {}
    found: dict = {}
    for m in graph.raw_states:
        en = c.enabled(m)
        for x, k in enumerate(en):
            for l in en[x:]:
                if (k, l) in found:
                    continue
                if k == l:
                    ok = all(m[j] >= 2 * w for j, w in c.pre[k])
                else:
                    ov = overlap.get((k, l))
                    if ov is None:
                        ov = set(pre_maps[k]) & set(pre_maps[l])
                        overlap[(k, l)] = ov
                    ok = all(m[j] >= pre_maps[k][j] + pre_maps[l][j] for j in ov)
                if ok:
                    found[(k, l)] = m
    pairs = {}
    for (k, l), m in found.items():
        pairs[_pair(c.trans[k], c.trans[l])] = c.decode(m)
    return ConcurrencyRelation(pairs.keys(), graph.truncated, pairs)


def concurrency_relation(N: PetriNet, limits: Limits = DEFAULT_LIMITS) -> ConcurrencyRelation:
    return concurrency_from_graph(N, reachability(N, limits))


# predicates

def is_structural_conflict_net(N: PetriNet, limits: Limits = DEFAULT_LIMITS, conc=None) -> Verdict:
    conc = conc if conc is not None else concurrency_relation(N, limits)
    for t, u in conc:
        if N.preset(t).support() & N.preset(u).support():
            return no({"pair": (t, u), "marking": conc.witnesses[(t, u)]},
                      "concurrent transitions share a preplace")
    if conc.truncated:
        return unknown("reachability truncated")
    return yes()


def is_plain(N: PetriNet) -> Verdict:
    seen: dict = {}
    for t in N.transitions:
        a = N.labels[t]
        if a == TAU:
            return no({"transition": t}, "transition labelled tau")
        if a in seen:
            return no({"transitions": (seen[a], t), "label": a}, "label used twice")
        seen[a] = t
    return yes()


def is_one_safe(N: PetriNet, limits: Limits = DEFAULT_LIMITS) -> Verdict:
    c = N.compiled
    for k, v in enumerate(c.m0):
        if v > 1:
            return no({"marking": N.initial, "place": c.places[k]}, "place holds two tokens")
    cap = max(2, min(limits.max_tokens_per_place, 255))
    g = reachability(N, Limits(limits.max_markings, cap, limits.max_firing_len))
    for m in g.raw_states:
        if max(m, default=0) > 1:
            k = max(range(len(m)), key=lambda i: m[i])
            return no({"marking": c.decode(m), "place": c.places[k]}, "place holds two tokens")
    if g.truncated:
        return unknown("reachability truncated")
    return yes()


def finitary_guard(N: PetriNet) -> Verdict:
    for t in N.transitions:
        if not N.preset(t):
            return no({"transition": t}, "transition with empty preset")
    return yes()


def net_equal(N1: PetriNet, N2: PetriNet) -> bool:
    return N1.canonical_key() == N2.canonical_key()


def union_preset(N: PetriNet, ts: Iterable) -> SignedMultiset:
    acc = EMPTY
    for t in ts:
        acc = acc | N.preset(t)
    return acc
