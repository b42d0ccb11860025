"""Labelled transition systems of nets and the equivalence checks on them.

Four views of a net are provided: interleaving, step, split and ST. Each view
can be explored lazily (`initial`, `successors`) or materialized as an `Lts`.
"""

from __future__ import annotations

from array import array
from collections import deque
from typing import NamedTuple, Optional

from .multiset import SignedMultiset, sort_key
from .net import DEFAULT_LIMITS, TAU, Limits, PetriNet, bfs, is_plain
from .verdict import Status, Verdict, no, unknown, yes


class TruncatedError(RuntimeError):
    pass


class NotDeterministic(ValueError):
    pass


class Cut(str):
    """Marks a successor dropped by an exploration bound; the value is the cause."""


CUT_TOKENS = Cut("max-tokens")
CUT_FIRING = Cut("max-firing-len")


def plus(a):
    return ("+", a)


def minus(a, n=None):
    return ("-", a) if n is None else ("-", a, n)


def label_text(lab) -> str:
    if lab == TAU:
        return "tau"
    if isinstance(lab, SignedMultiset):
        parts = []
        for a, n in lab.items():
            parts.extend([str(a)] * n)
        return "{" + ",".join(parts) + "}"
    if isinstance(lab, tuple):
        if lab[0] == "+":
            return f"{lab[1]}+"
        if len(lab) == 3:
            return f"{lab[1]}-{lab[2]}"
        return f"{lab[1]}-"
    return str(lab)


class Lts:
    """Materialized LTS. States are indices 0..n-1 (0 is initial); `values`
    holds the underlying state objects, `succ[i]` the (label, j) edges."""

    def __init__(self, values: list, succ: list, truncated: bool = False,
                 cause: Optional[str] = None, render=None):
        self.values = values
        self.succ = succ
        self.truncated = truncated
        self.cause = cause
        self._render = render or str
        self.initial = 0

    @classmethod
    def from_triples(cls, initial, triples, truncated=False) -> "Lts":
        values = [initial]
        index = {initial: 0}
        succ: list = [[]]

        def get(s):
            if s not in index:
                index[s] = len(values)
                values.append(s)
                succ.append([])
            return index[s]

        for s, lab, t in triples:
            i, j = get(s), get(t)
            if (lab, j) not in succ[i]:
                succ[i].append((lab, j))
        return cls(values, succ, truncated)

    @classmethod
    def from_exploration(cls, ex, render=None) -> "Lts":
        succ: list = [[] for _ in ex.states]
        seen = set()
        for i, lab, j in ex.edges:
            if (i, lab, j) not in seen:
                seen.add((i, lab, j))
                succ[i].append((lab, j))
        return cls(ex.states, succ, ex.truncated, ex.cause, render)

    def successors(self, i: int):
        return self.succ[i]

    def __len__(self):
        return len(self.values)

    @property
    def states(self) -> list:
        return [self._render(v) for v in self.values]

    def state(self, i: int):
        return self._render(self.values[i])

    @property
    def edges(self) -> list:
        return [(self.state(i), lab, self.state(j))
                for i, out in enumerate(self.succ) for lab, j in out]

    def edge_count(self) -> int:
        return sum(len(out) for out in self.succ)

    def labels_of(self, i: int) -> set:
        return {lab for lab, _ in self.succ[i]}

    def is_deterministic(self) -> bool:
        for out in self.succ:
            seen = {}
            for lab, j in out:
                if lab == TAU or seen.setdefault(lab, j) != j:
                    return False
        return True


# lazy views over nets

class _View:
    def __init__(self, net: PetriNet, limits: Limits):
        self.net = net
        self.c = net.compiled
        self.limits = limits
        self.cap = min(limits.max_tokens_per_place, 255)

    def materialize(self) -> Lts:
        def succ(s):
            for lab, t in self.successors(s):
                yield lab, t

        ex = _bfs_cut(self.initial, succ, self.limits.max_markings)
        return Lts.from_exploration(ex, self.decode)


def _bfs_cut(initial, successors, max_states):
    causes: set = set()

    def wrapped(s):
        for lab, t in successors(s):
            if isinstance(t, Cut):
                causes.add(str(t))
                continue
            yield lab, t

    ex = bfs(initial, wrapped, max_states)
    if causes:
        ex.truncated = True
        ex.causes |= causes
    return ex


class InterleavingView(_View):
    def __init__(self, net, limits=DEFAULT_LIMITS):
        super().__init__(net, limits)
        self.initial = self.c.m0

    def successors(self, m):
        c = self.c
        out = []
        for k in c.enabled(m):
            m2 = c.fire(m, k, self.cap)
            out.append((c.labels[k], CUT_TOKENS if m2 is None else m2))
        return out

    def decode(self, m):
        return self.c.decode(m)


class StepView(_View):
    """Visible edges carry multisets of actions, tau edges single tau firings."""

    def __init__(self, net, limits=DEFAULT_LIMITS):
        super().__init__(net, limits)
        self.initial = self.c.m0

    def step_label(self, st) -> SignedMultiset:
        acc: dict = {}
        for k, n in st:
            a = self.c.labels[k]
            acc[a] = acc.get(a, 0) + n
        return SignedMultiset(acc)

    def successors(self, m):
        c = self.c
        out = []
        for st in c.steps(m, allowed=c.visible, free_cap=self.limits.max_step_size):
            m2 = c.fire_step(m, st, self.cap)
            out.append((self.step_label(st), CUT_TOKENS if m2 is None else m2))
        for k in c.enabled(m):
            if not c.visible[k]:
                m2 = c.fire(m, k, self.cap)
                out.append((TAU, CUT_TOKENS if m2 is None else m2))
        return out

    def decode(self, m):
        return self.c.decode(m)


class SplitMarking(NamedTuple):
    marking: SignedMultiset
    firing: SignedMultiset


class STMarking(NamedTuple):
    marking: SignedMultiset
    firing: tuple


class SplitView(_View):
    """States are bytes: the marking followed by the firing multiset U over
    transitions. U is capped at max_firing_len elements."""

    def __init__(self, net, limits=DEFAULT_LIMITS):
        super().__init__(net, limits)
        self.ns = len(self.c.places)
        self.initial = self.c.m0 + bytes(len(self.c.trans))

    def successors(self, s):
        c, ns, cap = self.c, self.ns, self.cap
        m = s[:ns]
        out = []
        size = sum(s[ns:])
        for k in c.enabled(m):
            if c.visible[k]:
                if size >= self.limits.max_firing_len:
                    out.append((plus(c.labels[k]), CUT_FIRING))
                    continue
                b = bytearray(s)
                for j, w in c.pre[k]:
                    b[j] -= w
                b[ns + k] += 1
                out.append((plus(c.labels[k]), bytes(b)))
            else:
                m2 = c.fire(m, k, cap)
                out.append((TAU, CUT_TOKENS if m2 is None else m2 + s[ns:]))
        for k in range(len(c.trans)):
            if s[ns + k]:
                b = bytearray(s)
                over = False
                for j, w in c.post[k]:
                    v = b[j] + w
                    if v > cap:
                        over = True
                        break
                    b[j] = v
                b[ns + k] -= 1
                out.append((minus(c.labels[k]), CUT_TOKENS if over else bytes(b)))
        return out

    def decode(self, s):
        c, ns = self.c, self.ns
        return SplitMarking(c.decode(s[:ns]),
                            SignedMultiset({c.trans[k]: v for k, v in enumerate(s[ns:]) if v}))


class STView(_View):
    """States are (marking bytes, tuple of firing transition indices)."""

    def __init__(self, net, limits=DEFAULT_LIMITS):
        super().__init__(net, limits)
        self.initial = (self.c.m0, ())

    def successors(self, s):
        c, cap = self.c, self.cap
        m, u = s
        out = []
        for k in c.enabled(m):
            if c.visible[k]:
                if len(u) >= self.limits.max_firing_len:
                    out.append((plus(c.labels[k]), CUT_FIRING))
                    continue
                b = bytearray(m)
                for j, w in c.pre[k]:
                    b[j] -= w
                out.append((plus(c.labels[k]), (bytes(b), u + (k,))))
            else:
                m2 = c.fire(m, k, cap)
                out.append((TAU, CUT_TOKENS if m2 is None else (m2, u)))
        for n, k in enumerate(u):
            b = bytearray(m)
            over = False
            for j, w in c.post[k]:
                v = b[j] + w
                if v > cap:
                    over = True
                    break
                b[j] = v
            lab = minus(c.labels[k], n + 1)
            out.append((lab, CUT_TOKENS if over else (bytes(b), u[:n] + u[n + 1:])))
        return out

    def decode(self, s):
        m, u = s
        return STMarking(self.c.decode(m), tuple(self.c.trans[k] for k in u))


def build_interleaving_lts(N: PetriNet, limits: Limits = DEFAULT_LIMITS) -> Lts:
    return InterleavingView(N, limits).materialize()


def build_step_lts(N: PetriNet, limits: Limits = DEFAULT_LIMITS) -> Lts:
    return StepView(N, limits).materialize()


def build_split_lts(N: PetriNet, limits: Limits = DEFAULT_LIMITS) -> Lts:
    return SplitView(N, limits).materialize()


def build_st_lts(N: PetriNet, limits: Limits = DEFAULT_LIMITS) -> Lts:
    return STView(N, limits).materialize()


# divergence

def _tau_graph(L: Lts):
    return [[j for lab, j in out if lab == TAU] for out in L.succ]


def divergent_indices(L: Lts) -> set:
    """States from which an infinite tau path exists.

    Repeatedly discard states all of whose tau successors were discarded;
    what remains can always take another tau step inside the remainder.
    """
    tau = _tau_graph(L)
    n = len(tau)
    preds: list = [[] for _ in range(n)]
    count = [0] * n
    for i, js in enumerate(tau):
        for j in js:
            preds[j].append(i)
            count[i] += 1
    queue = deque(i for i in range(n) if count[i] == 0)
    alive = [True] * n
    while queue:
        j = queue.popleft()
        alive[j] = False
        for i in preds[j]:
            count[i] -= 1
            if count[i] == 0:
                queue.append(i)
    return {i for i in range(n) if alive[i]}


def detect_divergence(L: Lts) -> set:
    return {L.state(i) for i in divergent_indices(L)}


# readiness

def _tau_closure(start, tau_succ) -> frozenset:
    seen = set(start)
    stack = list(start)
    while stack:
        i = stack.pop()
        for j in tau_succ(i):
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return frozenset(seen)


class _ReadyAutomaton:
    """Subset construction over visible trace labels, recording at each
    macro state the set of menus of its stable members."""

    def __init__(self, n, tau_succ, moves, menu):
        self.tau_succ = tau_succ   # i -> iterable of j
        self.moves = moves         # i -> dict action -> list of j
        self.menu = menu           # i -> frozenset, called for stable i only
        self._closure: dict = {}
        self._fam: dict = {}
        self.n = n

    def close(self, states) -> frozenset:
        key = frozenset(states)
        got = self._closure.get(key)
        if got is None:
            got = _tau_closure(key, self.tau_succ)
            self._closure[key] = got
        return got

    def family(self, macro: frozenset) -> frozenset:
        got = self._fam.get(macro)
        if got is None:
            got = frozenset(self.menu(i) for i in macro if not self.tau_succ(i))
            self._fam[macro] = got
        return got

    def actions(self, macro) -> set:
        acts = set()
        for i in macro:
            acts.update(self.moves(i))
        return acts

    def step(self, macro, a) -> frozenset:
        nxt = set()
        for i in macro:
            nxt.update(self.moves(i).get(a, ()))
        return self.close(nxt) if nxt else frozenset()


def _enumerate_pairs(auto: _ReadyAutomaton, init: frozenset, max_trace_len) -> set:
    if max_trace_len is None:
        # the pair set is finite iff no cycle is reachable in the subset graph
        graph: dict = {}
        stack = [init]
        while stack:
            d = stack.pop()
            if d in graph:
                continue
            graph[d] = [auto.step(d, a) for a in sorted(auto.actions(d), key=sort_key)]
            stack.extend(x for x in graph[d] if x and x not in graph)
        color: dict = {}

        def has_cycle(d):
            color[d] = 1
            for x in graph[d]:
                if not x:
                    continue
                if color.get(x) == 1 or (x not in color and has_cycle(x)):
                    return True
            color[d] = 2
            return False

        if has_cycle(init):
            raise ValueError("infinitely many ready pairs; pass max_trace_len")
    out = set()
    frontier = [((), init)]
    depth = 0
    while frontier:
        nxt = []
        for trace, d in frontier:
            for X in auto.family(d):
                out.add(StepReadyPair(trace, X))
            if max_trace_len is not None and depth >= max_trace_len:
                continue
            for a in sorted(auto.actions(d), key=sort_key):
                d2 = auto.step(d, a)
                if d2:
                    nxt.append((trace + (a,), d2))
        frontier = nxt
        depth += 1
    return out


class StepReadyPair(NamedTuple):
    trace: tuple
    menu: frozenset


def _lts_automaton(L: Lts) -> _ReadyAutomaton:
    tau = _tau_graph(L)
    moves = []
    menus = []
    for out in L.succ:
        d: dict = {}
        for lab, j in out:
            if lab != TAU:
                d.setdefault(lab, []).append(j)
        moves.append(d)
        menus.append(frozenset(d))
    return _ReadyAutomaton(len(L), tau.__getitem__, moves.__getitem__, menus.__getitem__)


def ready_pairs(L: Lts, max_trace_len: Optional[int] = None) -> set:
    """Ready pairs (trace, set of visible labels offered at a stable state)."""
    auto = _lts_automaton(L)
    return {(p.trace, p.menu) for p in _enumerate_pairs(auto, auto.close([0]), max_trace_len)}


class _NetReadiness:
    """Per-marking data for step readiness: tau and single-action moves,
    and the menu of visible steps at stable markings."""

    def __init__(self, N: PetriNet, limits: Limits):
        self.view = StepView(N, limits)
        c = self.view.c
        self.c = c
        cap = self.view.cap

        def succ(m):
            for k in c.enabled(m):
                m2 = c.fire(m, k, cap)
                yield k, (CUT_TOKENS if m2 is None else m2)

        self.ex = _bfs_cut(c.m0, succ, limits.max_markings)
        n = len(self.ex.states)
        self.tau: list = [[] for _ in range(n)]
        self.mv: list = [dict() for _ in range(n)]
        for i, k, j in self.ex.edges:
            if c.visible[k]:
                self.mv[i].setdefault(c.labels[k], []).append(j)
            else:
                self.tau[i].append(j)
        self._menus: dict = {}
        self.truncated = self.ex.truncated

    def menu(self, i) -> frozenset:
        got = self._menus.get(i)
        if got is None:
            m = self.ex.states[i]
            c = self.c
            got = frozenset(self.view.step_label(st)
                            for st in c.steps(m, allowed=c.visible,
                                              free_cap=self.view.limits.max_step_size))
            self._menus[i] = got
        return got

    def automaton(self) -> _ReadyAutomaton:
        return _ReadyAutomaton(len(self.tau), self.tau.__getitem__, self.mv.__getitem__, self.menu)


def step_ready_pairs(N: PetriNet, limits: Limits = DEFAULT_LIMITS,
                     max_trace_len: Optional[int] = None) -> set:
    """Step ready pairs of N. With cyclic behaviour the set is infinite and
    `max_trace_len` bounds the traces enumerated."""
    r = _NetReadiness(N, limits)
    if r.truncated:
        raise TruncatedError(r.ex.cause)
    auto = r.automaton()
    return _enumerate_pairs(auto, auto.close([0]), max_trace_len)


def _compare_ready(a1: _ReadyAutomaton, a2: _ReadyAutomaton) -> Optional[StepReadyPair]:
    start = (a1.close([0]), a2.close([0]))
    seen = {start}
    queue = deque([((), start)])
    while queue:
        trace, (d1, d2) = queue.popleft()
        f1, f2 = a1.family(d1), a2.family(d2)
        if f1 != f2:
            X = min(f1 ^ f2, key=lambda x: sort_key(tuple(sorted(x, key=sort_key))))
            return StepReadyPair(trace, X)
        acts = sorted(a1.actions(d1) | a2.actions(d2), key=sort_key)
        for a in acts:
            nxt = (a1.step(d1, a), a2.step(d2, a))
            if nxt not in seen:
                seen.add(nxt)
                queue.append((trace + (a,), nxt))
    return None


def readiness_equivalent(L1: Lts, L2: Lts) -> Verdict:
    if L1.truncated or L2.truncated:
        return unknown("LTS truncated")
    w = _compare_ready(_lts_automaton(L1), _lts_automaton(L2))
    return yes() if w is None else no({"trace": w.trace, "menu": w.menu},
                                       "ready pair present on one side only")


def step_readiness_equivalent(N1: PetriNet, N2: PetriNet, limits: Limits = DEFAULT_LIMITS) -> Verdict:
    r1, r2 = _NetReadiness(N1, limits), _NetReadiness(N2, limits)
    if r1.truncated or r2.truncated:
        return unknown("reachability truncated")
    w = _compare_ready(r1.automaton(), r2.automaton())
    if w is None:
        return yes()
    in1 = w.menu in r1.automaton().family(_trace_macro(r1.automaton(), w.trace))
    return no({"trace": w.trace, "menu": sorted(w.menu, key=sort_key),
               "present_in": "first" if in1 else "second"},
              "step ready pair present on one side only")


def _trace_macro(auto, trace):
    d = auto.close([0])
    for a in trace:
        d = auto.step(d, a)
    return d


# branching bisimulation

def _closures(L: Lts) -> list:
    tau = _tau_graph(L)
    return [_tau_closure([i], tau.__getitem__) for i in range(len(L))]


def branching_bisim_relation(L1: Lts, L2: Lts) -> set:
    """Greatest relation between states of L1 and L2 satisfying the transfer
    conditions of branching bisimilarity, by naive refinement."""
    c1, c2 = _closures(L1), _closures(L2)
    R = {(i, j) for i in range(len(L1)) for j in range(len(L2))}

    def matched(s, t, lab, s2, succ_t, clos_t, rel):
        # can t answer s -lab-> s2 (rel(x, y) orients pairs as (s-side, t-side))?
        if lab == TAU and rel(s2, t):
            return True
        for td in clos_t[t]:
            if not rel(s, td):
                continue
            for lab2, t2 in succ_t[td]:
                if lab2 == lab and rel(s2, t2):
                    return True
        return False

    fwd = lambda x, y: (x, y) in R  # noqa: E731
    bwd = lambda x, y: (y, x) in R  # noqa: E731
    changed = True
    while changed:
        changed = False
        for (i, j) in sorted(R):
            ok = all(matched(i, j, lab, i2, L2.succ, c2, fwd) for lab, i2 in L1.succ[i]) and \
                all(matched(j, i, lab, j2, L1.succ, c1, bwd) for lab, j2 in L2.succ[j])
            if not ok:
                R.discard((i, j))
                changed = True
    return R


def branching_bisim_divergence(L1: Lts, L2: Lts) -> Verdict:
    if L1.truncated or L2.truncated:
        raise TruncatedError("branching bisimulation needs fully explored LTSs")
    R = branching_bisim_relation(L1, L2)
    if (0, 0) not in R:
        return no({"pair": (L1.state(0), L2.state(0))}, "initial states not branching bisimilar")
    d1, d2 = divergent_indices(L1), divergent_indices(L2)
    if bool(d1) != bool(d2):
        side, L, d = ("first", L1, d1) if d1 else ("second", L2, d2)
        return no({"divergent_side": side, "state": L.state(min(d))},
                  "only one system diverges")
    if d1:
        return Verdict(Status.UNKNOWN, None, "unknown-divergence")
    return yes()


class _LtsAdapter:
    """Gives a materialized Lts the lazy view interface."""

    def __init__(self, L: Lts):
        self.L = L
        self.initial = 0
        self.truncated = L.truncated

    def successors(self, i):
        return self.L.succ[i]

    def decode(self, i):
        return self.L.state(i)


def _lazy(L):
    return _LtsAdapter(L) if isinstance(L, Lts) else L


def branching_bisim_deterministic_target(L1, L2, max_pairs: Optional[int] = None) -> Verdict:
    """Decide branching bisimilarity with explicit divergence against a
    deterministic L2 by forward simulation.

    Each L1 state reached by visible trace s is paired with the unique L2
    state reached by s. The pairs obtained this way must satisfy
      (a) the initial states are paired, (b) tau moves of L1 stay paired
      with the same L2 state, (c) every visible move of L1 is matched in
      L2, (d) a stable L1 state offers every action its partner offers,
      (e) no tau cycle runs through the paired L1 states.
    (a) and (b) hold by construction. Since L2 is deterministic and
    tau-free, any branching bisimulation must contain these pairs, so a
    failure is a genuine inequivalence even under truncation.
    Accepts Lts objects or lazy net views.
    """
    A, B = _lazy(L1), _lazy(L2)
    if max_pairs is None:
        max_pairs = getattr(getattr(A, "limits", None), "max_markings", 10**6)
    if isinstance(L1, Lts) and L1.truncated:
        truncation = {"first LTS truncated"}
    else:
        truncation = set()
    if isinstance(L2, Lts) and L2.truncated:
        truncation.add("second LTS truncated")

    det_cache: dict = {}

    def det(s2):
        d = det_cache.get(s2)
        if d is None:
            d = {}
            for lab, t in B.successors(s2):
                if isinstance(t, Cut):
                    truncation.add(str(t))
                    continue
                if lab == TAU:
                    raise NotDeterministic(f"tau edge at {B.decode(s2)}")
                if d.setdefault(lab, t) != t:
                    raise NotDeterministic(f"two {label_text(lab)} edges at {B.decode(s2)}")
            det_cache[s2] = d
        return d

    start = (A.initial, B.initial)
    index = {start: 0}
    pairs = [start]
    tau_src, tau_dst = array("l"), array("l")
    i = 0

    def fail(pair, cond, extra=None):
        w = {"condition": cond, "state1": A.decode(pair[0]), "state2": B.decode(pair[1])}
        if extra is not None:
            w["label"] = extra
        return no(w, f"condition ({cond}) fails")

    while i < len(pairs):
        s1, s2 = pairs[i]
        d2 = det(s2)
        offered = set()
        has_tau = False
        for lab, t1 in A.successors(s1):
            if lab == TAU:
                has_tau = True
            else:
                offered.add(lab)
            if isinstance(t1, Cut):
                truncation.add(str(t1))
                continue
            if lab == TAU:
                nxt = (t1, s2)
            else:
                t2 = d2.get(lab)
                if t2 is None:
                    return fail(pairs[i], "c", label_text(lab))
                nxt = (t1, t2)
            j = index.get(nxt)
            if j is None:
                if len(pairs) >= max_pairs:
                    truncation.add("max-markings")
                    continue
                j = len(pairs)
                index[nxt] = j
                pairs.append(nxt)
            if lab == TAU:
                tau_src.append(i)
                tau_dst.append(j)
        if not has_tau:
            for lab in d2:
                if lab not in offered:
                    return fail(pairs[i], "d", label_text(lab))
        i += 1

    cyc = _find_cycle(len(pairs), tau_src, tau_dst)
    if cyc is not None:
        return fail(pairs[cyc], "e")
    if truncation:
        return unknown("truncated: " + ",".join(sorted(truncation)))
    return yes(note=f"{len(pairs)} related pairs")


def _find_cycle(n, src, dst) -> Optional[int]:
    """A node on a cycle of the graph given by edge arrays, or None."""
    out_start = array("l", [0]) * (n + 1)
    for s in src:
        out_start[s + 1] += 1
    for k in range(n):
        out_start[k + 1] += out_start[k]
    targets = array("l", [0]) * len(src)
    fill = array("l", out_start)
    for s, d in zip(src, dst):
        targets[fill[s]] = d
        fill[s] += 1
    outdeg = array("l", (out_start[k + 1] - out_start[k] for k in range(n)))
    # reverse adjacency for Kahn-style peeling of nodes without successors
    in_start = array("l", [0]) * (n + 1)
    for d in dst:
        in_start[d + 1] += 1
    for k in range(n):
        in_start[k + 1] += in_start[k]
    sources = array("l", [0]) * len(src)
    fill = array("l", in_start)
    for s, d in zip(src, dst):
        sources[fill[d]] = s
        fill[d] += 1
    queue = deque(k for k in range(n) if outdeg[k] == 0)
    removed = bytearray(n)
    while queue:
        k = queue.popleft()
        removed[k] = 1
        for e in range(in_start[k], in_start[k + 1]):
            p = sources[e]
            outdeg[p] -= 1
            if outdeg[p] == 0:
                queue.append(p)
    left = [k for k in range(n) if not removed[k]]
    if not left:
        return None
    # walk inside the remainder until a node repeats
    seen = {}
    k = left[0]
    step = 0
    while k not in seen:
        seen[k] = step
        step += 1
        for e in range(out_start[k], out_start[k + 1]):
            if not removed[targets[e]]:
                k = targets[e]
                break
    return k


def branching_split_bisim_nets(N1: PetriNet, N2: PetriNet, limits: Limits = DEFAULT_LIMITS) -> Verdict:
    """Branching split bisimilarity with explicit divergence, N2 plain."""
    if not is_plain(N2).is_yes:
        raise ValueError("second net must be plain")
    return branching_bisim_deterministic_target(SplitView(N1, limits), SplitView(N2, limits),
                                                max_pairs=limits.max_markings)


def interleaving_branching_divergence(N1: PetriNet, N2: PetriNet, limits: Limits = DEFAULT_LIMITS) -> Verdict:
    L1, L2 = build_interleaving_lts(N1, limits), build_interleaving_lts(N2, limits)
    if L1.truncated or L2.truncated:
        return unknown("LTS truncated")
    return branching_bisim_divergence(L1, L2)


def lts_to_dot(L: Lts, name: str = "lts") -> str:
    def q(s):
        return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = [f"digraph {q(name)} {{", "  rankdir=LR;", '  init [shape=point];']
    for i in range(len(L)):
        shape = "doublecircle" if i == 0 else "circle"
        lines.append(f"  s{i} [shape={shape}, label={q(_state_text(L.state(i)))}];")
    lines.append("  init -> s0;")
    for i, out in enumerate(L.succ):
        for lab, j in out:
            lines.append(f"  s{i} -> s{j} [label={q(label_text(lab))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _state_text(v) -> str:
    def mtext(m):
        parts = []
        for p, n in m.items():
            parts.append(str(p) if n == 1 else f"{n}*{p}")
        return "{" + ",".join(parts) + "}"

    if isinstance(v, SignedMultiset):
        return mtext(v)
    if isinstance(v, SplitMarking):
        return mtext(v.marking) + " | " + mtext(v.firing)
    if isinstance(v, STMarking):
        return mtext(v.marking) + " | " + " ".join(map(str, v.firing))
    return str(v)
