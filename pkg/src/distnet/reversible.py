"""Nets with reversible transitions and their expansion into ordinary nets."""

from __future__ import annotations

from collections.abc import Mapping

from .multiset import SignedMultiset, sort_key
from .net import TAU, NetError, PetriNet
from .verdict import Verdict, no, yes

ARC_TYPES = ("in", "early", "late", "out", "far")
PRE_TYPES = ("in", "early", "late")


def undo_place(w, t) -> str:
    return f"undo@{w}({t})"


def reset_place(w, t) -> str:
    return f"reset@{w}({t})"


def ack_place(w, t) -> str:
    return f"ack@{w}({t})"


def fired_place(t) -> str:
    return f"fired({t})"


def keep_place(w, t) -> str:
    return f"keep@{w}({t})"


def take_place(f, t) -> str:
    return f"take[{f}]({t})"


def took_place(f, t) -> str:
    return f"took[{f}]({t})"


def rho_place(t) -> str:
    return f"rho({t})"


def fire_trans(t) -> str:
    return f"{t}.fire"


def undo_trans(t, w) -> str:
    return f"{t}.undo@{w}"


def undo_far_trans(t, f) -> str:
    return f"{t}.undo({f})"


def undone_trans(t) -> str:
    return f"{t}.undone"


def reset_trans(t, w) -> str:
    return f"{t}.reset@{w}"


def elide_trans(t, w) -> str:
    return f"{t}.elide@{w}"


class ReversibleNet:
    """Net whose arcs carry a type in in/early/late/out/far, with undo
    interfaces. `ui` holds (interface, transition) pairs; transitions with
    at least one interface are reversible."""

    def __init__(self, places=(), transitions=(), rarcs=(), ui=(), interfaces=None,
                 initial=None, labels=None, name: str = "rnet"):
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
        self.places = tuple(sorted(set(places), key=sort_key))
        self.transitions = tuple(sorted(set(transitions), key=sort_key))
        if len(self.places) != len(list(places)) or len(self.transitions) != len(list(transitions)):
            raise NetError("duplicate element id")
        if set(self.places) & set(self.transitions):
            raise NetError("ids used as both place and transition")
        self.labels = {t: lab.get(t, t) for t in self.transitions}
        self.initial = SignedMultiset(init)
        rflow: dict = {}
        items = rarcs.items() if isinstance(rarcs, Mapping) else (
            ((a[0], a[1], a[2]), a[3] if len(a) > 3 else 1) for a in rarcs)
        for (p, t, kind), w in items:
            if w:
                rflow[(p, t, kind)] = rflow.get((p, t, kind), 0) + w
        self.rflow = rflow
        self.ui = frozenset(ui)
        self.interfaces = tuple(sorted(set(interfaces) if interfaces is not None
                                       else {w for w, _ in self.ui}, key=sort_key))
        by_t: dict = {}
        for (p, t, kind), w in sorted(rflow.items(), key=lambda kv: sort_key(kv[0])):
            by_t.setdefault((t, kind), {})[p] = w
        self._by_t = by_t
        ifs: dict = {}
        for w, t in self.ui:
            ifs.setdefault(t, []).append(w)
        self._ifs = {t: sorted(ws, key=sort_key) for t, ws in ifs.items()}

    def arcs(self, t, kind) -> dict:
        return dict(self._by_t.get((t, kind), {}))

    def interfaces_of(self, t) -> list:
        return list(self._ifs.get(t, ()))

    def is_reversible(self, t) -> bool:
        return t in self._ifs

    def reversible_transitions(self) -> list:
        return [t for t in self.transitions if self.is_reversible(t)]

    def __eq__(self, other):
        if not isinstance(other, ReversibleNet):
            return NotImplemented
        return (self.places, self.transitions, self.labels, self.initial, self.rflow,
                self.ui, self.interfaces) == (other.places, other.transitions, other.labels,
                                              other.initial, other.rflow, other.ui, other.interfaces)

    def __repr__(self):
        return (f"ReversibleNet({self.name!r}, |S|={len(self.places)}, |T|={len(self.transitions)}, "
                f"|ui|={len(self.ui)})")


def validate_reversible(R: ReversibleNet) -> Verdict:
    problems = []
    places, trans = set(R.places), set(R.transitions)
    for (p, t, kind), w in sorted(R.rflow.items(), key=lambda kv: sort_key(kv[0])):
        if kind not in ARC_TYPES:
            problems.append({"problem": "unknown arc type", "arc": (p, t, kind)})
        if p not in places or t not in trans:
            problems.append({"problem": "arc references undeclared element", "arc": (p, t, kind)})
        if not isinstance(w, int) or w < 0:
            problems.append({"problem": "bad weight", "arc": (p, t, kind)})
    omega = set(R.interfaces)
    for w, t in sorted(R.ui, key=sort_key):
        if w not in omega:
            problems.append({"problem": "undeclared interface", "interface": w})
        if t not in trans:
            problems.append({"problem": "interface on undeclared transition", "transition": t})
            continue
        for mk in (undo_place, reset_place, ack_place):
            if mk(w, t) not in places:
                problems.append({"problem": "missing interface place", "place": mk(w, t)})
    for t in R.transitions:
        if not R.is_reversible(t):
            for kind in ("early", "late", "far"):
                for p in R.arcs(t, kind):
                    problems.append({"problem": f"standard transition with {kind} arc",
                                     "transition": t, "place": p})
    extra = R.initial.support() - places
    if extra:
        problems.append({"problem": "initial marking on undeclared places",
                         "places": sorted(extra, key=sort_key)})
    if problems:
        return no(problems, problems[0]["problem"])
    return yes()


def expand(R: ReversibleNet) -> PetriNet:
    """Translate R into an ordinary net, replacing each reversible t by its
    fire / undo / undone / reset / elide transitions."""
    v = validate_reversible(R)
    if not v.is_yes:
        raise NetError(f"invalid reversible net: {v.note}")
    places = {p: R.initial[p] for p in R.places}
    labels: dict = {}
    arcs: dict = {}
    taken = set(R.places) | set(R.transitions)
    fresh: set = set()

    def new_place(p):
        if p in taken or p in fresh:
            raise NetError(f"generated place {p!r} collides with an existing element")
        fresh.add(p)
        places[p] = 0

    def new_trans(t, label):
        if t in taken or t in fresh:
            raise NetError(f"generated transition {t!r} collides with an existing element")
        fresh.add(t)
        labels[t] = label

    def arc(x, y, w=1):
        arcs[(x, y)] = arcs.get((x, y), 0) + w

    for t in R.transitions:
        if not R.is_reversible(t):
            labels[t] = R.labels[t]
            for p, w in R.arcs(t, "in").items():
                arc(p, t, w)
            for p, w in R.arcs(t, "out").items():
                arc(t, p, w)
            continue
        omegas = R.interfaces_of(t)
        far = R.arcs(t, "far")
        early = R.arcs(t, "early")
        late = R.arcs(t, "late")
        new_place(fired_place(t))
        new_place(rho_place(t))
        for w in omegas:
            new_place(keep_place(w, t))
        for f in far:
            new_place(take_place(f, t))
            new_place(took_place(f, t))

        tf = fire_trans(t)
        new_trans(tf, R.labels[t])
        for kind in PRE_TYPES:
            for p, w in R.arcs(t, kind).items():
                arc(p, tf, w)
        arc(tf, fired_place(t))
        for p, w in R.arcs(t, "out").items():
            arc(tf, p, w)
        for p, w in far.items():
            arc(tf, p, w)

        for w in omegas:
            tu = undo_trans(t, w)
            new_trans(tu, TAU)
            arc(undo_place(w, t), tu)
            arc(fired_place(t), tu)
            arc(tu, keep_place(w, t))
            for f in far:
                arc(tu, take_place(f, t))

        for f, wt in far.items():
            tu = undo_far_trans(t, f)
            new_trans(tu, TAU)
            arc(take_place(f, t), tu)
            arc(f, tu, wt)
            arc(tu, took_place(f, t))

        td = undone_trans(t)
        new_trans(td, TAU)
        for f in far:
            arc(took_place(f, t), td)
        arc(td, rho_place(t))
        for p, w in early.items():
            arc(td, p, w)

        for w in omegas:
            tr = reset_trans(t, w)
            new_trans(tr, TAU)
            arc(reset_place(w, t), tr)
            arc(keep_place(w, t), tr)
            arc(rho_place(t), tr)
            for p, wt in late.items():
                arc(tr, p, wt)
            arc(tr, ack_place(w, t))

            te = elide_trans(t, w)
            new_trans(te, TAU)
            arc(undo_place(w, t), te)
            arc(reset_place(w, t), te)
            arc(te, ack_place(w, t))

    return PetriNet(places, labels, arcs, name=R.name + "_expanded")


def embed(N: PetriNet) -> ReversibleNet:
    """An ordinary net as a reversible net without interfaces."""
    rarcs = {}
    for (x, y), w in N.flow.items():
        if x in N.labels:
            rarcs[(y, x, "out")] = w
        else:
            rarcs[(x, y, "in")] = w
    return ReversibleNet({p: N.initial[p] for p in N.places}, N.labels, rarcs, name=N.name)


def elide_sides(R: ReversibleNet, E: PetriNet, t, w):
    """Both sides of the undo/elide conservation identity for (t, w) in the
    expansion E: the summed effect of fire, undo@w, every undo(f), undone
    and reset@w, and the effect of elide@w."""
    lhs = E.effect(fire_trans(t)) + E.effect(undo_trans(t, w)) + E.effect(undone_trans(t)) \
        + E.effect(reset_trans(t, w))
    for f in R.arcs(t, "far"):
        lhs = lhs + E.effect(undo_far_trans(t, f))
    return lhs, E.effect(elide_trans(t, w))
