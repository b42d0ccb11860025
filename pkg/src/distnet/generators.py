"""Seeded random nets for property tests and benchmarks.

All randomness in the package lives here; analyses are deterministic.
"""

from __future__ import annotations

import random
from typing import Optional

from .distributed import Component
from .net import TAU, PetriNet


def random_net(seed: int, places: int = 4, transitions: int = 3, max_pre: int = 2,
               max_post: int = 2, tokens: int = 2, tau_ratio: float = 0.0,
               alphabet: str = "abcd", name: Optional[str] = None) -> PetriNet:
    """Plain net with unit weights. Every transition has a nonempty preset,
    so the result always passes the syntactic finitary guard."""
    rng = random.Random(seed)
    ps = [f"p{i}" for i in range(places)]
    ts = [f"t{i}" for i in range(transitions)]
    arcs = {}
    labels = {}
    for t in ts:
        for p in rng.sample(ps, rng.randint(1, min(max_pre, places))):
            arcs[(p, t)] = 1
        for p in rng.sample(ps, rng.randint(0, min(max_post, places))):
            arcs[(t, p)] = 1
        labels[t] = TAU if rng.random() < tau_ratio else rng.choice(alphabet)
    marked = rng.sample(ps, min(tokens, places))
    initial = {p: (1 if p in marked else 0) for p in ps}
    return PetriNet(initial, labels, arcs, name=name or f"rand{seed}")


def random_conflict_net(seed: int, groups: int = 2, width: int = 2, name: Optional[str] = None) -> PetriNet:
    """Independent groups of transitions, each group competing for one
    marked place. These nets have no pure M and are therefore distributable."""
    rng = random.Random(seed)
    initial, labels, arcs = {}, {}, {}
    for g in range(groups):
        src = f"s{g}"
        initial[src] = 1
        for k in range(rng.randint(1, width)):
            t = f"g{g}t{k}"
            labels[t] = rng.choice("abc")
            dst = f"r{g}_{k}"
            initial[dst] = 0
            arcs[(src, t)] = 1
            arcs[(t, dst)] = 1
    return PetriNet(initial, labels, arcs, name=name or f"conf{seed}")


def random_component(seed: int, places: int = 4, transitions: int = 3, name: Optional[str] = None) -> Component:
    """Sequential component: a marked control place loops through every
    transition. Inputs are the places read, outputs the places written
    but never read."""
    base = random_net(seed, places, transitions, name=name)
    ctl = "ctl"
    initial = {p: base.initial[p] for p in base.places}
    initial[ctl] = 1
    arcs = dict(base.flow)
    for t in base.transitions:
        arcs[(ctl, t)] = 1
        arcs[(t, ctl)] = 1
    net = PetriNet(initial, base.labels, arcs, name=base.name)
    read = {p for p in base.places if any(base.weight(p, t) for t in base.transitions)}
    written = {p for p in base.places if any(base.weight(t, p) for t in base.transitions)}
    return Component(net, frozenset(read), frozenset(written - read))
