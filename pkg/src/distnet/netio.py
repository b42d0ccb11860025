"""Text format for nets, components and reversible nets; DOT export.

    format 1                      optional header
    net <name>
    place <id> [init <n>]
    trans <id> [label <action> | tau]
    arc <src> <dst> [weight <n>]
    rarc <place> <trans> <in|early|late|out|far> [weight <n>]
    interface <w> <trans>
    input <place>
    output <place>

A token starting with `#` opens a comment (ids may contain `#` elsewhere).
"""

from __future__ import annotations

import re

from .distributed import Component
from .multiset import sort_key
from .net import TAU, NetError, PetriNet
from .reversible import ARC_TYPES, ReversibleNet

ID_RE = re.compile(r"^[A-Za-z0-9_.()\[\]@#-]+$")
FORMAT_VERSION = "1"


class ParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line
        self.msg = msg


def _tokens(line: str) -> list:
    out = []
    for tok in line.split():
        if tok.startswith("#"):
            break
        out.append(tok)
    return out


def _int(tok: str, lineno: int, what: str) -> int:
    if not re.fullmatch(r"\d+", tok):
        raise ParseError(lineno, f"{what} must be a nonnegative integer, got {tok!r}")
    return int(tok)


def parse_net(text: str):
    """Parse a document into a PetriNet, Component or ReversibleNet."""
    name = "net"
    places: dict = {}
    trans: dict = {}
    arcs: list = []
    rarcs: list = []
    ui: list = []
    inputs: list = []
    outputs: list = []
    seen_name = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = _tokens(raw)
        if not toks:
            continue
        kw, args = toks[0], toks[1:]

        def need_id(tok):
            if not ID_RE.match(tok):
                raise ParseError(lineno, f"invalid identifier {tok!r}")
            return tok

        if kw == "format":
            if args != [FORMAT_VERSION]:
                raise ParseError(lineno, f"unsupported format {' '.join(args)!r}")
        elif kw == "net":
            if len(args) != 1:
                raise ParseError(lineno, "expected: net <name>")
            if seen_name:
                raise ParseError(lineno, "duplicate net declaration")
            name, seen_name = need_id(args[0]), True
        elif kw == "place":
            if len(args) not in (1, 3) or (len(args) == 3 and args[1] != "init"):
                raise ParseError(lineno, "expected: place <id> [init <n>]")
            p = need_id(args[0])
            if p in places or p in trans:
                raise ParseError(lineno, f"duplicate declaration of {p!r}")
            places[p] = (_int(args[2], lineno, "initial marking") if len(args) == 3 else 0, lineno)
        elif kw == "trans":
            if not args:
                raise ParseError(lineno, "expected: trans <id> [label <action> | tau]")
            t = need_id(args[0])
            if t in places or t in trans:
                raise ParseError(lineno, f"duplicate declaration of {t!r}")
            rest = args[1:]
            if not rest:
                lab = t
            elif rest == ["tau"] or rest == ["label", "tau"]:
                lab = TAU
            elif len(rest) == 2 and rest[0] == "label":
                lab = need_id(rest[1])
            else:
                raise ParseError(lineno, "expected: trans <id> [label <action> | tau]")
            trans[t] = (lab, lineno)
        elif kw == "arc":
            if len(args) not in (2, 4) or (len(args) == 4 and args[2] != "weight"):
                raise ParseError(lineno, "expected: arc <src> <dst> [weight <n>]")
            w = _int(args[3], lineno, "weight") if len(args) == 4 else 1
            if w == 0:
                raise ParseError(lineno, "arc weight 0 (omit the arc instead)")
            arcs.append((need_id(args[0]), need_id(args[1]), w, lineno))
        elif kw == "rarc":
            if len(args) == 4:
                w = _int(args[3], lineno, "weight")
            elif len(args) == 5 and args[3] == "weight":
                w = _int(args[4], lineno, "weight")
            elif len(args) == 3:
                w = 1
            else:
                raise ParseError(lineno, "expected: rarc <place> <trans> <type> [weight <n>]")
            if args[2] not in ARC_TYPES:
                raise ParseError(lineno, f"arc type must be one of {', '.join(ARC_TYPES)}")
            if w == 0:
                raise ParseError(lineno, "arc weight 0 (omit the arc instead)")
            rarcs.append((need_id(args[0]), need_id(args[1]), args[2], w, lineno))
        elif kw == "interface":
            if len(args) != 2:
                raise ParseError(lineno, "expected: interface <w> <trans>")
            ui.append((need_id(args[0]), need_id(args[1]), lineno))
        elif kw in ("input", "output"):
            if len(args) != 1:
                raise ParseError(lineno, f"expected: {kw} <place>")
            (inputs if kw == "input" else outputs).append((need_id(args[0]), lineno))
        else:
            raise ParseError(lineno, f"unknown declaration {kw!r}")

    if (rarcs or ui) and (inputs or outputs):
        raise ParseError(1, "a document cannot mix reversible and component declarations")

    def check_place(p, lineno):
        if p not in places:
            raise ParseError(lineno, f"unknown place {p!r}")

    def check_trans(t, lineno):
        if t not in trans:
            raise ParseError(lineno, f"unknown transition {t!r}")

    flow: dict = {}
    for x, y, w, lineno in arcs:
        if x in places and y in trans or x in trans and y in places:
            if (x, y) in flow:
                raise ParseError(lineno, f"duplicate arc {x} -> {y}")
            flow[(x, y)] = w
        elif x not in places and x not in trans:
            raise ParseError(lineno, f"unknown element {x!r}")
        elif y not in places and y not in trans:
            raise ParseError(lineno, f"unknown element {y!r}")
        else:
            raise ParseError(lineno, f"arc {x} -> {y} must join a place and a transition")
    m0 = {p: n for p, (n, _) in places.items()}
    labels = {t: lab for t, (lab, _) in trans.items()}

    if rarcs or ui:
        typed: dict = {}
        for (x, y), w in flow.items():
            typed[(y, x, "out") if x in trans else (x, y, "in")] = w
        for p, t, kind, w, lineno in rarcs:
            check_place(p, lineno)
            check_trans(t, lineno)
            if (p, t, kind) in typed:
                raise ParseError(lineno, f"duplicate arc {p} {t} {kind}")
            typed[(p, t, kind)] = w
        pairs = set()
        for w, t, lineno in ui:
            check_trans(t, lineno)
            if (w, t) in pairs:
                raise ParseError(lineno, f"duplicate interface {w} {t}")
            pairs.add((w, t))
        try:
            return ReversibleNet(m0, labels, typed, ui=pairs, name=name)
        except NetError as e:
            raise ParseError(1, str(e)) from None

    try:
        net = PetriNet(m0, labels, flow, name=name)
    except NetError as e:
        raise ParseError(1, str(e)) from None
    if inputs or outputs:
        ins, outs = set(), set()
        for p, lineno in inputs:
            check_place(p, lineno)
            if p in ins:
                raise ParseError(lineno, f"duplicate input {p!r}")
            ins.add(p)
        for p, lineno in outputs:
            check_place(p, lineno)
            if p in outs:
                raise ParseError(lineno, f"duplicate output {p!r}")
            outs.add(p)
        return Component(net, frozenset(ins), frozenset(outs))
    return net


def _sorted(xs):
    return sorted(xs, key=sort_key)


def _trans_line(t, lab) -> str:
    return f"trans {t} tau" if lab == TAU else f"trans {t} label {lab}"


def serialize_net(obj) -> str:
    """Canonical text: places, transitions, arcs, each ascending by id."""
    lines = [f"format {FORMAT_VERSION}"]
    if isinstance(obj, Component):
        net, extra = obj.net, ([f"input {p}" for p in _sorted(obj.inputs)]
                               + [f"output {p}" for p in _sorted(obj.outputs)])
    else:
        net, extra = obj, []
    lines.append(f"net {net.name}")
    for p in net.places:
        n = net.initial[p]
        lines.append(f"place {p} init {n}" if n else f"place {p}")
    for t in net.transitions:
        lines.append(_trans_line(t, net.labels[t]))
    if isinstance(net, ReversibleNet):
        for (p, t, kind), w in sorted(net.rflow.items(),
                                      key=lambda kv: (sort_key(kv[0][0]), sort_key(kv[0][1]),
                                                      ARC_TYPES.index(kv[0][2]))):
            lines.append(f"rarc {p} {t} {kind}" + (f" weight {w}" if w != 1 else ""))
        for w, t in sorted(net.ui, key=sort_key):
            lines.append(f"interface {w} {t}")
    else:
        for (x, y), w in sorted(net.flow.items(), key=lambda kv: sort_key(kv[0])):
            lines.append(f"arc {x} {y}" + (f" weight {w}" if w != 1 else ""))
    lines.extend(extra)
    return "\n".join(lines) + "\n"


def _gvquote(s) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _dot_node_lines(net: PetriNet):
    for p in net.places:
        n = net.initial[p]
        label = f"{p}\n{n}" if n else str(p)
        yield f"  {_gvquote('p:' + str(p))} [shape=circle, label={_gvquote(label)}];"
    for t in net.transitions:
        lab = net.labels[t]
        text = "τ" if lab == TAU else str(lab)
        label = text if text == str(t) else f"{t}\n{text}"
        yield f"  {_gvquote('t:' + str(t))} [shape=box, label={_gvquote(label)}];"


def _dot_edge_lines(net: PetriNet):
    for (x, y), w in sorted(net.flow.items(), key=lambda kv: sort_key(kv[0])):
        src = ("t:" if x in net.labels else "p:") + str(x)
        dst = ("t:" if y in net.labels else "p:") + str(y)
        attr = f" [label={_gvquote(w)}]" if w > 1 else ""
        yield f"  {_gvquote(src)} -> {_gvquote(dst)}{attr};"


def export_dot(net: PetriNet) -> str:
    lines = [f"digraph {_gvquote(net.name)} {{"]
    lines.extend(_dot_node_lines(net))
    lines.extend(_dot_edge_lines(net))
    lines.append("}")
    return "\n".join(lines) + "\n"


def read_net_file(path: str):
    if str(path).lower().endswith(".pnml"):
        raise ParseError(0, "PNML input is not supported; convert to the text net format")
    with open(path, encoding="utf-8") as fh:
        return parse_net(fh.read())
