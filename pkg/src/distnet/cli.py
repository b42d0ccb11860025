"""Command-line front end.

Exit status depends on the verdict only: 0 positive, 1 negative with a
witness, 2 unknown or truncated (also used for inapplicable inputs), and
64 and above for usage, input and internal errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import __version__
from .confrepl import SynthesisRefused, synthesize
from .distributed import (Component, CompositionError, InvalidComponent, NotDistributed,
                          canonical_distribution, check_distributed, check_essentially_distributed,
                          check_externally_distributed, compose, decompose_to_lsga)
from .lts import (build_interleaving_lts, build_split_lts, build_st_lts, build_step_lts,
                  interleaving_branching_divergence, branching_split_bisim_nets, lts_to_dot,
                  step_readiness_equivalent)
from .mstruct import distributability_verdict
from .net import (DEFAULT_LIMITS, Limits, NetError, PetriNet, concurrency_relation, finitary_guard,
                  is_one_safe, is_plain, is_structural_conflict_net)
from .netio import ParseError, export_dot, parse_net, serialize_net
from .reversible import ReversibleNet, expand
from .verdict import Status, Verdict, jsonable

EXIT_YES, EXIT_NO, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_DATAERR, EXIT_NOINPUT, EXIT_CANTCREAT, EXIT_SOFTWARE = 64, 65, 66, 73, 70

RELATIONS = {
    "step-readiness": step_readiness_equivalent,
    "branching-split-divergence": branching_split_bisim_nets,
    "interleaving-branching-divergence": interleaving_branching_divergence,
}
LTS_BUILDERS = {"interleaving": build_interleaving_lts, "step": build_step_lts,
                "split": build_split_lts, "st": build_st_lts}
OUTCOME_EXIT = {"distributable": EXIT_YES, "not-distributable": EXIT_NO,
                "unknown": EXIT_UNKNOWN, "inapplicable": EXIT_UNKNOWN}


class UsageError(Exception):
    pass


class InputError(Exception):
    def __init__(self, msg, code=EXIT_DATAERR):
        super().__init__(msg)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def status_exit(status: Status) -> int:
    return {Status.YES: EXIT_YES, Status.NO: EXIT_NO, Status.UNKNOWN: EXIT_UNKNOWN}[status]


def combine(verdicts) -> Status:
    vs = list(verdicts)
    if any(v.is_no for v in vs):
        return Status.NO
    if any(v.is_unknown for v in vs):
        return Status.UNKNOWN
    return Status.YES


class Run:
    """State of one invocation: inputs read, result to report."""

    def __init__(self, args, stdout=None):
        self.args = args
        self.stdout = stdout or sys.stdout
        self.inputs = []
        self.limits = Limits(
            max_markings=args.max_markings if args.max_markings is not None else DEFAULT_LIMITS.max_markings,
            max_tokens_per_place=DEFAULT_LIMITS.max_tokens_per_place,
            max_firing_len=args.max_firing_len if args.max_firing_len is not None else DEFAULT_LIMITS.max_firing_len,
            max_step_size=DEFAULT_LIMITS.max_step_size,
        )

    def read(self, path, kind=None):
        if str(path).lower().endswith(".pnml"):
            raise InputError(f"{path}: PNML input is not supported; use the text net format")
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as e:
            raise InputError(f"{path}: {e.strerror}", EXIT_NOINPUT) from None
        self.inputs.append({"file": os.path.basename(path), "sha256": hashlib.sha256(data).hexdigest()})
        try:
            obj = parse_net(data.decode("utf-8"))
        except UnicodeDecodeError:
            raise InputError(f"{path}: not UTF-8") from None
        except ParseError as e:
            raise InputError(f"{path}: {e}") from None
        if kind is PetriNet:
            if isinstance(obj, Component):
                obj = obj.net
            elif isinstance(obj, ReversibleNet):
                obj = expand(obj)
        elif kind is Component and isinstance(obj, PetriNet):
            raise InputError(f"{path}: expected a component (input/output declarations)")
        elif kind is not None and not isinstance(obj, kind):
            raise InputError(f"{path}: expected a {kind.__name__}")
        return obj


def _write(path, text):
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}", EXIT_CANTCREAT) from None


def _verdict_body(v: Verdict) -> dict:
    return v.to_json()


def cmd_check(run: Run):
    N = run.read(run.args.file, PetriNet)
    checks = {
        "plain": is_plain(N),
        "one_safe": is_one_safe(N, run.limits),
        "structural_conflict": is_structural_conflict_net(N, run.limits),
        "finitary": finitary_guard(N),
    }
    status = combine(checks.values())
    return status, {"checks": {k: _verdict_body(v) for k, v in checks.items()}}, \
        any(v.truncated for v in checks.values())


def cmd_distributable(run: Run):
    N = run.read(run.args.file, PetriNet)
    d = distributability_verdict(N, run.limits)
    status = {EXIT_YES: Status.YES, EXIT_NO: Status.NO}.get(OUTCOME_EXIT[d.outcome], Status.UNKNOWN)
    return status, d.to_json(), d.outcome == "unknown"


def cmd_synthesize(run: Run):
    N = run.read(run.args.file, PetriNet)
    try:
        rep = synthesize(N, run.limits, check_equivalence=not run.args.no_equivalence)
    except SynthesisRefused as e:
        out = e.verdict.outcome
        status = Status.NO if out == "not-distributable" else Status.UNKNOWN
        return status, {"refused": e.verdict.to_json()}, out == "unknown"
    outdir = run.args.output
    base = N.name
    files = {
        f"{base}.reversible.net": serialize_net(rep.reversible_form),
        f"{base}.impl.net": serialize_net(rep.implementation),
    }
    if rep.distributed_form is not None:
        files[f"{base}.distributed.net"] = serialize_net(rep.distributed_form)
    report = rep.to_json()
    files[f"{base}.report.json"] = json.dumps(report, indent=2, sort_keys=True) + "\n"
    for name, text in files.items():
        _write(os.path.join(outdir, name), text)
    status = combine(rep.checks.values())
    return status, {"report": report, "written": sorted(files)}, \
        any(v.truncated for v in rep.checks.values())


def cmd_equiv(run: Run):
    A = run.read(run.args.a, PetriNet)
    B = run.read(run.args.b, PetriNet)
    rel = RELATIONS[run.args.relation]
    try:
        v = rel(A, B, run.limits)
    except ValueError as e:
        raise InputError(str(e)) from None
    return v.status, {"relation": run.args.relation, "result": _verdict_body(v)}, v.truncated


def cmd_distribution(run: Run):
    N = run.read(run.args.file, PetriNet)
    D = canonical_distribution(N)
    conc = concurrency_relation(N, run.limits)
    checks = {
        "distributed": check_distributed(N, None, run.limits, conc=conc),
        "essentially_distributed": check_essentially_distributed(N, run.limits, conc=conc),
        "externally_distributed": check_externally_distributed(N, run.limits, conc=conc),
    }
    body = {"distribution": D.to_json(), "checks": {k: _verdict_body(v) for k, v in checks.items()}}
    return checks["distributed"].status, body, conc.truncated


def cmd_compose(run: Run):
    comps = [run.read(f, Component) for f in run.args.files]
    try:
        C = compose(comps)
    except (CompositionError, InvalidComponent) as e:
        return Status.NO, {"error": str(e)}, False
    _write(run.args.output, serialize_net(C))
    return Status.YES, {"places": len(C.net.places), "transitions": len(C.net.transitions),
                        "written": [os.path.basename(run.args.output)]}, False


def cmd_to_lsga(run: Run):
    N = run.read(run.args.file, PetriNet)
    v = check_distributed(N, None, run.limits)
    if not v.is_yes:
        return v.status, {"distributed": _verdict_body(v)}, v.truncated
    try:
        comps, net = decompose_to_lsga(N, None, run.limits, check=False)
    except NotDistributed as e:
        return Status.NO, {"error": str(e)}, False
    written = []
    for i, C in enumerate(comps, 1):
        name = f"component{i}.net"
        _write(os.path.join(run.args.output, name), serialize_net(C))
        written.append(name)
    name = f"{N.name}_lsga.net"
    _write(os.path.join(run.args.output, name), serialize_net(net))
    written.append(name)
    return Status.YES, {"components": len(comps), "written": written}, False


def cmd_export_dot(run: Run):
    N = run.read(run.args.file, PetriNet)
    if run.args.lts:
        L = LTS_BUILDERS[run.args.lts](N, run.limits)
        text = lts_to_dot(L, f"{N.name}_{run.args.lts}")
        truncated = L.truncated
    else:
        text, truncated = export_dot(N), False
    if run.args.output:
        _write(run.args.output, text)
    else:
        run.stdout.write(text)
    return (Status.UNKNOWN if truncated else Status.YES), {"format": "dot"}, truncated


def cmd_generate(run: Run):
    from .generators import random_net

    seed = run.args.seed if run.args.seed is not None else 0
    N = random_net(seed, run.args.places, run.args.transitions)
    text = serialize_net(N)
    if run.args.output:
        _write(run.args.output, text)
    else:
        run.stdout.write(text)
    return Status.YES, {"seed": seed}, False


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--max-markings", type=int, default=None, metavar="N")
    common.add_argument("--max-firing-len", type=int, default=None, metavar="N")
    common.add_argument("--json", dest="json_path", default=None, metavar="PATH",
                        help="write the verdict document here ('-' for stdout)")
    common.add_argument("--seed", type=int, default=None, help="seed for the random net generator")

    p = _Parser(prog="distnet", description="Distributability analysis and synthesis for Petri nets.",
                parents=[common])
    p.add_argument("--version", action="version", version=f"distnet {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("check", help="plain, one-safe, structural conflict, finitary")
    s.add_argument("file")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("distributable", help="distributability verdict")
    s.add_argument("file")
    s.set_defaults(func=cmd_distributable)

    s = sub.add_parser("synthesize", help="build a distributed implementation")
    s.add_argument("file")
    s.add_argument("-o", "--output", required=True, metavar="DIR")
    s.add_argument("--no-equivalence", action="store_true", help="skip the equivalence check")
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("equiv", help="compare two nets")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--relation", required=True, choices=sorted(RELATIONS))
    s.set_defaults(func=cmd_equiv)

    s = sub.add_parser("distribution", help="canonical distribution and distributedness")
    s.add_argument("file")
    s.set_defaults(func=cmd_distribution)

    s = sub.add_parser("compose", help="parallel composition of components")
    s.add_argument("files", nargs="+")
    s.add_argument("-o", "--output", required=True, metavar="FILE")
    s.set_defaults(func=cmd_compose)

    s = sub.add_parser("to-lsga", help="split a distributed net into components")
    s.add_argument("file")
    s.add_argument("-o", "--output", required=True, metavar="DIR")
    s.set_defaults(func=cmd_to_lsga)

    s = sub.add_parser("export-dot", help="Graphviz rendering of a net or its LTS")
    s.add_argument("file")
    s.add_argument("--lts", choices=sorted(LTS_BUILDERS), default=None)
    s.add_argument("-o", "--output", default=None, metavar="FILE")
    s.set_defaults(func=cmd_export_dot)

    s = sub.add_parser("generate", help="random net (uses --seed)")
    s.add_argument("--places", type=int, default=4)
    s.add_argument("--transitions", type=int, default=3)
    s.add_argument("-o", "--output", default=None, metavar="FILE")
    s.set_defaults(func=cmd_generate)
    return p


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_hoist_globals(argv))
        if args.max_markings is not None and args.max_markings < 1:
            raise UsageError("--max-markings must be positive")
        if args.max_firing_len is not None and args.max_firing_len < 1:
            raise UsageError("--max-firing-len must be positive")
    except UsageError as e:
        print(f"distnet: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    r = Run(args, stdout)
    start = time.perf_counter()
    try:
        status, body, truncated = args.func(r)
    except InputError as e:
        print(f"distnet: {e}", file=sys.stderr)
        return e.code
    except NetError as e:
        print(f"distnet: {e}", file=sys.stderr)
        return EXIT_DATAERR
    code = status_exit(status)
    doc = {
        "tool": "distnet",
        "version": __version__,
        "command": args.command,
        "inputs": r.inputs,
        "verdict": status.value,
        "exit": code,
        "result": jsonable(body),
        "truncated": bool(truncated),
        "limits": r.limits.to_json(),
        "wall_time": round(time.perf_counter() - start, 6),
    }
    if args.json_path == "-":
        stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif args.json_path:
        try:
            _write(args.json_path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        except InputError as e:
            print(f"distnet: {e}", file=sys.stderr)
            return e.code
    if args.command != "export-dot" and args.json_path != "-":
        stdout.write(_summary(doc) + "\n")
    return code


GLOBAL_VALUE_FLAGS = ("--max-markings", "--max-firing-len", "--json", "--seed")


def _hoist_globals(argv):
    """Move global flags in front of the subcommand so they can be given
    anywhere on the line."""
    front, rest = [], []
    i = 0
    while i < len(argv):
        a = argv[i]
        key = a.split("=", 1)[0]
        if key in GLOBAL_VALUE_FLAGS:
            if "=" in a:
                front.append(a)
            else:
                front.extend(argv[i:i + 2])
                i += 1
        else:
            rest.append(a)
        i += 1
    return front + rest


def _summary(doc) -> str:
    res = doc["result"]
    line = f"{doc['command']}: {doc['verdict']}"
    if isinstance(res, dict):
        if "outcome" in res:
            line += f" ({res['outcome']}"
            line += f": {res['reason']})" if res.get("reason") else ")"
        if "result" in res and isinstance(res["result"], dict) and res["result"].get("note"):
            line += f" ({res['result']['note']})"
        if "error" in res:
            line += f" ({res['error']})"
    if doc["truncated"]:
        line += " [truncated]"
    return line


def main():
    try:
        code = run()
    except KeyboardInterrupt:
        code = EXIT_SOFTWARE
    except Exception as e:  # report, do not dump a traceback on users
        print(f"distnet: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        code = EXIT_SOFTWARE
    sys.exit(code)
