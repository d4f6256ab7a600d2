"""Command-line front end: validation, analysis, diagnostics dumps, witness
construction, net generation, the HTTP service, and raw oracle checks.

Exit codes for analyze/witness: 0 reachable or coverable, 2 not-reachable,
1 any error. validate: 0 all checks green, 1 otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import oracle
from .concurrency import determine_concurrency
from .decide import COVERABLE, EXACT, NOT_REACHABLE, REACHABLE, NetAnalyzer
from .diverge import compute_diverging_points
from .formats import (
    StructureViolationError,
    export_dot,
    format_marking,
    format_native,
    load_net,
    parse_marking,
)
from .netcore import NetError, bits
from .postdom import compute_postdom
from .structure import validate_structure


def _read_input(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load(args, validate=False):
    text = _read_input(args.file)
    return load_net(text, fmt=args.format, validate=validate)


def _print_json(obj):
    print(json.dumps(obj, indent=2))


def _conflict_line(net, exp):
    x, y = net.labels[exp.x], net.labels[exp.y]
    if exp.kind == "forward-path":
        return f"{x} and {y} are never marked together: {' -> '.join(net.labels[i] for i in exp.path)}"
    if exp.kind == "backward-path":
        return f"{x} and {y} are never marked together: {' -> '.join(net.labels[i] for i in exp.path)}"
    if exp.kind == "unsafe-multiplicity":
        return f"{x} cannot hold more than one token (sound nets are safe)"
    if exp.decision is not None:
        p1 = " -> ".join(net.labels[i] for i in exp.path) if exp.path else "?"
        p2 = " -> ".join(net.labels[i] for i in exp.path2) if exp.path2 else "?"
        return f"the choice at {net.labels[exp.decision]} separates {x} from {y}: {p1} vs {p2}"
    return f"{x} and {y} exclude each other"


def cmd_validate(args):
    wf = _load(args)
    report = validate_structure(wf)
    soundness = None
    sound_text = "skipped"
    if report.ok():
        if args.assume_sound:
            sound_text = "assumed"
        else:
            soundness = oracle.check_soundness(wf, cap=args.cap)
            sound_text = "sound" if soundness.sound else "unsound"
    if args.out == "json":
        data = report.to_json_dict()
        data["soundness"] = sound_text
        if soundness is not None and not soundness.sound:
            data["soundnessReason"] = soundness.reason
            data["soundnessCounterexample"] = soundness.counterexample
        _print_json(data)
    else:
        print(f"workflow shape:        {'yes' if report.is_workflow else 'NO'}")
        print(f"proper transitions:    {'yes' if report.is_proper else 'NO'}")
        print(f"acyclic:               {'yes' if report.is_acyclic else 'NO'}")
        print(f"simple free-choice:    {'yes' if report.is_simple_fc else 'NO'}")
        print(f"extended free-choice:  {'yes' if report.is_extended_fc else 'NO'}")
        print(f"soundness:             {sound_text}")
        for v in report.violations:
            nodes = ",".join(v.nodes) if v.nodes else "-"
            print(f"  {v.code}: {v.message} ({nodes})")
        if soundness is not None and not soundness.sound:
            print(f"  UNSOUND: {soundness.reason}: {soundness.counterexample}")
    ok = report.ok() and sound_text in ("sound", "assumed")
    return 0 if ok else 1


def _analyze(args):
    wf = _load(args)
    an = NetAnalyzer(wf, assume_sound=args.assume_sound, cap=args.cap)
    report = an.analyze(args.marking, mode=args.mode)
    return an, report


def cmd_analyze(args):
    an, report = _analyze(args)
    if args.out == "json":
        _print_json(report.to_json_dict())
    elif args.out == "dot":
        print(export_dot(an.orig, report.roles, report.edge_roles), end="")
    else:
        print(f"verdict: {report.verdict}  (mode {report.mode}, {report.source}, net {report.soundness})")
        print(f"admissibility: {report.admissibility.verdict}")
        if report.admissibility.missing:
            print("missing: " + ", ".join(an.orig.to_labels(report.admissibility.missing)))
        if report.admissibility.conflicting:
            print("conflicting: " + ", ".join(an.orig.to_labels(report.admissibility.conflicting)))
        if report.chosen_delta is not None:
            print(f"diverging from: {an.tr.label(report.chosen_delta)}")
        if report.diverge is not None:
            print("diverging points: " + ", ".join(
                an.work.net.labels[i] for i in bits(report.diverge.divpoints)))
        for exp in report.conflicts:
            print("conflict: " + _conflict_line(an.work.net, exp))
        for note in report.notes:
            print(f"note: {note}")
    if report.verdict == NOT_REACHABLE:
        return 2
    return 0


def cmd_witness(args):
    an, report = _analyze(args)
    if report.verdict == NOT_REACHABLE:
        print(f"verdict: {report.verdict}; no witness exists", file=sys.stderr)
        return 2
    wit = an.build_witness(report)
    net = an.orig.net
    if args.out == "json":
        data = report.to_json_dict()
        _print_json(data["witness"])
    else:
        print(f"verdict: {report.verdict}")
        print(f"start    {format_marking(net, wit.markings[0])}")
        for k, t in enumerate(wit.sequence):
            print(f"fire {net.labels[t]:<8} -> {format_marking(net, wit.markings[k + 1])}")
    return 0


def cmd_concurrency(args):
    wf = _load(args, validate=True)
    rel = determine_concurrency(wf)
    adjacency = {
        wf.labels[p]: wf.to_labels(rel.places_of(p)) for p in wf.places()
    }
    _print_json(adjacency)
    return 0


def cmd_postdom(args):
    wf = _load(args, validate=True)
    data = compute_postdom(wf)
    out = {
        "ipdom": {wf.labels[i]: wf.labels[data.ipdom[i]] for i in range(wf.n)},
        "pdf": {wf.labels[i]: wf.to_labels(data.pdf[i]) for i in range(wf.n)},
    }
    if args.marking:
        m = parse_marking(wf.net, args.marking)
        div = compute_diverging_points(wf, data.pdf, m)
        out["divergingPoints"] = wf.to_labels(div.divpoints)
        out["divinfo"] = {
            wf.labels[i]: wf.to_labels(div.divinfo.get(i, 0))
            for i in bits(div.divpoints | div.pruned)
        }
        out["reaches"] = {
            wf.labels[i]: wf.to_labels(div.reaches.get(i, 0))
            for i in bits(div.divpoints | div.pruned)
        }
    _print_json(out)
    return 0


def cmd_gen(args):
    wf = oracle.generate_sound_afw(args.seed, size=args.size)
    print(format_native(wf), end="")
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_oracle(args):
    wf = _load(args)
    net = wf.net
    if args.check == "soundness":
        res = oracle.check_soundness(wf, cap=args.cap)
        _print_json(
            {
                "sound": res.sound,
                "reason": res.reason,
                "counterexample": res.counterexample,
                "states": len(res.graph.states),
            }
        )
        return 0 if res.sound else 1
    if args.check == "explore":
        graph = oracle.explore(wf, cap=args.cap)
        _print_json({"states": len(graph.states), "edges": len(graph.edges)})
        return 0
    if args.check == "concurrency":
        graph = oracle.explore(wf, cap=args.cap)
        rel = oracle.brute_concurrency(wf, graph)
        _print_json({wf.labels[p]: wf.to_labels(rel[p] & wf.place_mask) for p in wf.places()})
        return 0
    if args.check == "postdom":
        _print_json(
            {
                wf.labels[i]: wf.labels[j]
                for i, j in enumerate(oracle.brute_ipdom(wf))
                if j is not None
            }
        )
        return 0
    if not args.marking:
        print(f"error: oracle {args.check} needs -m/--marking", file=sys.stderr)
        return 1
    m = parse_marking(net, args.marking)
    if args.check == "divpoints":
        _print_json(wf.to_labels(oracle.brute_diverging_points(wf, m.support)))
        return 0
    graph = oracle.explore(wf, cap=args.cap)
    if args.check == "reachable":
        hit = oracle.brute_reachable(wf, graph, m)
    else:
        hit = oracle.brute_coverable(wf, graph, m)
    print("yes" if hit else "no")
    return 0 if hit else 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wfreach",
        description="Reachability and coverability analysis for sound acyclic "
        "free-choice workflow nets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, marking=False, marking_required=False, analysis=False, outputs=("text", "json")):
        p.add_argument("file", help="net file, or - for standard input")
        p.add_argument(
            "--format",
            choices=["native", "pnml", "auto"],
            default="auto",
            help="input format (default: auto-detect)",
        )
        if marking:
            p.add_argument("-m", "--marking", required=marking_required,
                           help="marking literal, e.g. [p3,p5] or [p9^2]")
        if analysis:
            p.add_argument("--mode", choices=[EXACT, "cover"], default=EXACT,
                           help="exact reachability or sub-marking coverability")
            p.add_argument("--assume-sound", action="store_true",
                           help="skip the soundness check (needed above the state cap)")
            p.add_argument("--cap", type=int, default=None,
                           help="state-space cap for the soundness oracle")
        if outputs:
            p.add_argument("--out", choices=list(outputs), default="text",
                           help="output format")

    p = sub.add_parser("validate", help="structural checks plus the soundness verdict")
    add_common(p)
    p.add_argument("--assume-sound", action="store_true")
    p.add_argument("--cap", type=int, default=None)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("analyze", help="decide reachability/coverability of a marking")
    add_common(p, marking=True, marking_required=True, analysis=True,
               outputs=("text", "json", "dot"))
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("witness", help="produce a firing sequence for a positive verdict")
    add_common(p, marking=True, marking_required=True, analysis=True)
    p.set_defaults(fn=cmd_witness)

    p = sub.add_parser("concurrency", help="dump the concurrency relation as JSON")
    add_common(p, outputs=None)
    p.set_defaults(fn=cmd_concurrency)

    p = sub.add_parser("postdom", help="dump post-dominators, frontiers, and diverging points")
    add_common(p, marking=True, outputs=None)
    p.set_defaults(fn=cmd_postdom)

    p = sub.add_parser("gen", help="generate a sound acyclic free-choice net")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=12, help="rough size budget")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("serve", help="run the HTTP JSON service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8479)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("oracle", help="brute-force reference checks")
    p.add_argument("check", choices=[
        "soundness", "explore", "concurrency", "postdom", "reachable",
        "coverable", "divpoints",
    ])
    add_common(p, marking=True, outputs=None)
    p.add_argument("--cap", type=int, default=None)
    p.set_defaults(fn=cmd_oracle)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except StructureViolationError as err:
        print(f"error: {err}", file=sys.stderr)
        for v in err.report.violations:
            print(f"  {v.code}: {v.message}", file=sys.stderr)
        return 1
    except oracle.CapExceeded as err:
        print(f"error: {err}; raise --cap or pass --assume-sound", file=sys.stderr)
        return 1
    except NetError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
