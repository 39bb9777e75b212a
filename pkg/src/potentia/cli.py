"""Command-line entry point.

Verbs: parse, translate, eval, frame, verify-control, decide, synthesize,
demo.  Reports are line-oriented plain text with a stable field order so
they can be golden-tested and composed in shells.  Exit codes: 0 success,
1 usage, 2 input format, 3 verification failure.  POTENTIA_MAX_WORLDS
overrides the default search bound.
"""

from __future__ import annotations

import argparse
import os
import sys

from .formula import (FormulaError, ParseError, is_modal_free, parse_fo,
    parse_prop, potentialist_translation, print_fo, print_prop)
from .kripke import clusters, frame_properties
from .potentialist import PotentialistError, eval_fo
from . import serialize, settheory, synthesis, theories
from .control import certify_dial, certify_ratchet
from .settheory import (build_rank_system, build_transitive_system,
    height_dial, rank_ratchet, transitive_buttons)

USAGE_EXIT, FORMAT_EXIT, VERIFY_EXIT = 1, 2, 3


def _bound(args):
    if getattr(args, "bound", None):
        return args.bound
    env = os.environ.get("POTENTIA_MAX_WORLDS")
    return int(env) if env else 8


def _print_model(cm, out):
    frame = cm.model.frame
    print(f"countermodel worlds={frame.world_count} class={cm.frame_class} "
          f"failing-world={cm.world}", file=out)
    print(f"access {frame.pairs()}", file=out)
    for w in range(frame.world_count):
        true = sorted(cm.model.valuation[w])
        print(f"world {w}: vars={true}", file=out)


def cmd_parse(args, out):
    if args.prop is not None:
        print(print_prop(parse_prop(args.prop)), file=out)
    else:
        print(print_fo(parse_fo(args.fo)), file=out)
    return 0


def cmd_translate(args, out):
    phi = parse_fo(args.formula)
    if not is_modal_free(phi):
        print("error: formula already contains modal operators", file=out)
        return FORMAT_EXIT
    print(print_fo(potentialist_translation(phi)), file=out)
    return 0


def cmd_eval(args, out):
    system = serialize.load_system(args.system)
    w = system.world_index(_world_key(args.world))
    phi = parse_fo(args.formula, system.signature)
    value = eval_fo(system, w, phi)
    print("true" if value else "false", file=out)
    return 0


def _world_key(text):
    return int(text) if text.isdigit() else text


def cmd_frame(args, out):
    system = serialize.load_system(args.system)
    props = frame_properties(system.frame())
    for name in ("reflexive", "transitive", "convergent", "linear_preorder",
                 "complete"):
        print(f"{name}={str(getattr(props, name)).lower()}", file=out)
    if props.reflexive and props.transitive:
        dec = clusters(system.frame())
        print(f"clusters={len(dec.clusters)}", file=out)
    return 0


def cmd_verify_control(args, out):
    system = serialize.load_system(args.system)
    cert = serialize.load_certificate(args.cert, system)
    print(f"kind={cert.kind} formulas={len(cert.formulas)} "
          f"base={system.world_ids[cert.base_world]}", file=out)
    print(f"verified={str(cert.verified).lower()}", file=out)
    return 0 if cert.verified else VERIFY_EXIT


def cmd_decide(args, out):
    phi = parse_prop(args.formula)
    verdict = theories.decide(phi, args.theory, _bound(args))
    if verdict.is_theorem:
        print(f"THEOREM(bound={verdict.bound})", file=out)
    else:
        cm = verdict.countermodel
        print(f"NONTHEOREM worlds={cm.model.frame.world_count} "
              f"class={cm.frame_class}", file=out)
        _print_model(cm, out)
    return 0


def cmd_classify(args, out):
    phi = parse_prop(args.formula)
    print(theories.classify(phi, _bound(args)), file=out)
    return 0


def cmd_synthesize(args, out):
    system = serialize.load_system(args.system)
    cert = serialize.load_certificate(args.cert, system)
    if not cert.verified:
        print("error: certificate rejected on load", file=out)
        return VERIFY_EXIT
    phi = parse_prop(args.formula)
    report = synthesis.synthesize(system, cert, phi, args.theory, _bound(args))
    if not report.found:
        print(f"NO-COUNTERMODEL theory={args.theory} bound={report.bound}",
              file=out)
        return 0
    _print_model(report.fitted, out)
    for k, label in enumerate(report.association.labels):
        print(f"label {k}: {print_fo(label)}", file=out)
    for idx, psi in report.substitution.mapping:
        print(f"sigma p{idx} := {print_fo(psi)}", file=out)
    print(f"bisimulation={str(report.bisimulation_ok).lower()}", file=out)
    print(f"refutation={report.refutation}", file=out)
    return 0 if report.ok else VERIFY_EXIT


def cmd_demo(args, out):
    if args.kind == "rank":
        system = build_rank_system(args.N)
        base = 0
        if args.N >= 3:
            n = max((args.N - 1) // 2, 1)
            stages, dial = rank_ratchet(n, 2, args.N)
            dial_cert = certify_dial(system, dial, base)
            cert = certify_ratchet(system, base, stages, dial_cert)
        else:
            dial_cert = certify_dial(system, height_dial(1, args.N), base)
            cert = dial_cert
    else:
        system = build_transitive_system(args.N)
        base = 0
        buttons, dial, _ = transitive_buttons(min(args.N - 1, 2), args.N)
        dial_cert = certify_dial(system, dial, base)
        from .control import certify_buttons
        cert = certify_buttons(system, base, buttons, dial_cert)
    serialize.save_system(system, args.out_system)
    serialize.save_certificate(cert, args.out_cert)
    props = frame_properties(system.frame())
    print(f"worlds={len(system.worlds)}", file=out)
    print(f"linear={str(props.linear_preorder).lower()} "
          f"convergent={str(props.convergent).lower()}", file=out)
    print(f"certificate={cert.kind} verified={str(cert.verified).lower()}",
          file=out)
    print(f"wrote {args.out_system} {args.out_cert}", file=out)
    return 0 if cert.verified else VERIFY_EXIT


def build_parser():
    top = argparse.ArgumentParser(prog="potentia", add_help=True)
    sub = top.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("parse", help="parse and reprint a formula")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--prop")
    g.add_argument("--fo")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("translate", help="potentialist translation of a "
                       "modal-free formula over {mem}")
    p.add_argument("formula")
    p.set_defaults(run=cmd_translate)

    p = sub.add_parser("eval", help="evaluate a formula at a world")
    p.add_argument("--system", required=True)
    p.add_argument("--world", required=True)
    p.add_argument("--formula", required=True)
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("frame", help="frame property record of a system")
    p.add_argument("--system", required=True)
    p.set_defaults(run=cmd_frame)

    p = sub.add_parser("verify-control", help="re-verify a certificate")
    p.add_argument("--system", required=True)
    p.add_argument("--cert", required=True)
    p.set_defaults(run=cmd_verify_control)

    p = sub.add_parser("decide", help="bounded theoremhood decision")
    p.add_argument("--formula", required=True)
    p.add_argument("--theory", required=True,
                   choices=list(theories.THEORY_NAMES))
    p.add_argument("--bound", type=int)
    p.set_defaults(run=cmd_decide)

    p = sub.add_parser("classify", help="least theory proving a formula")
    p.add_argument("--formula", required=True)
    p.add_argument("--bound", type=int)
    p.set_defaults(run=cmd_classify)

    p = sub.add_parser("synthesize", help="countermodel to failing instance")
    p.add_argument("--system", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--theory", required=True, choices=["S5", "S4.2", "S4.3"])
    p.add_argument("--bound", type=int)
    p.set_defaults(run=cmd_synthesize)

    p = sub.add_parser("demo", help="build a canonical system and certificate")
    p.add_argument("kind", choices=["rank", "transitive"])
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--out-system", default="system.json")
    p.add_argument("--out-cert", default="certificate.json")
    p.set_defaults(run=cmd_demo)
    return top


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE_EXIT if e.code else 0
    try:
        return args.run(args, out)
    except ParseError as e:
        print(f"syntax error: {e} (expected {list(e.expected)})", file=out)
        return FORMAT_EXIT
    except (FormulaError, serialize.FormatError, PotentialistError,
            settheory.RankError, FileNotFoundError, ValueError,
            KeyError) as e:
        print(f"error: {e}", file=out)
        return FORMAT_EXIT


if __name__ == "__main__":
    sys.exit(main())
