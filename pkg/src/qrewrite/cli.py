"""Command-line front end.

Subcommands: ``check``, ``normalize``, ``replay``, ``soundness``,
``repl``, ``serve`` and ``rules``.  Exit codes are a stable contract:
0 success, 1 verification or sort failure, 2 parse failure, 3 resource
limit exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources

from .errors import (
    ParseError, QRewriteError, ReplayError, SortError, StepLimitExceeded,
)
from .interp import check_rule_soundness, mutated_rules
from .rules import Registry, default_registry, register_user_rules
from .session import SessionState
from .strategy import NormalizeConfig, normalize, replay
from .syntax import (
    DerivationDocument, parse_derivation, parse_rules_file, parse_term,
    render_canonical, render_derivation, render_dirac, rules_markdown,
)
from .terms import format_position, sort_of

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_LIMIT = 3


def fixture_path(name: str) -> str:
    return str(resources.files("qrewrite").joinpath("fixtures", name))


def _read_input(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _registry_from_args(args) -> Registry:
    reg = default_registry()
    if getattr(args, "rules", None):
        with open(args.rules, "r", encoding="utf-8") as f:
            reg = register_user_rules(reg, parse_rules_file(f.read()))
    return reg


def _config_from_args(args) -> NormalizeConfig:
    max_steps = getattr(args, "max_steps", None)
    if max_steps is None:
        max_steps = int(os.environ.get("QREWRITE_MAX_STEPS", "10000"))
    return NormalizeConfig(
        max_steps=max_steps,
        apply_user_rules=not getattr(args, "no_user_rules", False),
        optional_rules=frozenset(getattr(args, "optional_rule", None) or ()))


def _render(term, fmt: str) -> str:
    return render_dirac(term) if fmt == "dirac" else render_canonical(term)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    try:
        term = parse_term(_read_input(args.file))
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except SortError as e:
        print(f"sort error: {e}", file=sys.stderr)
        return EXIT_FAIL
    print(sort_of(term))
    return EXIT_OK


def cmd_normalize(args) -> int:
    try:
        term = parse_term(_read_input(args.file))
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except SortError as e:
        print(f"sort error: {e}", file=sys.stderr)
        return EXIT_FAIL
    registry = _registry_from_args(args)
    config = _config_from_args(args)
    try:
        final, deriv = normalize(term, registry, config)
    except StepLimitExceeded as e:
        print(f"step limit: {e}", file=sys.stderr)
        return EXIT_LIMIT
    print(_render(final, args.format))
    print(f"steps: {len(deriv.steps)}", file=sys.stderr)
    if args.dump_derivation:
        doc = DerivationDocument(
            initial_text=render_canonical(term),
            steps=list(deriv.steps),
            expect_text=render_canonical(final))
        with open(args.dump_derivation, "w", encoding="utf-8") as f:
            f.write(render_derivation(doc))
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        doc = parse_derivation(_read_input(args.file))
        initial = doc.initial_term()
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except SortError as e:
        print(f"sort error: {e}", file=sys.stderr)
        return EXIT_FAIL
    registry = _registry_from_args(args)
    try:
        final = replay(initial, doc.steps, registry)
    except ReplayError as e:
        print(f"replay failed at step {e.step_index}: {e.cause}", file=sys.stderr)
        return EXIT_FAIL
    expected = doc.expect_term()
    if expected is not None:
        if final == expected:
            print(f"ok: {len(doc.steps)} steps verified")
            return EXIT_OK
        print("final term does not match expectation:", file=sys.stderr)
        print(f"  got:      {render_canonical(final)}", file=sys.stderr)
        print(f"  expected: {render_canonical(expected)}", file=sys.stderr)
        return EXIT_FAIL
    print(render_canonical(final))
    return EXIT_OK


def cmd_soundness(args) -> int:
    registry = _registry_from_args(args)
    mutations = mutated_rules()
    failures = 0
    reports = []
    for rule in registry.rules:
        report = check_rule_soundness(rule, trials=args.trials, seed=args.seed)
        reports.append(report.to_dict())
        status = "pass" if report.ok else "FAIL"
        if not report.ok:
            failures += 1
        if not args.json:
            print(f"{status}  {rule.rule_id:22s} {report.passed}/{report.trials}")
            if report.counterexample and args.verbose:
                print(f"      lhs: {report.counterexample['lhs']}")
                print(f"      rhs: {report.counterexample['rhs']}")
    controls = []
    if args.mutate:
        for rid in args.mutate:
            if rid not in mutations:
                print(f"no mutation control for rule {rid!r}", file=sys.stderr)
                return EXIT_FAIL
            report = check_rule_soundness(mutations[rid], trials=args.trials,
                                          seed=args.seed)
            caught = not report.ok
            controls.append({"rule": rid, "caught": caught,
                             **report.to_dict()})
            if not args.json:
                print(f"{'caught' if caught else 'MISSED'}  mutated {rid:14s} "
                      f"{report.passed}/{report.trials}")
            if not caught:
                failures += 1
    if args.json:
        doc = {"trials": args.trials, "seed": args.seed, "rules": reports,
               "mutationControls": controls, "ok": failures == 0}
        print(json.dumps(doc, indent=2))
    return EXIT_OK if failures == 0 else EXIT_FAIL


def cmd_rules(args) -> int:
    registry = _registry_from_args(args)
    print(rules_markdown(list(registry.rules)), end="")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(idle_timeout=args.idle_timeout)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# ---------------------------------------------------------------------------
# REPL
# ---------------------------------------------------------------------------

REPL_HELP = """commands:
  load <term>          start a session from a term
  show [dirac|canonical]
  moves                list applicable steps
  apply <n>            apply move number n
  undo                 revert the last mutation
  normalize            drive the term to canonical form
  save <file>          write the derivation so far
  help                 this text
  quit
"""


def repl(args=None) -> int:
    registry = _registry_from_args(args) if args else default_registry()
    config = _config_from_args(args) if args else NormalizeConfig()
    session: SessionState | None = None
    print("qrewrite interactive derivation; 'help' for commands")
    while True:
        try:
            line = input("qr> ").strip()
        except EOFError:
            print()
            return EXIT_OK
        if not line:
            continue
        cmd, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if cmd == "quit" or cmd == "exit":
                return EXIT_OK
            elif cmd == "help":
                print(REPL_HELP, end="")
            elif cmd == "load":
                term = parse_term(rest)
                session = SessionState(term, registry, config)
                print(f"sort: {sort_of(term)}")
                print(render_dirac(term))
            elif session is None:
                print("no session; use: load <term>")
            elif cmd == "show":
                fmt = rest or "dirac"
                print(_render(session.current, fmt))
            elif cmd == "moves":
                for i, mv in enumerate(session.moves()):
                    print(f"[{i}] {mv.rule_id} {mv.direction} "
                          f"{format_position(mv.position)}")
            elif cmd == "apply":
                step = session.apply_index(int(rest))
                print(f"applied {step.rule_id} {step.direction} "
                      f"{format_position(step.position)}")
                print(render_dirac(session.current))
            elif cmd == "undo":
                if session.undo():
                    print(render_dirac(session.current))
                else:
                    print("nothing to undo")
            elif cmd == "normalize":
                n = session.run_normalize()
                print(f"{n} steps")
                print(render_dirac(session.current))
            elif cmd == "save":
                with open(rest, "w", encoding="utf-8") as f:
                    f.write(render_derivation(session.derivation_document()))
                print(f"saved {rest}")
            else:
                print(f"unknown command {cmd!r}; 'help' lists commands")
        except (QRewriteError, ValueError, IndexError, OSError) as e:
            print(f"error: {e}")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qrewrite",
        description="Sorted term rewriting for Dirac-style quantum algebra.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_rules_flag(sp):
        sp.add_argument("--rules", help="file of extra rewrite rules")

    sp = sub.add_parser("check", help="parse a term and print its sort")
    sp.add_argument("file", nargs="?", help="term file (default stdin)")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("normalize", help="print the canonical form of a term")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--max-steps", type=int, default=None)
    sp.add_argument("--format", choices=("canonical", "dirac"),
                    default="canonical")
    sp.add_argument("--dump-derivation", metavar="FILE")
    sp.add_argument("--no-user-rules", action="store_true")
    sp.add_argument("--optional-rule", action="append", metavar="ID",
                    help="enable an opt-in rule (e.g. conjugateIP)")
    add_rules_flag(sp)
    sp.set_defaults(func=cmd_normalize)

    sp = sub.add_parser("replay", help="verify a derivation file")
    sp.add_argument("file")
    add_rules_flag(sp)
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("soundness", help="numerical soundness of every rule")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--mutate", action="append", metavar="RULEID",
                    help="also run a negative control for this rule")
    sp.add_argument("--verbose", action="store_true")
    sp.add_argument("--json", action="store_true",
                    help="emit a machine-readable report")
    add_rules_flag(sp)
    sp.set_defaults(func=cmd_soundness)

    sp = sub.add_parser("repl", help="interactive derivation loop")
    sp.add_argument("--max-steps", type=int, default=None)
    sp.add_argument("--optional-rule", action="append", metavar="ID")
    add_rules_flag(sp)
    sp.set_defaults(func=repl)

    sp = sub.add_parser("serve", help="run the derivation session server")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8077)
    sp.add_argument("--idle-timeout", type=float, default=3600.0)
    sp.set_defaults(func=cmd_serve)

    sp = sub.add_parser("rules", help="print the rule catalogue as markdown")
    add_rules_flag(sp)
    sp.set_defaults(func=cmd_rules)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StepLimitExceeded as e:
        print(f"step limit: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except QRewriteError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
