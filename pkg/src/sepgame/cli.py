"""Command-line front door: run, check, verify, game, solve.

Exit codes: 0 pass, 1 logical failure (rejected proof, counterexample,
unwinnable game), 2 usage or I/O error, 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .game import NoWin, check_winning_strategy, replay_lines, solve_eve
from .logic import all_logical_states, erase, lstate_from_text, satisfies
from .machine import MachineState
from .proof import check_proof
from .semantics import EnumerationBudget, enumerate_traces
from .soundness import ExtractedStrategy, drive_play, verify_corollary
from .syntax import (FTrue, ParseError, Star, parse_program, parse_proof,
                     parse_universe, program_to_text)
from .traces import trace_to_lines


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _write_out(text: str, path=None):
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_universe(path):
    return parse_universe(_read(path))


def _load_checked_proof(args, u):
    node = parse_proof(_read(args.proof))
    result = check_proof(node, u, allow_extensions=args.allow_extensions)
    return node, result


def _full_perm_inits(pre, rho, u):
    """Initial logical states for the corollary: every full-permission state
    over the universe satisfying P * true."""
    want = Star(pre, FTrue())
    out = []
    for sigma in all_logical_states(u):
        perms = [p for _, (_, p) in sigma.stack.items()] + \
                [p for _, (_, p) in sigma.heap.items()]
        if all(p == 1 for p in perms) and satisfies(sigma, want, rho, u):
            out.append(sigma)
    return out


def _full_perm_machine_states(u):
    seen = set()
    for sigma in all_logical_states(u):
        perms = [p for _, (_, p) in sigma.stack.items()] + \
                [p for _, (_, p) in sigma.heap.items()]
        if all(p == 1 for p in perms):
            seen.add(MachineState(erase(sigma), frozenset()))
    return sorted(seen, key=repr)


def cmd_run(args) -> int:
    u = _load_universe(args.universe)
    prog = parse_program(_read(args.program))
    if args.init is not None:
        inits = [MachineState(erase(lstate_from_text(args.init)), frozenset())]
    else:
        inits = _full_perm_machine_states(u)
        if args.first_init:
            inits = inits[:1]
    lines = []
    total = returning = 0
    try:
        for t, ret, _ in enumerate_traces(prog, inits, u, maxlen=args.maxlen,
                                          max_traces=args.max_traces):
            lines.append(f"trace {total} returning={'yes' if ret else 'no'} "
                         f"length={len(t)}")
            lines.extend(trace_to_lines(t))
            lines.append("")
            total += 1
            returning += int(ret)
    except EnumerationBudget as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    lines.append(f"total {total} traces, {returning} returning")
    _write_out("\n".join(lines), args.output)
    return 0


def cmd_check(args) -> int:
    u = _load_universe(args.universe)
    node, result = _load_checked_proof(args, u)
    _write_out(json.dumps(result.report(args.universe), indent=2,
                          sort_keys=True), args.output)
    return 0 if result.ok else 1


def cmd_verify(args) -> int:
    u = _load_universe(args.universe)
    prog = parse_program(_read(args.program))
    node, result = _load_checked_proof(args, u)
    if result.ok and node.cmd != prog:
        print("program does not match the proof's conclusion", file=sys.stderr)
        return 1
    if not result.ok:
        _write_out(json.dumps(result.report(args.universe), indent=2,
                              sort_keys=True), args.output)
        return 1
    if args.inits is not None:
        inits = [lstate_from_text(line) for line in _read(args.inits).splitlines()
                 if line.strip() and not line.strip().startswith("#")]
    else:
        inits = _full_perm_inits(node.pre, result.valuation, u)
    report = verify_corollary(result, node, inits, u, maxlen=args.maxlen,
                              parallelism=args.parallel,
                              emit_replays=args.emit_replays,
                              program_label=args.program,
                              proof_label=args.proof)
    _write_out(json.dumps(report, indent=2, sort_keys=True), args.output)
    return 0 if not report["failures"] else 1


def _pick_trace(prog, u, index, maxlen=None):
    inits = _full_perm_machine_states(u)
    for i, (t, ret, w) in enumerate(enumerate_traces(prog, inits, u,
                                                     maxlen=maxlen)):
        if i == index:
            return t, ret, w
    raise UsageError(f"trace index {index} out of range")


def cmd_game(args) -> int:
    u = _load_universe(args.universe)
    prog = parse_program(_read(args.program))
    node, result = _load_checked_proof(args, u)
    if not result.ok:
        print("proof rejected; run `sepgame check` for details", file=sys.stderr)
        return 1
    if node.cmd != prog:
        print("program does not match the proof's conclusion", file=sys.stderr)
        return 1
    t, ret, w = _pick_trace(prog, u, args.trace_index, args.maxlen)
    strat = ExtractedStrategy(node, t, u, result.valuation)
    lines = [f"trace {args.trace_index} length={len(t)} "
             f"returning={'yes' if ret else 'no'}"]
    lines.extend(trace_to_lines(t))
    lines.append("")
    play = drive_play(strat, t, strat.spec, u)
    if play:
        lines.append("replay:")
        lines.extend(replay_lines(play, t, strat.spec, u))
    else:
        lines.append("replay: no winning initial state (vacuous game)")
    check = check_winning_strategy(strat, t, strat.spec, u, budget=args.budget)
    lines.append("")
    lines.append(f"strategy check: {check.verdict} ({check.reason})")
    _write_out("\n".join(lines), args.output)
    if check.verdict == "unknown":
        return 3
    return 0 if check.verdict == "pass" else 1


def cmd_solve(args) -> int:
    u = _load_universe(args.universe)
    prog = parse_program(_read(args.program))
    node, result = _load_checked_proof(args, u)
    if not result.ok:
        print("proof rejected; run `sepgame check` for details", file=sys.stderr)
        return 1
    if node.cmd != prog:
        print("program does not match the proof's conclusion", file=sys.stderr)
        return 1
    t, ret, w = _pick_trace(prog, u, args.trace_index, args.maxlen)
    strat = ExtractedStrategy(node, t, u, result.valuation)
    verdict = solve_eve(t, strat.spec, u, budget=args.budget)
    if verdict == "unknown":
        _write_out("solver verdict: unknown (budget exceeded)", args.output)
        return 3
    if isinstance(verdict, NoWin):
        from .separation import sep_state_to_text
        _write_out("solver verdict: no winning strategy\ncounterexample initial: "
                   + sep_state_to_text(verdict.counterexample), args.output)
        return 1
    n = len(verdict.initials)
    _write_out(f"solver verdict: winning strategy found ({n} initial states)",
               args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepgame",
        description="Trace semantics, proof checking and separation games "
                    "for a concurrent while-language.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, proof=False, program=False):
        if program:
            p.add_argument("program", help="program file")
        if proof:
            p.add_argument("proof", help="proof script")
        p.add_argument("-u", "--universe", required=True, help="universe config")
        p.add_argument("--maxlen", type=int, default=None,
                       help="override the universe's trace length bound")
        p.add_argument("--output", default=None, help="write output to a file")

    p = sub.add_parser("run", help="enumerate the traces of a program")
    common(p, program=True)
    p.add_argument("--max-traces", type=int, default=None)
    p.add_argument("--init", default=None,
                   help="single initial logical state, e.g. '{x=0@1|}'")
    p.add_argument("--first-init", action="store_true",
                   help="only the first full-permission initial state")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="check a proof script")
    common(p, proof=True)
    p.add_argument("--allow-extensions", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="verify a proven program end to end")
    common(p, program=True, proof=True)
    p.add_argument("--allow-extensions", action="store_true")
    p.add_argument("--inits", default=None,
                   help="file of initial logical states, one per line")
    p.add_argument("--parallel", type=int, default=1,
                   help="fan-out degree across traces")
    p.add_argument("--emit-replays", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("game", help="replay the extracted strategy on a trace")
    common(p, program=True, proof=True)
    p.add_argument("--allow-extensions", action="store_true")
    p.add_argument("--trace-index", type=int, required=True)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("solve", help="search for a winning strategy directly")
    common(p, program=True, proof=True)
    p.add_argument("--allow-extensions", action="store_true")
    p.add_argument("--trace-index", type=int, required=True)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError) as exc:
        print(f"sepgame: {exc}", file=sys.stderr)
        return 2
    except EnumerationBudget as exc:
        print(f"sepgame: budget exceeded: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
