"""Command-line entry points: specialize, run, compare.

Exit codes: 0 success, 2 parse error or missing file, 3 budget
exhaustion, 4 floundering.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .codegen import RenameMap, emit_program
from .globalctl import GlobalConfig, SpecializationError, specialize
from .parser import ParseError, parse_goal, parse_program
from .pretty import pp_goal, pp_term
from .sld import FlounderError, LocalConfig, run_query
from .terms import BUILTIN_PREDS, Conjunction, Program, canonical, vars_of
from .unify import apply


def _parse_local(value: str, order: str, leftmost_only: bool, neg_budget: int) -> LocalConfig:
    if value.startswith("depth:"):
        return LocalConfig("depth", depth=int(value.split(":", 1)[1]), order=order,
                           leftmost_only=leftmost_only, neg_budget=neg_budget)
    lookahead = 0 if value == "det" else 1
    return LocalConfig(value, lookahead=lookahead, order=order,
                       leftmost_only=leftmost_only, neg_budget=neg_budget)


_GLOBAL_MODES = {"variant": "variant", "instance": "instance", "chtree": "instance_plus_chtree"}
_WHISTLE_MODES = {"embed": "embedding", "embed-chtree": "embedding_plus_chtree", "wfo": "termsize_wfo"}


def _build_config(args: argparse.Namespace) -> GlobalConfig:
    local = _parse_local(args.local, "termsize" if args.order == "termsize" else "embed",
                         args.leftmost_only, args.neg_budget)
    if args.whistle.startswith("depth:"):
        whistle, depth_k = "none_with_depth", int(args.whistle.split(":", 1)[1])
    else:
        whistle, depth_k = _WHISTLE_MODES[args.whistle], 10
    return GlobalConfig(
        covered_mode=_GLOBAL_MODES[args.global_mode],
        whistle_mode=whistle,
        depth_k=depth_k,
        conjunctive=args.conjunctive,
        local=local,
        relabel_ancestor=args.relabel_ancestor,
        max_nodes=args.max_nodes,
        max_steps=args.max_steps,
    )


def _load_program(path: str) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)
    try:
        return parse_program(text)
    except ParseError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _parse_goal_arg(text: str) -> Conjunction:
    try:
        return parse_goal(text)
    except ParseError as exc:
        print(f"bad goal {text!r}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def cmd_specialize(args: argparse.Namespace) -> int:
    program = _load_program(args.file)
    goals = [_parse_goal_arg(g) for g in args.goal]
    config = _build_config(args)
    try:
        result = specialize(program, goals, config, filtering=args.filter)
    except SpecializationError as exc:
        print(f"specialisation aborted: {exc}", file=sys.stderr)
        if args.trace and exc.trace is not None:
            Path(args.trace).write_text(json.dumps(exc.trace, sort_keys=True, indent=1))
        return 3
    text = emit_program(result.residual, result.rename_map)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        Path(args.trace).write_text(json.dumps(result.trace, sort_keys=True, indent=1))
    if args.map:
        Path(args.map).write_text(result.rename_map.to_json())
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    program = _load_program(args.file)
    goal = _parse_goal_arg(args.goal)
    try:
        result = run_query(program, goal, args.max_steps)
    except FlounderError as exc:
        print(f"floundered: {exc}", file=sys.stderr)
        return 4
    qvars = vars_of(goal)
    for answer in result.answers:
        if not qvars:
            print("yes")
        else:
            print(", ".join(f"{v.name} = {pp_term(apply(v, answer))}" for v in qvars))
    suffix = " (exhausted)" if result.exhausted else ""
    print(f"steps: {result.resolution_steps}{suffix}")
    return 0


def _answer_key(goal: Conjunction, answers) -> frozenset:
    return frozenset(repr(canonical(apply(goal, a))) for a in answers)


def cmd_compare(args: argparse.Namespace) -> int:
    original = _load_program(args.original)
    specialized = _load_program(args.specialized)
    rename_map: Optional[RenameMap] = None
    if args.map:
        rename_map = RenameMap.from_json(Path(args.map).read_text())
    try:
        goal_lines = [
            line.strip().rstrip(".")
            for line in Path(args.goals).read_text().splitlines()
            if line.strip() and not line.strip().startswith("%")
        ]
    except OSError as exc:
        print(f"cannot read {args.goals}: {exc}", file=sys.stderr)
        return 2
    rows = []
    for line in goal_lines:
        goal = _parse_goal_arg(line)
        rows.append(compare_goal(original, specialized, goal, rename_map, args.max_steps))
    if args.json:
        print(json.dumps(rows, sort_keys=True, indent=1))
    else:
        headers = ["goal", "equal", "steps_orig", "steps_spec", "ratio", "note"]
        widths = [max(len(h), max((len(str(r[h])) for r in rows), default=0)) for h in headers]
        print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
        for r in rows:
            print("  ".join(str(r[h]).ljust(w) for h, w in zip(headers, widths)))
    return 0


def compare_goal(
    original: Program,
    specialized: Program,
    goal: Conjunction,
    rename_map: Optional[RenameMap],
    max_steps: int,
) -> dict:
    """Run one goal on both programs and compare answers and step counts."""
    note = ""
    spec_goal = goal
    if rename_map is not None:
        closed = True
        try:
            rename_map.fold_conjunction(goal, specialized.open_preds, strict=True)
        except Exception:
            closed = False
        if closed:
            spec_goal = rename_map.fold_conjunction(goal, specialized.open_preds, strict=False)
        else:
            note = "not closed"
    res_orig = run_query(original, goal, max_steps)
    res_spec = run_query(specialized, spec_goal, max_steps)
    equal = _answer_key(goal, res_orig.answers) == _answer_key(goal, res_spec.answers)
    if res_orig.exhausted or res_spec.exhausted:
        note = (note + "; " if note else "") + "step budget hit"
    ratio = round(res_spec.resolution_steps / res_orig.resolution_steps, 3) if res_orig.resolution_steps else ""
    return {
        "equal": equal,
        "goal": pp_goal(goal),
        "note": note,
        "ratio": ratio,
        "steps_orig": res_orig.resolution_steps,
        "steps_spec": res_spec.resolution_steps,
    }


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdeduce", description="partial deduction engine")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("specialize", help="specialise a program for a goal")
    sp.add_argument("file")
    sp.add_argument("--goal", action="append", required=True, help="goal to specialise for (repeatable)")
    sp.add_argument("--out", help="write the residual program here (default: stdout)")
    sp.add_argument("--trace", help="write the global-tree trace JSON here")
    sp.add_argument("--map", help="write the rename map JSON here")
    sp.add_argument("--local", default="ecce",
                    help="unfolding strategy: depth:<k>|det|det1|shower|fork|beam|ecce")
    sp.add_argument("--order", default="embed", choices=["embed", "termsize"])
    sp.add_argument("--global", dest="global_mode", default="variant",
                    choices=["variant", "instance", "chtree"])
    sp.add_argument("--whistle", default="embed",
                    help="whistle: embed|embed-chtree|wfo|depth:<k>")
    sp.add_argument("--conjunctive", action="store_true")
    sp.add_argument("--filter", dest="filter", action="store_true", default=True)
    sp.add_argument("--no-filter", dest="filter", action="store_false")
    sp.add_argument("--leftmost-only", action="store_true")
    sp.add_argument("--relabel-ancestor", action="store_true")
    sp.add_argument("--neg-budget", type=int, default=1000)
    sp.add_argument("--max-nodes", type=int, default=10_000)
    sp.add_argument("--max-steps", type=int, default=1_000_000)
    sp.set_defaults(func=cmd_specialize)

    rp = sub.add_parser("run", help="run a goal against a program")
    rp.add_argument("file")
    rp.add_argument("--goal", required=True)
    rp.add_argument("--max-steps", type=int, default=1_000_000)
    rp.set_defaults(func=cmd_run)

    cp = sub.add_parser("compare", help="compare answers and step counts")
    cp.add_argument("original")
    cp.add_argument("specialized")
    cp.add_argument("--goals", required=True, help="file with one goal per line")
    cp.add_argument("--map", help="rename map JSON from specialize")
    cp.add_argument("--json", action="store_true")
    cp.add_argument("--max-steps", type=int, default=1_000_000)
    cp.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
