"""Command-line entry point.

Exit codes: 0 success (including "no equilibrium found"), 1 schema or file
error, 2 semantic error, 3 budget exceeded with no fallback.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import props, reports
from .instance import SchemaError, dumps, load, load_profile
from .selection import BudgetExceeded

EXIT_OK, EXIT_SCHEMA, EXIT_SEMANTIC, EXIT_BUDGET = 0, 1, 2, 3


def _k_list(text: str) -> list:
    try:
        ks = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None
    if not ks or any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError("refinement factors must be positive integers")
    return ks


def _target(text: str):
    try:
        t = json.loads(text)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError("target must be JSON: a list of masses or an action-to-mass object") from None
    if not isinstance(t, (list, dict)):
        raise argparse.ArgumentTypeError("target must be a list or an object")
    return t


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="privecon", description="Equilibrium solver and verifier for finite "
                                "games and abstract economies with private information.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", required=True, help="instance JSON file")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, help="override solver.seed")
    common.add_argument("--budget", type=int, help="override solver.budget")
    common.add_argument("--refine", type=int, help="override solver.refine (split each type atom k ways)")
    common.add_argument("--theorem4", action="store_true", default=None,
                        help="use the G selector off the no-improvement set")
    common.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="search for an economy equilibrium")
    sub.add_parser("solve-game", parents=[common], help="search for a pure Nash equilibrium")
    v = sub.add_parser("verify", parents=[common], help="check a supplied profile")
    v.add_argument("--profile", required=True, help="profile JSON file")
    sub.add_parser("audit", parents=[common], help="report the existence hypotheses")
    pu = sub.add_parser("purify", parents=[common], help="pure strategy matching a target distribution")
    pu.add_argument("--player", type=int, default=1, help="1-based player index (default 1)")
    pu.add_argument("--target", type=_target, required=True,
                    help='JSON list of masses in action order, or {"action": mass}')
    rs = sub.add_parser("refine-study", parents=[common], help="gap and equilibrium flag per refinement level")
    rs.add_argument("--k-list", type=_k_list, default=[1, 2, 4, 8], help="comma-separated factors (default 1,2,4,8)")
    pr = sub.add_parser("props", help="run the invariant suites")
    pr.add_argument("--cases", type=int, default=50, help="cases per suite (default 50)")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--out")
    return p


def _emit(doc: dict, out: str | None) -> None:
    text = dumps(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(audit: dict) -> dict:
    def every(rows, *keys):
        return all(all(r[k] for k in keys) for r in rows)

    if "T2a" in audit:
        return {"T2a": every(audit["T2a"], "atomless"), "T2b": every(audit["T2b"], "independent"),
                "T2c": audit["T2c"]["satisfied"], "T2d": every(audit["T2d"], "finite")}
    out = {"T3a": every(audit["T3a"], "atomless"), "T3b": every(audit["T3b"], "measurable", "nonempty"),
           "T3c": every(audit["T3c"], "nonempty", "usc"), "T3d": every(audit["T3d"], "nonempty", "usc"),
           "T3e": audit["T3e"]["holds"], "T3f": every(audit["T3f"], "open")}
    if "T4d" in audit:
        out["T4d"] = every(audit["T4d"], "nonempty", "usc", "selector_inclusion")
    return out


def _run(args) -> int:
    if args.command == "props":
        res = props.run(args.cases, args.seed)
        failed = sum(r["failed"] for r in res.values())
        doc = {"command": "props", "cases": args.cases, "seed": args.seed, "suites": res,
               "passed": sum(r["passed"] for r in res.values()), "failed": failed}
        _emit(doc, args.out)
        return EXIT_OK

    inst = load(args.instance)
    cfg = inst.config.override(seed=args.seed, budget=args.budget, refine=args.refine, theorem4=args.theorem4)
    start = time.perf_counter()
    audit_section = None
    if args.command == "solve":
        result = reports.solve(inst, cfg)
    elif args.command == "solve-game":
        result = reports.solve_game(inst, cfg)
    elif args.command == "verify":
        profile = load_profile(args.profile, inst.solved_model(cfg))
        result = reports.verify(inst, cfg, profile)
    elif args.command == "audit":
        audit_section = reports.audit(inst, cfg)
        result = {"summary": _summary(audit_section)}
    elif args.command == "purify":
        result = reports.purify_player(inst, cfg, args.player, args.target)
    else:
        result = reports.refine_study(inst, cfg, args.k_list)
    doc = reports.report(inst, cfg, args.command, result, audit_section)
    if args.timing:
        doc["timing"] = {"seconds": time.perf_counter() - start}
    _emit(doc, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
