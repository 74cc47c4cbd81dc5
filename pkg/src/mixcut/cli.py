"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 resource guard tripped,
4 reference-table mismatch (coverage --check-paper only).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import bench, blp, families, hull
from .core import (
    ValidationError,
    cut_from_json,
    cut_to_json,
    instance_from_json,
    rat,
    rat_str,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_PAPER_MISMATCH = 4


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _budget(args) -> float | None:
    env = os.environ.get("MIXCUT_BUDGET")
    if env:
        return float(env)
    return args.budget


def cmd_hull(args) -> int:
    inst = instance_from_json(_read(args.instance))
    try:
        fs = hull.enumerate_facets(inst, budget_seconds=_budget(args))
    except hull.BudgetExceeded as exc:
        print(f"incomplete: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    _write_or_print(hull.facetset_to_json(fs), args.out)
    return EXIT_OK


def cmd_coverage(args) -> int:
    family_names = bench.DEFAULT_FAMILIES
    if args.families:
        family_names = tuple(name.strip() for name in args.families.split(","))
    report = bench.benchmark_coverage(
        args.example, args.m, args.p, family_names, budget_seconds=_budget(args)
    )
    if report.incomplete:
        print("incomplete: hull budget exhausted", file=sys.stderr)
        return EXIT_BUDGET
    fmt = {"md": "markdown"}.get(args.format, args.format)
    _write_or_print(bench.emit_report([report], fmt), args.out)
    if args.check_paper:
        problems = bench.check_against_paper(report)
        for line in problems:
            print(f"reference mismatch: {line}", file=sys.stderr)
        if problems:
            return EXIT_PAPER_MISMATCH
    return EXIT_OK


def _params_from_payload(payload: dict, family: str):
    if family in ("star", "strengthened_star"):
        return families.StarParams(tuple(payload["t_set"]))
    if family in ("lifted", "kucukyavuz", "zhao"):
        return families.LiftedParams(
            r=int(payload["r"]),
            t_set=tuple(payload["t_set"]),
            q_list=tuple(payload.get("q_list", ())),
            s_list=tuple(payload["s_list"]) if payload.get("s_list") else None,
        )
    if family == "blp_uniform":
        return families.BlpUniformParams(
            r=int(payload["r"]),
            t_set=tuple(payload["t_set"]),
            q_list=tuple(payload["q_list"]),
            delta=tuple(rat(d) for d in payload["delta"]),
        )
    if family == "blp_generic":
        a_sets = payload.get("A_sets")
        beta = payload.get("beta")
        return families.BlpGenericParams(
            r=int(payload["r"]),
            t_set=tuple(payload["t_set"]),
            delta=tuple(rat(d) for d in payload["delta"]),
            q_list=tuple(payload.get("q_list", ())),
            phi=tuple(rat(v) for v in payload.get("phi", ())),
            a_sets=tuple(frozenset(a) for a in a_sets) if a_sets is not None else None,
            beta=tuple(rat(b) for b in beta) if beta is not None else None,
        )
    raise ValidationError(f"unknown family {family!r}")


GENERATORS = {
    "star": families.gen_star,
    "strengthened_star": families.gen_strengthened_star,
    "lifted": families.gen_luedtke_lifted,
    "kucukyavuz": families.gen_kucukyavuz,
    "zhao": families.gen_zhao,
    "blp_uniform": families.gen_blp_uniform,
}


def cmd_generate(args) -> int:
    payload = json.loads(_read(args.params))
    inst = instance_from_json(json.dumps(payload["instance"]))
    params = _params_from_payload(payload, args.family)
    if args.family == "blp_generic":
        result = families.gen_blp_generic(inst, params)
        if not result.accepted:
            print(
                json.dumps({"accepted": False, "infeasible_j": result.infeasible_j})
            )
            return EXIT_VALIDATION
        cert = result.certificate
        document = {
            "accepted": True,
            "cut": json.loads(cut_to_json(result.cut)),
            "certificate": {
                "family": "blp_generic",
                "params": {
                    "r": cert.r,
                    "t_set": list(cert.t_set),
                    "delta": [rat_str(d) for d in cert.delta],
                    "q_list": list(cert.q_list),
                    "phi": [rat_str(v) for v in cert.phi],
                },
                "A_sets": [sorted(a) for a in cert.a_sets],
                "beta": [rat_str(b) for b in cert.beta],
            },
        }
        _write_or_print(json.dumps(document), args.out)
        return EXIT_OK
    cut = GENERATORS[args.family](inst, params)
    _write_or_print(cut_to_json(cut), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    inst = instance_from_json(_read(args.instance))
    cut = cut_from_json(_read(args.cut))
    from .core import canonicalize, cut_is_valid

    cut = canonicalize(cut)
    valid = cut_is_valid(inst, cut)
    result = {"valid": valid}
    if args.facet:
        result["facet"] = hull.is_facet(inst, cut) if valid else False
    print(json.dumps(result))
    return EXIT_OK


def cmd_blp_aggregate(args) -> int:
    S = blp.bilinear_set_from_json(_read(args.set))
    assignment = blp.assignment_from_json(_read(args.assignment))
    expr = blp.aggregate(S, assignment)
    result = blp.substitute(S, expr)
    document = {
        "coefs": [rat_str(c) for c in result.coefs],
        "rhs": rat_str(result.rhs),
        "audit": {
            "zeroed": result.zeroed,
            "required": result.required,
            "satisfied": result.c1_satisfied,
        },
        "t_sets_disjoint": result.t_sets_disjoint,
    }
    if S.z_slot is not None:
        document["cut"] = json.loads(cut_to_json(result.mixing_cut()))
    _write_or_print(json.dumps(document), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixcut",
        description="Exact cutting-plane toolkit for mixing sets with a knapsack constraint",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_hull = sub.add_parser("hull", help="enumerate the exact facet list of an instance")
    p_hull.add_argument("--instance", required=True)
    p_hull.add_argument("--out")
    p_hull.add_argument("--budget", type=float, default=3600.0)
    p_hull.set_defaults(func=cmd_hull)

    p_cov = sub.add_parser("coverage", help="facet coverage of the inequality families")
    p_cov.add_argument("--example", required=True, choices=["L", "K", "l", "k"])
    p_cov.add_argument("--m", type=int, required=True)
    p_cov.add_argument("--p", type=int, required=True)
    p_cov.add_argument("--families", help="comma-separated family names")
    p_cov.add_argument("--format", default="markdown", choices=["csv", "md", "markdown", "json"])
    p_cov.add_argument("--budget", type=float, default=3600.0)
    p_cov.add_argument("--check-paper", action="store_true",
                       help="compare against the embedded reference table (exit 4 on mismatch)")
    p_cov.add_argument("--out")
    p_cov.set_defaults(func=cmd_coverage)

    p_gen = sub.add_parser("generate", help="emit a family cut from a parameter file")
    p_gen.add_argument("--family", required=True, choices=sorted(families.FAMILIES))
    p_gen.add_argument("--params", required=True)
    p_gen.add_argument("--out")
    p_gen.set_defaults(func=cmd_generate)

    p_check = sub.add_parser("check", help="validity (and optionally facet) test for a cut")
    p_check.add_argument("--instance", required=True)
    p_check.add_argument("--cut", required=True)
    p_check.add_argument("--facet", action="store_true")
    p_check.set_defaults(func=cmd_check)

    p_blp = sub.add_parser("blp-aggregate", help="aggregate and substitute a weighted selection")
    p_blp.add_argument("--set", required=True)
    p_blp.add_argument("--assignment", required=True)
    p_blp.add_argument("--out")
    p_blp.set_defaults(func=cmd_blp_aggregate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except hull.BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
