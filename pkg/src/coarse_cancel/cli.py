"""``coarse-cancel`` command line.

Exit codes: 0 success, 1 input or runtime error, 2 a certificate or
hypothesis check failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import config
from .action import acylindricity_table, axis, classify, translation_length
from .coneoff import (FamilyMember, FamilyStats, build_coneoff, family_stats, verify_cone_ball,
                      verify_sandwich)
from .errors import CoarseCancelError, HypothesisFailure, InvalidInput
from .geodesy import hull, quasi_convexity_constant
from .grouptheory import bass_serre_ball, group_exponent, has_involution, holomorph, malnormality_check
from .invariants import (InvariantLedger, build_ledger, invariant_e, kappa_for_hyperbolic,
                         nu_bound_from_acylindricity)
from .io import dumps, load_amalgam, load_group, load_space, load_window, read_json
from .metric_core import hyperbolicity_delta, verify_four_point_forms
from .smallcancel import (Constants, certify_small_cancellation, critical_exponent_n0, kappa_mcg_style,
                          log_critical_exponent_n0, propagate_ledger, quotient_iteration_trace)

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


class Outcome:
    def __init__(self, report, code: int = EXIT_OK):
        self.report = report
        self.code = code


def _constants(args) -> Constants:
    if args.constants:
        return Constants.from_json(read_json(args.constants))
    return Constants.default_toy()


def _subset(space, raw: str | None):
    if raw is None:
        return list(space.points)
    path = Path(raw)
    if path.suffix == ".json" and path.exists():
        return [str(p) for p in read_json(path)]
    return [p for p in raw.split(",") if p]


# handlers -------------------------------------------------------------------------


def cmd_delta(args) -> Outcome:
    space = load_space(args.space)
    rep = hyperbolicity_delta(space, workers=args.threads)
    out = {"delta": rep.delta, "witness": list(rep.witness), "points": space.n}
    if args.verify:
        out["four_point_forms"] = verify_four_point_forms(space, rep.delta, workers=args.threads).to_json()
    return Outcome(out)


def cmd_qc(args) -> Outcome:
    space = load_space(args.space)
    Y = _subset(space, args.subset)
    return Outcome({"alpha": quasi_convexity_constant(space, Y, workers=args.threads), "size": len(Y)})


def cmd_hull(args) -> Outcome:
    space = load_space(args.space)
    delta = hyperbolicity_delta(space, workers=args.threads).delta if args.delta is None else args.delta
    H = hull(space, _subset(space, args.subset), delta)
    return Outcome({"delta": delta, "hull": list(H),
                    "alpha": quasi_convexity_constant(space, H, workers=args.threads)})


def cmd_act(args) -> Outcome:
    space, window, _ = load_window(args.window)
    delta = args.delta if args.delta is not None else 0.0
    if args.verb == "classify":
        words = args.word or ["a"]
        return Outcome({"classifications": {w: classify(window, w).to_json() for w in words}})
    if args.verb == "axis":
        words = args.word or ["a"]
        return Outcome({"axes": {w: {"axis": list(axis(window, w, delta)),
                                     "len": translation_length(window, w).to_json()} for w in words},
                        "delta": delta})
    table = acylindricity_table(window, args.l, args.max_length)
    return Outcome({"l": args.l, "table": [[d, n] for d, n in table], "points": space.n})


def cmd_group(args) -> Outcome:
    G = load_group(args.group)
    if args.verb == "hol":
        H = holomorph(G)
        return Outcome({"order": len(G.elements), "holomorph_order": len(H.elements),
                        "holomorph_exponent": group_exponent(H)})
    if args.verb == "exp":
        return Outcome({"order": len(G.elements), "exponent": group_exponent(G), "involution": has_involution(G)})
    if not args.subgroup:
        raise InvalidInput("malnormal needs --subgroup")
    H = [h for h in args.subgroup.split(",") if h]
    return Outcome({"subgroup": H, "malnormal": malnormality_check(G, H)})


def cmd_tree(args) -> Outcome:
    data = load_amalgam(args.amalgam)
    space, window, _ = load_window({"amalgam": data.to_json(), "radius": args.radius, "subdivide": args.subdivide})
    verts, edges = bass_serre_ball(data, args.radius)
    graph = {"vertices": list(space.points),
             "edges": [[space.points[i], space.points[j], w] for i, j, w in space.edges]}
    return Outcome({"radius": args.radius, "vertex_count": len(verts), "edge_count": len(edges), "graph": graph,
                    "generators": list(window.order)})


def cmd_inv(args) -> Outcome:
    if args.verb == "e":
        groups = read_json(args.input) if args.input else []
        if not isinstance(groups, list):
            raise InvalidInput("e expects a JSON list of groups")
        return Outcome({"e": invariant_e([load_group(g) for g in groups] or [load_group({"cyclic": 1})]),
                        "flag": "exact"})
    if args.verb == "kappa":
        if args.orders is not None:
            orders = [int(o) for o in args.orders.split(",") if o]
            return Outcome({"kappa": kappa_for_hyperbolic(orders, args.e), "rule": "hyperbolic"})
        return Outcome({"kappa": kappa_mcg_style(args.e, args.index), "rule": "index"})
    if args.verb == "nu-bound":
        if args.rinj is None:
            raise InvalidInput("nu-bound needs --rinj")
        obj = read_json(args.input)
        if isinstance(obj, dict) and "table" in obj:
            try:
                table = [(float(d), int(n)) for d, n in obj["table"]]
            except (TypeError, ValueError) as exc:
                raise InvalidInput(f"malformed acylindricity table: {exc}") from exc
        else:
            table = acylindricity_table(load_window(obj)[1], args.l)
        return Outcome({"nu": nu_bound_from_acylindricity(table, args.rinj, args.d).to_json(), "flag": "upper"})
    space, window, spec = load_window(args.input)
    groups = [load_group(g) for g in spec.get("finite_normal_subgroups", [])]
    ledger = build_ledger(window, groups or None, word_cap=args.word_cap)
    return Outcome({"ledger": ledger.to_json()})


def _family(obj) -> list[FamilyMember]:
    if isinstance(obj, dict):
        obj = obj.get("family", obj.get("members"))
    if not isinstance(obj, list) or not obj:
        raise InvalidInput("family must be a non-empty list")
    return [FamilyMember.from_json(m) for m in obj]


def cmd_coneoff(args) -> Outcome:
    space = load_space(args.space)
    family = _family(read_json(args.family))
    co = build_coneoff(space, family, args.rho, radial_samples=args.radial, delta=args.delta)
    out = {"coneoff": co.summary(), "stats": family_stats(space, family, delta=args.delta or 0.0).to_json()}
    if args.verb == "build":
        out["base_distances"] = co.base_block()
        return Outcome(out)
    sandwich, ball = verify_sandwich(co), verify_cone_ball(co)
    out.update({"sandwich": sandwich.to_json(), "cone_ball": ball.to_json()})
    return Outcome(out, EXIT_OK if sandwich.ok and ball.ok else EXIT_FAILED)


def cmd_certify(args) -> Outcome:
    consts = _constants(args)
    obj = read_json(args.stats)
    try:
        delta, rho = float(obj["delta"]), float(obj["rho"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"stats file needs delta and rho: {exc}") from exc
    cert = certify_small_cancellation(delta, rho, FamilyStats.from_json(obj), consts)
    return Outcome({"certificate": cert.to_json(), "constants": consts.to_json()},
                   EXIT_OK if cert.overall else EXIT_FAILED)


def cmd_n0(args) -> Outcome:
    consts = _constants(args)
    log_n0, binding = log_critical_exponent_n0(consts, args.nu0)
    out = {"constants": consts.to_json(), "nu0": args.nu0, "log_n0": log_n0, "binding": binding}
    try:
        out["n0"] = critical_exponent_n0(consts, args.nu0)
    except HypothesisFailure as exc:
        out["n0"] = None
        out["note"] = str(exc)
    return Outcome(out)


def _ledger(args) -> InvariantLedger:
    if not args.ledger:
        raise InvalidInput("--ledger is required")
    obj = read_json(args.ledger)
    if not isinstance(obj, dict):
        raise InvalidInput("ledger must be a JSON object")
    return InvariantLedger.from_json(obj.get("ledger", obj))


def cmd_propagate(args) -> Outcome:
    consts = _constants(args)
    ledger = _ledger(args)
    steps = [ledger]
    try:
        for _ in range(args.steps):
            steps.append(propagate_ledger(steps[-1], consts, args.n, args.n1, args.nu0))
    except HypothesisFailure as exc:
        return Outcome({"constants": consts.to_json(), "ledgers": steps, "failure": str(exc)}, EXIT_FAILED)
    return Outcome({"constants": consts.to_json(), "ledgers": steps, "failure": None})


def cmd_trace(args) -> Outcome:
    consts = _constants(args)
    trace = quotient_iteration_trace(_ledger(args), args.n, args.steps, consts, args.n1, args.nu0, args.l0)
    return Outcome({"constants": consts.to_json(), "trace": trace.to_json()},
                   EXIT_OK if trace.failure is None else EXIT_FAILED)


def cmd_corpus(args) -> Outcome:
    from .corpus import run_manifest

    report = run_manifest(args.manifest, update=args.update)
    return Outcome(report, EXIT_OK if report["failed"] == 0 else EXIT_FAILED)


# parser ------------------------------------------------------------------------------


def _common_options(suppress: bool) -> argparse.ArgumentParser:
    # subcommands must not overwrite values given before the subcommand name
    def default(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=default(None), help="worker threads (default 1)")
    common.add_argument("--tolerance", type=float, default=default(None), help="comparison tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=default(0), help="seed for sampled verifications")
    common.add_argument("--constants", default=default(None), help="constants JSON (mode toy or canonical)")
    common.add_argument("--output", default=default(None), help="write the JSON report here instead of stdout")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options(suppress=True)
    p = argparse.ArgumentParser(prog="coarse-cancel", parents=[_common_options(suppress=False)],
                                description="Hyperbolicity, group actions and small cancellation certificates.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, parents=[common], **kw)
        sp.set_defaults(func=fn)
        return sp

    sp = add("delta", cmd_delta, help="four-point hyperbolicity constant of a space")
    sp.add_argument("space")
    sp.add_argument("--verify", action="store_true", help="also cross-check both four-point forms")

    sp = add("qc", cmd_qc, help="quasi-convexity constant of a subset")
    sp.add_argument("space")
    sp.add_argument("--subset", help="comma separated ids or a JSON list file (default: all points)")

    sp = add("hull", cmd_hull, help="discrete hull of a subset")
    sp.add_argument("space")
    sp.add_argument("--subset")
    sp.add_argument("--delta", type=float)

    sp = add("act", cmd_act, help="classify, axis or acylindricity table on an action window")
    sp.add_argument("verb", choices=["classify", "acyl", "axis"])
    sp.add_argument("window")
    sp.add_argument("--word", action="append")
    sp.add_argument("--delta", type=float)
    sp.add_argument("--l", type=float, default=0.0)
    sp.add_argument("--max-length", type=int, default=None)

    sp = add("group", cmd_group, help="holomorph exponent, exponent or malnormality")
    sp.add_argument("verb", choices=["hol", "exp", "malnormal"])
    sp.add_argument("group")
    sp.add_argument("--subgroup")

    sp = add("tree", cmd_tree, help="ball of the Bass-Serre tree of an amalgam")
    sp.add_argument("verb", choices=["build"])
    sp.add_argument("amalgam")
    sp.add_argument("--radius", type=int, default=3)
    sp.add_argument("--subdivide", type=int, default=1)

    sp = add("inv", cmd_inv, help="invariant ledger, e, nu bound or kappa")
    sp.add_argument("verb", choices=["ledger", "e", "nu-bound", "kappa"])
    sp.add_argument("input", nargs="?")
    sp.add_argument("--word-cap", type=int, default=2)
    sp.add_argument("--rinj", type=float)
    sp.add_argument("--l", type=float, default=0.0, help="closeness for the acylindricity table (nu-bound)")
    sp.add_argument("--d", type=float)
    sp.add_argument("--e", type=int, default=1)
    sp.add_argument("--index", type=int, default=1)
    sp.add_argument("--orders")

    sp = add("coneoff", cmd_coneoff, help="build or verify a cone-off")
    sp.add_argument("verb", choices=["build", "verify"])
    sp.add_argument("space")
    sp.add_argument("family")
    sp.add_argument("--rho", type=float, default=1.0)
    sp.add_argument("--radial", type=int, default=4)
    sp.add_argument("--delta", type=float)

    sp = add("certify", cmd_certify, help="small cancellation hypotheses for family statistics")
    sp.add_argument("stats")

    sp = add("n0", cmd_n0, help="critical exponent")
    sp.add_argument("--nu0", type=int, default=1)

    for name, fn in (("propagate", cmd_propagate), ("trace", cmd_trace)):
        sp = add(name, fn, help="ledger propagation through quotient steps")
        sp.add_argument("--ledger")
        sp.add_argument("--steps", type=int, default=1)
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--n1", type=int)
        sp.add_argument("--nu0", type=int)
        if name == "trace":
            sp.add_argument("--l0", type=float)

    sp = add("corpus", cmd_corpus, help="run a manifest and diff against golden outputs")
    sp.add_argument("manifest")
    sp.add_argument("--update", action="store_true", help="rewrite golden files instead of comparing")
    return p


def _run(argv: Sequence[str]):
    args = build_parser().parse_args(list(argv))
    return args, _execute(args)


def _execute(args) -> tuple[int, str]:
    if args.threads is not None and args.threads < 1:
        return EXIT_ERROR, dumps({"error": "threads must be >= 1"})
    if args.tolerance is not None and not args.tolerance > 0:
        return EXIT_ERROR, dumps({"error": "tolerance must be positive"})
    try:
        with config.override(tolerance=args.tolerance, threads=args.threads):
            outcome = args.func(args)
    except CoarseCancelError as exc:
        code = EXIT_FAILED if isinstance(exc, HypothesisFailure) else EXIT_ERROR
        return code, dumps({"error": str(exc), "kind": type(exc).__name__})
    except OverflowError as exc:
        return EXIT_ERROR, dumps({"error": f"overflow: {exc}", "kind": "OverflowError"})
    return outcome.code, dumps(outcome.report)


def dispatch(argv: Sequence[str]) -> tuple[int, str]:
    """Run one command; returns the exit code and the JSON text."""
    return _run(argv)[1]


def main(argv: Sequence[str] | None = None) -> int:
    args, (code, text) = _run(sys.argv[1:] if argv is None else argv)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
