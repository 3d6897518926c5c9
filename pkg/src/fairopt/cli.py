"""Command-line front end.

Subcommands: eval (measure values for an outcome vector), solve (direct
reformulation or generation loop on an instance file), compare (one
instance under several measures), equiv (dual-set equivalence check with
a witness vector when available), stability (the measure-swap
experiment), gen (seeded random instance files).

Exit codes: 0 success, 1 parse/config error, 2 infeasible, 3
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import dualsets, measures, models, reform, solver, stability
from .measures import MeasureKind

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_NONCONVERGENCE = 3


class CliError(ValueError):
    pass


def _parse_u(text: str) -> np.ndarray:
    try:
        vals = [float(v) for v in text.replace("(", "").replace(")", "").split(",") if v.strip()]
    except ValueError as exc:
        raise CliError(f"cannot parse outcome vector {text!r}") from exc
    if len(vals) < 2:
        raise CliError("outcome vector needs at least 2 entries")
    return np.array(vals)


def _measure_or_die(spec: str) -> MeasureKind:
    try:
        return MeasureKind.parse(spec)
    except Exception as exc:
        raise CliError(f"bad measure spec {spec!r}: {exc}") from exc


def _dual_eval(kind: MeasureKind, u: np.ndarray) -> float:
    if kind.name == "envy":
        base = dualsets.dual_set_of(measures.GINI_DEVIATION, len(u))
        val, _ = dualsets.support_value(base, u)
        return kind.c / 2.0 * val
    ds = dualsets.dual_set_of(kind, len(u))
    val, _ = dualsets.support_value(ds, u)
    return val


def _write_json(payload: dict, path: str | None):
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_eval(args) -> int:
    if args.u:
        u = _parse_u(args.u)
    elif args.instance:
        inst = models.load_instance(args.instance)
        if not isinstance(inst, models.AllocationInstance):
            raise CliError("eval --instance expects an allocation instance; pass --u otherwise")
        u = inst.a * 0.0  # outcomes of the zero allocation are all zero
    else:
        raise CliError("eval needs --u or --instance")
    kinds = [_measure_or_die(s) for s in args.measure] if args.measure else list(measures.TABLE_KINDS)
    rows = []
    nonneg = bool(np.all(u >= 0))
    print(f"u = {[float(v) for v in u]}")
    print(f"{'measure':<34}{'absolute':>14}{'relative':>12}{'dual_set':>14}  agree")
    for kind in kinds:
        absolute = float(measures.eval_closed_form(kind, u))
        rel = float(measures.eval_relative(kind, u)) if nonneg else None
        dual = _dual_eval(kind, u)
        agree = abs(dual - absolute) <= 1e-8 * (1.0 + abs(absolute))
        rel_txt = f"{rel:.6g}" if rel is not None else "n/a"
        print(f"{kind.name:<34}{absolute:>14.6g}{rel_txt:>12}{dual:>14.6g}  {'yes' if agree else 'NO'}")
        rows.append({"measure": kind.to_json(), "absolute": absolute,
                     "relative": rel, "dual_set": dual, "agree": bool(agree)})
    if args.out:
        _write_json({"schema": 1, "u": [float(v) for v in u], "values": rows}, args.out)
    return EXIT_OK


def _instance_problem(args):
    inst = models.load_instance(args.instance)
    if args.measure:
        inst.measure = _measure_or_die(args.measure[0])
    if args.gamma is not None:
        inst.gamma = args.gamma
    if isinstance(inst, models.AllocationInstance):
        if args.mode:
            inst.mode = {"objective": reform.OBJECTIVE, "constraint": reform.CONSTRAINT,
                         "relative": reform.RELATIVE}[args.mode]
        if args.eta is not None:
            inst.eta = args.eta
    return inst, models.build_instance(inst)


def _solve_dispatch(p, eps, limits):
    """Singleton dual sets go through the direct reformulation."""
    kind = p.measure
    ds = dualsets.dual_set_of(kind, p.n_subjects)
    if ds.variant == "singleton":
        w = np.asarray(ds.w)
        if p.mode == reform.OBJECTIVE:
            model = reform.reformulate_order_based_objective(p, w)
        elif p.mode == reform.CONSTRAINT:
            model = reform.reformulate_order_based_constraint(p, w)
        else:
            wmax = measures.measure_wmax(kind, p.n_subjects)
            model = reform.reformulate_relative_constraint(p, w, float(wmax))
        st = solver.solve(model, limits)
        report = solver.CcgReport(status=st.status)
        if st.status == solver.OPTIMAL:
            x = st.x[model.group_indices("x")]
            u = st.x[model.group_indices("u")]
            report.x, report.u = x, u
            report.gap = 0.0
            report.measure_value = float(measures.eval_closed_form(kind, u))
            report.objective = (st.objective if p.mode == reform.OBJECTIVE
                                else reform.efficiency_value(p, x, u))
        return report, "direct"
    if p.mode == reform.OBJECTIVE:
        return solver.ccg_objective(p, ds, eps, limits=limits), "ccg"
    return solver.ccg_constraint(p, ds, limits=limits), "ccg"


def cmd_solve(args) -> int:
    inst, p = _instance_problem(args)
    limits = solver.SolveLimits(time=args.time_limit)
    try:
        report, method = _solve_dispatch(p, args.eps, limits)
    except solver.NonConvergence:
        return EXIT_NONCONVERGENCE
    payload = report.to_json()
    payload["method"] = method
    payload["measure"] = p.measure.to_json()
    payload["mode"] = p.mode
    _write_json(payload, args.out)
    if args.out and report.iterations:
        report.write_csv(args.out + ".csv")
    if report.status == solver.INFEASIBLE:
        return EXIT_INFEASIBLE
    if report.status != solver.OPTIMAL:
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_compare(args) -> int:
    inst, _ = _instance_problem(args)
    kinds = [_measure_or_die(s) for s in args.measure]
    if not kinds:
        raise CliError("compare needs at least one --measure")
    limits = solver.SolveLimits(time=args.time_limit)
    rows = []
    print(f"{'measure':<34}{'objective':>14}{'fairness':>14}")
    for kind in kinds:
        inst.measure = kind
        p = models.build_instance(inst)
        try:
            report, _ = _solve_dispatch(p, args.eps, limits)
        except solver.NonConvergence:
            return EXIT_NONCONVERGENCE
        if report.status != solver.OPTIMAL:
            return EXIT_INFEASIBLE if report.status == solver.INFEASIBLE else EXIT_NONCONVERGENCE
        fair = float(measures.eval_closed_form(kind, report.u))
        print(f"{kind.name:<34}{report.objective:>14.6g}{fair:>14.6g}")
        rows.append({"measure": kind.to_json(), "objective": report.objective,
                     "fairness": fair, "x": [float(v) for v in report.x],
                     "u": [float(v) for v in report.u]})
    if args.out:
        _write_json({"schema": 1, "results": rows}, args.out)
    return EXIT_OK


def cmd_equiv(args) -> int:
    k1 = _measure_or_die(args.kind1)
    k2 = _measure_or_die(args.kind2)
    n = args.n
    ds1 = dualsets.dual_set_of(k1, n)
    ds2 = dualsets.dual_set_of(k2, n)
    beta = dualsets.check_equivalent(ds1, ds2)
    if beta is not None:
        print(f"EQUIVALENT beta={beta:.12g}")
        return EXIT_OK
    print("NOT EQUIVALENT")
    witness = measures.distinguishing_pair(k1, k2, n)
    if witness is not None:
        u1, u2 = witness
        v1 = (float(measures.eval_closed_form(k1, u1)), float(measures.eval_closed_form(k1, u2)))
        v2 = (float(measures.eval_closed_form(k2, u1)), float(measures.eval_closed_form(k2, u2)))
        print(f"witness u1 = {[float(v) for v in u1]}")
        print(f"witness u2 = {[float(v) for v in u2]}")
        print(f"{k1.name}: {v1[0]:.6g} vs {v1[1]:.6g}")
        print(f"{k2.name}: {v2[0]:.6g} vs {v2[1]:.6g}")
    return EXIT_OK


def cmd_stability(args) -> int:
    base = _measure_or_die(args.base)
    comps = tuple(_measure_or_die(s) for s in args.comparisons)
    gammas = tuple(args.gammas) if args.gammas else tuple(np.round(np.arange(0.0, 2.0001, 0.02), 6))
    cfg = stability.StabilityConfig(
        n_values=tuple(args.n_list), gammas=gammas, t=args.t,
        base=base, comparisons=comps, seed=args.seed)
    reports = stability.run_stability_experiment(cfg)
    if args.out:
        stability.write_stability_csv(reports, args.out)
    for rep in reports:
        print(f"N={rep.n} {rep.base} vs {rep.comparison}: d_H={rep.d_h:.6g}, "
              f"max val_diff={max(c.val_diff for c in rep.cells):.6g}, "
              f"bound holds: {all(c.bound_ok for c in rep.cells)}")
    return EXIT_OK


def cmd_gen(args) -> int:
    measure = _measure_or_die(args.measure[0]) if args.measure else measures.GINI_DEVIATION
    gamma = args.gamma if args.gamma is not None else 0.5
    if args.ra:
        inst = models.random_ra(args.n, gamma, measure, args.seed,
                                R=args.budget, K=args.cap)
    elif args.flp:
        p = args.p if args.p is not None else max(1, args.n // 3)
        inst = models.random_flp(args.n, p, gamma, measure, args.seed)
    else:
        raise CliError("gen needs --ra or --flp")
    if args.out:
        models.dump_instance(inst, args.out)
    else:
        sys.stdout.write(json.dumps(inst.to_json(), sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairopt",
                                     description="convex fairness measures in optimization")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--instance", help="instance JSON path")
        sp.add_argument("--measure", action="append", default=None,
                        help="measure spec, e.g. gini_deviation or order_based:[-1,0,1]")
        sp.add_argument("--gamma", type=float, default=None)
        sp.add_argument("--eta", type=float, default=None)
        sp.add_argument("--eps", type=float, default=1e-4)
        sp.add_argument("--mode", choices=["objective", "constraint", "relative"], default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--time-limit", type=float, default=None)

    sp = sub.add_parser("eval", help="evaluate measures on an outcome vector")
    common(sp)
    sp.add_argument("--u", help="comma-separated outcomes, e.g. 1,2,2.5,2.5,4.5")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("solve", help="solve an instance")
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("compare", help="solve one instance under several measures")
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("equiv", help="check whether two measures are equivalent")
    sp.add_argument("kind1")
    sp.add_argument("kind2")
    sp.add_argument("n", type=int)
    sp.set_defaults(func=cmd_equiv)

    sp = sub.add_parser("stability", help="measure-swap stability experiment")
    sp.add_argument("--n-list", type=int, nargs="+", default=[5, 8, 12])
    sp.add_argument("--gammas", type=float, nargs="+", default=None)
    sp.add_argument("--t", type=int, default=20)
    sp.add_argument("--base", default="max_mad")
    sp.add_argument("--comparisons", nargs="+",
                    default=["mad", "gini_deviation", "sum_max_pairwise_deviation"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("gen", help="write a random instance file")
    common(sp)
    sp.add_argument("--ra", action="store_true")
    sp.add_argument("--flp", action="store_true")
    sp.add_argument("--n", type=int, default=6)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--budget", type=float, default=100.0)
    sp.add_argument("--cap", type=float, default=None)
    sp.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (CliError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except solver.NonConvergence:
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
