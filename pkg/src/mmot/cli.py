"""Command-line interface.

Exit codes: 0 success, 1 input error (bad flags, unreadable or invalid
instance), 2 solver or internal error.  Numbers are printed with six
significant digits unless ``--full-precision`` is given; coupling weights are
always written at full precision.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from typing import Sequence

from . import fixtures
from .barycenter import extract_barycenter
from .cost import Convention, build_tensor
from .errors import InputError, MMOTError, SolverError
from .io import barycenter_to_dict, coupling_to_list, load_instance
from .measures import Instance
from .monge import enumerate_mmc, two_point_monge
from .search import (
    MONGE,
    NON_MONGE,
    ClassifyTolerances,
    GeneratorConfig,
    IsotropicGaussian,
    UniformCube,
    export_histogram,
    run_search,
)
from .simplex import Mode, solve_lp, verify_certificate


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class _Fmt:
    def __init__(self, full: bool):
        self.full = full

    def __call__(self, x):
        if x is None:
            return None
        x = float(x)
        if self.full or x != x or x in (float("inf"), float("-inf")):
            return x
        return float(f"{x:.6g}")


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _assignment_dict(assignment) -> dict:
    return {
        "sigmas": [[v + 1 for v in s] for s in assignment.sigmas],
        "tuples": [[a + 1 for a in t] for t in assignment.tuples()],
    }


def solve_report(
    instance: Instance,
    *,
    exact: bool = False,
    convention: str = "pairwise",
    ordered_pairs: bool = False,
    with_barycenter: bool = False,
    full_precision: bool = False,
    tolerances: ClassifyTolerances = ClassifyTolerances(),
) -> dict:
    fmt = _Fmt(full_precision)
    mode = Mode.EXACT if exact else Mode.FLOAT
    tensor = build_tensor(instance, convention, exact=exact, ordered_pairs=ordered_pairs)
    lp = solve_lp(instance, tensor, mode)
    monge = enumerate_mmc(instance, tensor)
    gap = monge.mmc - lp.value
    non_monge = gap > 0 if exact else gap > tolerances.threshold(lp.value)
    cert = verify_certificate(tensor, lp.coupling, lp.certificate, lp.value, tol=0 if exact else 1e-9)
    rel = 0.0 if lp.value == 0 and gap == 0 else (float(100 * gap / lp.value) if lp.value != 0 else float("inf"))
    report = {
        "N": instance.N,
        "m": instance.m,
        "d": instance.d,
        "mode": mode.value,
        "convention": Convention(convention).value,
        "lp_value": fmt(lp.value),
        "mmc": fmt(monge.mmc),
        "relative_gap_percent": fmt(rel),
        "classification": NON_MONGE if non_monge else MONGE,
        "optimal_coupling": coupling_to_list(lp.coupling),
        "best_assignment": _assignment_dict(monge.best),
        "monge_maps_enumerated": monge.enumerated,
        "certificate_status": "verified" if cert.ok else "failed",
        "iterations": lp.iterations,
    }
    if exact:
        report["lp_value_exact"] = str(lp.value)
        report["mmc_exact"] = str(monge.mmc)
        report["gap_exact"] = str(gap)
    if with_barycenter:
        if Convention(convention) is not Convention.PAIRWISE or ordered_pairs:
            raise InputError("--with-barycenter needs the default pairwise convention")
        bary = extract_barycenter(instance, lp.coupling)
        report["barycenter"] = _barycenter_payload(bary, lp.value, instance.N, fmt)
    return report


def _barycenter_payload(bary, lp_value, N, fmt) -> dict:
    out = barycenter_to_dict(bary)
    out["functional_value"] = fmt(out["functional_value"])
    out["lp_value_over_N"] = fmt(lp_value / N if not isinstance(lp_value, Fraction) else float(lp_value / N))
    return out


def verify_counterexample(instance: Instance | None = None) -> list[tuple[str, bool, str]]:
    """Re-derive the published counterexample; one ``(name, ok, detail)`` per check."""
    inst = fixtures.counterexample() if instance is None else instance
    checks = []
    tensor = build_tensor(inst)
    lp = solve_lp(inst, tensor)
    checks.append(("lp_value", abs(lp.value - fixtures.COUNTEREXAMPLE_LP_VALUE) <= 1e-3, f"{lp.value:.6f} vs {fixtures.COUNTEREXAMPLE_LP_VALUE} +- 0.001"))
    support = tuple(tuple(a + 1 for a in t) for t in lp.coupling.support())
    weights_ok = all(abs(w - 1 / 6) <= 1e-12 for w in lp.coupling.entries.values())
    checks.append(
        ("optimal_support", support == fixtures.COUNTEREXAMPLE_OPTIMAL_SUPPORT and weights_ok, f"{list(support)} at weights 1/6: {weights_ok}")
    )
    monge = enumerate_mmc(inst, tensor)
    checks.append(("mmc", abs(monge.mmc - fixtures.COUNTEREXAMPLE_MMC) <= 1e-3, f"{monge.mmc:.6f} vs {fixtures.COUNTEREXAMPLE_MMC} +- 0.001"))
    msupport = tuple(tuple(a + 1 for a in t) for t in monge.best.tuples())
    checks.append(("monge_support", msupport == fixtures.COUNTEREXAMPLE_MONGE_SUPPORT, f"{list(msupport)}"))
    checks.append(("monge_maps_enumerated", monge.enumerated == 36, f"{monge.enumerated}"))
    exact_tensor = build_tensor(inst, exact=True)
    elp = solve_lp(inst, exact_tensor, Mode.EXACT)
    emmc = enumerate_mmc(inst, exact_tensor).mmc
    gap = emmc - elp.value
    checks.append(("strict gap certified", gap > 0, f"mmc - lp = {gap} ~ {float(gap):.3e}"))
    cert = verify_certificate(exact_tensor, elp.coupling, elp.certificate, elp.value, tol=0)
    n_tuples = exact_tensor.values.size
    checks.append(
        (
            "exact dual certificate",
            cert.ok,
            f"feasible at all {n_tuples} tuples: {cert.feasible}; complementary slackness: {cert.complementary}; gap {cert.duality_gap}",
        )
    )
    return checks


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    report = solve_report(
        inst,
        exact=args.exact,
        convention=args.convention,
        ordered_pairs=args.ordered_pairs,
        with_barycenter=args.with_barycenter,
        full_precision=args.full_precision,
        tolerances=ClassifyTolerances(args.tol, args.rel_tol),
    )
    _emit(report, args.out)
    return 0


def cmd_monge(args) -> int:
    fmt = _Fmt(args.full_precision)
    inst = load_instance(args.instance)
    tensor = build_tensor(inst, exact=args.exact)
    rep = enumerate_mmc(inst, tensor)
    payload = {"mmc": fmt(rep.mmc), "best_assignment": _assignment_dict(rep.best), "enumerated": rep.enumerated}
    if args.exact:
        payload["mmc_exact"] = str(rep.mmc)
    _emit(payload, args.out)
    return 0


def cmd_barycenter(args) -> int:
    fmt = _Fmt(args.full_precision)
    inst = load_instance(args.instance)
    mode = Mode.EXACT if args.exact else Mode.FLOAT
    lp = solve_lp(inst, mode=mode)
    bary = extract_barycenter(inst, lp.coupling)
    payload = _barycenter_payload(bary, lp.value, inst.N, fmt)
    payload["lp_value"] = fmt(lp.value)
    payload["atom_count"] = bary.size
    payload["support_bound"] = inst.N * (inst.m - 1) + 1
    _emit(payload, args.out)
    return 0


def cmd_two_point(args) -> int:
    fmt = _Fmt(args.full_precision)
    inst = load_instance(args.instance)
    res = two_point_monge(inst)
    lp = solve_lp(inst)
    bary = extract_barycenter(inst, res.assignment.coupling())
    payload = {
        "value": fmt(res.value),
        "lp_value": fmt(lp.value),
        "choice": [a + 1 for a in res.choice],
        "assignment": _assignment_dict(res.assignment),
        "barycenter": _barycenter_payload(bary, lp.value, inst.N, fmt),
    }
    _emit(payload, args.out)
    return 0


def cmd_verify(args) -> int:
    start = time.perf_counter()
    inst = load_instance(args.instance) if args.instance else None
    checks = verify_counterexample(inst)
    for name, ok, detail in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    print(f"elapsed {time.perf_counter() - start:.3f} s")
    return 0 if all(ok for _, ok, _ in checks) else 1


def cmd_search(args) -> int:
    if args.trials < 1:
        raise InputError("--trials must be >= 1")
    if args.dist == "gaussian":
        dist = IsotropicGaussian(args.sigma)
    else:
        dist = UniformCube(args.halfwidth)
    config = GeneratorConfig(args.N, args.m, args.d, dist, args.seed)
    result = run_search(
        config,
        args.trials,
        ClassifyTolerances(args.tol, args.rel_tol),
        exact_audit=args.exact_audit,
        workers=args.workers,
        log_path=args.log_out,
    )
    for path in args.hist_out or []:
        export_histogram(result.summary, path)
    text = result.summary.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mmot", description="Multi-marginal optimal transport for uniform empirical measures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, exact=True):
        sp.add_argument("instance", help="instance JSON file")
        sp.add_argument("--out", help="write JSON here instead of stdout")
        sp.add_argument("--full-precision", action="store_true", help="print shortest round-trip floats")
        if exact:
            sp.add_argument("--exact", action="store_true", help="rational arithmetic end to end")

    sp = sub.add_parser("solve", help="solve the LP, enumerate Monge maps, classify")
    common(sp)
    sp.add_argument("--convention", choices=[c.value for c in Convention], default="pairwise")
    sp.add_argument("--ordered-pairs", action="store_true", help="count every pair twice in the pairwise cost")
    sp.add_argument("--with-barycenter", action="store_true")
    sp.add_argument("--tol", type=float, default=1e-7, help="absolute classification threshold")
    sp.add_argument("--rel-tol", type=float, default=1e-9, help="relative classification threshold")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("monge", help="minimal Monge cost by enumeration")
    common(sp)
    sp.set_defaults(func=cmd_monge)

    sp = sub.add_parser("barycenter", help="barycenter from an optimal coupling")
    common(sp)
    sp.set_defaults(func=cmd_barycenter)

    sp = sub.add_parser("two-point", help="constructive Monge solution for two-atom marginals")
    common(sp, exact=False)
    sp.set_defaults(func=cmd_two_point)

    sp = sub.add_parser("verify-paper-example", help="re-derive the built-in three-marginal counterexample")
    sp.add_argument("--instance", help="check this instance file against the published values instead")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("search", help="random search for instances without a Monge solution")
    sp.add_argument("--trials", type=int, default=50_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--N", type=_positive_int, default=3)
    sp.add_argument("--m", type=_positive_int, default=3)
    sp.add_argument("--d", type=_positive_int, default=2)
    sp.add_argument("--dist", choices=["gaussian", "uniform"], default="gaussian")
    sp.add_argument("--sigma", type=_positive_float, default=3.0)
    sp.add_argument("--halfwidth", type=_positive_float, default=5.0)
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.add_argument("--rel-tol", type=float, default=1e-9)
    sp.add_argument("--exact-audit", action=argparse.BooleanOptionalAction, default=True)
    sp.add_argument("--workers", type=_positive_int, default=None, help="worker processes (capped by MMOT_THREADS)")
    sp.add_argument("--hist-out", action="append", help="histogram file (.csv or .svg); repeatable")
    sp.add_argument("--log-out", help="failure log (JSON lines)")
    sp.add_argument("--out", help="write the summary here instead of stdout")
    sp.set_defaults(func=cmd_search)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError, ValueError) as exc:
        print(f"mmot: error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, MMOTError) as exc:
        print(f"mmot: solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
