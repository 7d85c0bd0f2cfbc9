"""Command-line entry point: ``iotdefense {optimize,exhaustive,evaluate,compare,benchmark}``.

Exit codes: 0 ok, 2 usage or input error, 3 resource limit exceeded.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from iotdefense import kernels
from iotdefense.harm import attack_paths, write_path_dump
from iotdefense.metrics import Evaluator, total_cost, write_metric_csv
from iotdefense.network import (
    DeploymentVector,
    IoTNetwork,
    NetworkSpec,
    SpecError,
    build_network,
    check_deployment,
    decoy_types,
    patch_types,
)
from iotdefense.optimizer import (
    DEFAULT_SPACE_LIMIT,
    DeploymentProblem,
    GAParams,
    ParetoFront,
    SpaceLimitError,
    exhaustive_search,
    nsga2,
)
from iotdefense.scenarios import (
    DEFAULT_BETAS,
    PACS_COMPARISON,
    PACS_DEPLOYMENTS,
    SCALED_IOT_GRID,
    SPECIAL_DEPLOYMENTS,
    benchmark,
    benchmark_csv,
    budget_filter,
    comparison_csv,
    comparison_report,
    format_comparison,
    min_rcf,
    percent,
    scalarize_sweep,
    scenario,
)

log = logging.getLogger("iotdefense")

EXIT_OK, EXIT_INPUT, EXIT_LIMIT = 0, 2, 3


class InputError(Exception):
    """Bad flags or input files; reported with exit code 2."""


# --- argument parsing -----------------------------------------------------------


def _betas(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"betas must be comma-separated numbers, got {text!r}")
    if any(not 0.0 <= b <= 1.0 for b in values):
        raise argparse.ArgumentTypeError("every beta must lie in [0, 1]")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--network", metavar="PATH", help="network spec file (JSON)")
    src.add_argument("--scenario", metavar="NAME", help="builtin scenario: pacs or 2-50-N")
    common.add_argument("--seed", type=int, default=None, help="RNG seed")
    common.add_argument("--out", metavar="PATH", help="CSV output path")
    common.add_argument("--jobs", type=int, default=1, help="threads for fitness evaluation (default 1)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument("--budget", type=int, help="defense budget; filters the front to affordable points")
    analysis.add_argument("--betas", type=_betas, help="comma-separated DNF weights for the scalarization sweep")
    analysis.add_argument("--scalar-out", metavar="PATH", help="scalarization report CSV")

    ap = argparse.ArgumentParser(prog="iotdefense", description="Plan decoy and patch deployments for IoT networks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s (kernels: {kernels.BACKEND})")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", parents=[common, analysis], help="search deployments with NSGA-II")
    p.add_argument("--pop", type=int, default=100, help="population size (default 100)")
    p.add_argument("--gens", type=int, default=100, help="generations (default 100)")
    p.add_argument("--crossover", type=float, default=0.8, help="crossover rate (default 0.8)")
    p.add_argument("--mutation", type=float, default=0.2, help="per-offspring mutation rate (default 0.2)")
    p.add_argument("--log", metavar="PATH", help="write the per-generation run log here")

    p = sub.add_parser("exhaustive", parents=[common, analysis], help="exact frontier by exhaustive search")
    p.add_argument("--limit", type=int, default=DEFAULT_SPACE_LIMIT, help="max valid deployments to enumerate")

    p = sub.add_parser("evaluate", parents=[common], help="metrics of one deployment vector")
    p.add_argument("--dv", required=True, help="comma-separated deployment vector, or a named PACS deployment")
    p.add_argument("--paths", metavar="PATH", help="dump every attack path to this file")

    p = sub.add_parser("compare", parents=[common], help="compare baseline and named deployments")
    p.add_argument(
        "--deployment", action="append", default=[], metavar="NAME=DV",
        help="extra row; repeatable (PACS defaults to its six case-study rows)",
    )

    p = sub.add_parser("benchmark", parents=[common], help="GA vs exhaustive search on the 2-50-N family")
    p.add_argument("--min-iot", type=int, default=50)
    p.add_argument("--max-iot", type=int, default=200)
    p.add_argument("--step", type=int, default=25)
    p.add_argument("--pop", type=int, help="override the per-size population")
    p.add_argument("--gens", type=int, help="override the per-size generation count")
    p.add_argument("--crossover", type=float, default=0.8)
    p.add_argument("--mutation", type=float, default=0.2)
    return ap


# --- helpers --------------------------------------------------------------------


def load_network(args: argparse.Namespace, default_scenario: str | None = None) -> IoTNetwork:
    if args.network:
        path = Path(args.network)
        if not path.is_file():
            raise InputError(f"spec not found: {path}")
        spec = NetworkSpec.load(path)
    elif args.scenario or default_scenario:
        spec = scenario(args.scenario or default_scenario)
    else:
        raise InputError("one of --network or --scenario is required")
    return build_network(spec)


def parse_dv(text: str, network: IoTNetwork) -> tuple[int, ...]:
    if text in PACS_DEPLOYMENTS and network.name == "pacs":
        return PACS_DEPLOYMENTS[text]
    try:
        values = tuple(int(x) for x in text.replace(" ", "").split(","))
    except ValueError:
        raise InputError(f"deployment vector must be comma-separated integers, got {text!r}")
    Y_d, Y_p = decoy_types(network), patch_types(network)
    if len(values) != len(Y_d) + len(Y_p):
        raise InputError(f"deployment vector needs {len(Y_d) + len(Y_p)} entries, got {len(values)}")
    return values


def _display_table(rows: Sequence[dict]) -> str:
    head = f"{'dv_bits':<24}{'DNF':>8}{'NIP':>8}{'RCF':>8}{'PD':>8}{'PPD':>8}{'NAPRT':>7}{'NAPDT':>7}{'DCDM':>8}"
    lines = [head]
    for r in rows:
        lines.append(
            f"{r['dv_bits']:<24}{r['dnf']:>8.3f}{r['nip']:>8.3f}{r['rcf']:>8.3f}"
            f"{percent(r['pd']):>8}{percent(r['ppd']):>8}{r['naprt']:>7}{r['napdt']:>7}{r['dcdm']:>8}"
        )
    return "\n".join(lines)


def _emit_front(front: ParetoFront, network: IoTNetwork, args: argparse.Namespace) -> None:
    ev = Evaluator(network)
    dvs = np.array([m.dv for m in front], dtype=np.int8).reshape(len(front), -1)
    rows = ev.rows(dvs) if len(front) else []
    text = write_metric_csv(rows, args.out)
    if args.out:
        print(f"wrote {len(rows)} frontier deployments to {args.out}")
    else:
        sys.stdout.write(text)
        return
    print(_display_table(rows[:20]))
    if len(rows) > 20:
        print(f"... {len(rows) - 20} more rows in {args.out}")


def _emit_analysis(front: ParetoFront, network: IoTNetwork, args: argparse.Namespace) -> None:
    if args.budget is None and args.betas is None:
        return
    members = list(front)
    tc = total_cost(network)
    if args.budget is not None:
        members = budget_filter(members, args.budget, tc)
        print(f"budget {args.budget}: TC {tc}, minimum RCF {min_rcf(args.budget, tc):.4f}, {len(members)} affordable")
    if not members:
        print("no affordable deployments")
        return
    ev = Evaluator(network)
    out = []
    for choice in scalarize_sweep(members, args.betas or DEFAULT_BETAS):
        for m in choice.members:
            bits = ev.rows(np.array([m.dv], dtype=np.int8))[0]["dv_bits"]
            out.append((choice.beta, bits, m.fitness.dnf, m.fitness.nip, choice.score))
            print(f"beta {choice.beta:.2f}  {bits}  dnf {m.fitness.dnf:.3f}  nip {m.fitness.nip:.3f}")
    if args.scalar_out:
        with open(args.scalar_out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["beta", "dv_bits", "dnf", "nip", "score"])
            for beta, bits, d, n, s in out:
                w.writerow([repr(beta), bits, repr(d), repr(n), repr(s)])


# --- commands -------------------------------------------------------------------


def cmd_optimize(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise InputError("optimize requires --seed")
    try:
        params = GAParams(args.pop, args.gens, args.crossover, args.mutation, args.seed)
    except ValueError as exc:
        raise InputError(str(exc))
    network = load_network(args)
    opt_log = logging.getLogger("iotdefense.optimizer")
    handler = None
    if args.log:
        handler = logging.FileHandler(args.log, mode="w", encoding="utf-8")
        handler.setFormatter(logging.Formatter("%(message)s"))
        opt_log.addHandler(handler)
        opt_log.setLevel(logging.INFO)
        opt_log.propagate = args.verbose
    try:
        result = nsga2(DeploymentProblem(network, jobs=args.jobs), params)
    finally:
        if handler is not None:
            opt_log.removeHandler(handler)
            opt_log.propagate = True
            opt_log.setLevel(logging.NOTSET)
            handler.close()
    log.info("%d evaluations", result.evaluations)
    _emit_front(result.front, network, args)
    _emit_analysis(result.front, network, args)
    return EXIT_OK


def cmd_exhaustive(args: argparse.Namespace) -> int:
    network = load_network(args)
    problem = DeploymentProblem(network, jobs=args.jobs)
    front = exhaustive_search(problem, limit=args.limit)
    print(f"{problem.evaluations} evaluations, {len(front)} frontier deployments", file=sys.stderr)
    _emit_front(front, network, args)
    _emit_analysis(front, network, args)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    network = load_network(args)
    dv = parse_dv(args.dv, network)
    try:
        Y_d = decoy_types(network)
        check_deployment(DeploymentVector.from_values(dv, len(Y_d)), Y_d, patch_types(network))
    except ValueError as exc:
        raise InputError(str(exc))
    rows = Evaluator(network).rows(np.array([dv], dtype=np.int8))
    text = write_metric_csv(rows, args.out)
    sys.stdout.write(text if not args.out else _display_table(rows) + "\n")
    if args.paths:
        write_path_dump(attack_paths(network, dv), args.paths)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    network = load_network(args)
    if network.name == "pacs":
        named = {n: PACS_DEPLOYMENTS.get(n) for n in PACS_COMPARISON}
    else:
        named = {n: None for n in SPECIAL_DEPLOYMENTS}
    for item in args.deployment:
        name, sep, literal = item.partition("=")
        if not sep:
            raise InputError(f"--deployment expects NAME=DV, got {item!r}")
        named[name] = parse_dv(literal, network)
    try:
        rows = comparison_report(network, named)
    except (KeyError, ValueError) as exc:
        raise InputError(str(exc))
    print(format_comparison(rows))
    if args.out:
        Path(args.out).write_text(comparison_csv(rows), encoding="utf-8")
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    if args.step < 1:
        raise InputError("--step must be positive")
    grid = [n for n in range(args.min_iot, args.max_iot + 1, args.step)]
    if not grid:
        raise InputError("empty network grid")
    bad = [n for n in grid if n not in SCALED_IOT_GRID]
    if bad:
        raise InputError(f"IoT counts must be in {SCALED_IOT_GRID}, got {bad}")
    seed = 0 if args.seed is None else args.seed
    params = None
    if args.pop is not None or args.gens is not None:
        try:
            params = GAParams(args.pop or 100, args.gens or 100, args.crossover, args.mutation, seed)
        except ValueError as exc:
            raise InputError(str(exc))
    records = benchmark(grid, params, seed=seed, jobs=args.jobs)
    text = benchmark_csv(records, args.out)
    if not args.out:
        sys.stdout.write(text)
    else:
        for r in records:
            print(
                f"{r.network_label:<12}{r.bits:>4} bits  pop {r.pop:<4} gens {r.gens:<4} "
                f"GA {r.ga_seconds:7.2f}s  ESA {r.esa_seconds:7.2f}s  ratio {r.ratio_headline:.2f}"
            )
    return EXIT_OK


COMMANDS = {
    "optimize": cmd_optimize,
    "exhaustive": cmd_exhaustive,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "benchmark": cmd_benchmark,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except SpaceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (InputError, SpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
