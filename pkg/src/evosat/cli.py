"""Command-line interface: solve, evolve, baseline, compare, oracle.

Exit codes: 0 success, 2 usage/configuration error, 3 instance parse error,
4 runtime/IO error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from evosat.cnf import (
    DimacsError,
    brute_force_optimum,
    load_instance,
    random_assignment,
)
from evosat.ga import GaParams
from evosat.harness import (
    ConfigError,
    ExperimentConfig,
    build_payload,
    emit_report,
    read_rows_csv,
    render_report,
    run_experiment,
    write_payload,
)
from evosat.heuristics import KINDS, HeuristicSpec, run_heuristic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_RUNTIME = 4


def _add_heuristic_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--heuristic", required=True, choices=KINDS, help="heuristic kind"
    )
    parser.add_argument("--noise", type=float, help="novelty probability p")
    parser.add_argument("--wp", type=float, help="random-walk probability")
    parser.add_argument(
        "--tabu", type=int, help="tabu tenure (default: 1 + n // 100)"
    )
    parser.add_argument("--adapt-theta", type=float, help="stagnation threshold factor")
    parser.add_argument("--adapt-phi", type=float, help="noise adjustment strength")


def _spec_from_args(args: argparse.Namespace) -> HeuristicSpec:
    kwargs = {}
    for field, attr in (
        ("noise", "noise"),
        ("wp", "wp"),
        ("tabu_tenure", "tabu"),
        ("adapt_theta", "adapt_theta"),
        ("adapt_phi", "adapt_phi"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            kwargs[field] = value
    return HeuristicSpec(args.heuristic, **kwargs)


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    return random.SystemRandom().randrange(2**32)


def _emit_payload(payload: dict, args: argparse.Namespace) -> None:
    if args.out:
        write_payload(payload, args.out, args.format)


def cmd_solve(args: argparse.Namespace) -> int:
    if args.flip_budget is None and args.time_budget is None:
        raise ConfigError("solve requires --flip-budget and/or --time-budget")
    inst = load_instance(args.cnf)
    seed = _resolve_seed(args)
    rng = random.Random(seed)
    spec = _spec_from_args(args)
    start = random_assignment(inst.n, rng)
    rec = run_heuristic(
        spec, inst, start, rng, max_flips=args.flip_budget, max_seconds=args.time_budget
    )
    payload = build_payload(
        "solve",
        args.cnf,
        inst,
        spec,
        {"max_flips": args.flip_budget, "max_seconds": args.time_budget},
        seed,
        None,
        rec.to_json_dict(),
    )
    payload["best_assignment"] = "".join(
        "1" if b else "0" for b in rec.final_assignment_of_best
    )
    _emit_payload(payload, args)
    print(
        f"{payload['instance']['name']}: best_count={rec.best_count}/{inst.m}"
        f" best_flips={rec.best_found_at_flips} total_flips={rec.total_flips} seed={seed}"
    )
    return EXIT_OK


def cmd_evolve(args: argparse.Namespace) -> int:
    params = GaParams(
        pop_size=args.pop_size,
        elite_frac=args.elite_frac,
        p_crossover=args.crossover_prob,
        p_mutation=1.0 - args.crossover_prob,
        eval_starts=args.eval_starts,
        selection_ratio=args.selection_ratio,
        distinct_floor_frac=args.distinct_floor_frac,
        init_maxlen_frac=args.init_maxlen_frac,
        mutation_frac=args.mutation_frac,
        per_eval_budget=args.flip_budget,
        generations=args.generations,
        time_budget_s=args.time_budget,
    )
    config = ExperimentConfig(
        instance_path=args.cnf,
        mode="ga",
        heuristic=_spec_from_args(args),
        seed=_resolve_seed(args),
        ga_params=params,
        dataset=args.dataset,
        out_path=args.out,
        report_format=args.format,
    )
    payload = run_experiment(config)
    result = payload["result"]
    if result["best_S"] is None:
        print(f"{payload['instance']['name']}: no result (budget too small)")
    else:
        print(
            f"{payload['instance']['name']}: best_S={result['best_S']}"
            f" best_R={result['best_R']} generations={result['generations']}"
            f" seed={payload['seed']}"
        )
    if args.plot:
        if not args.out:
            print("note: --plot needs --out to name the figure; skipped", file=sys.stderr)
        else:
            from evosat.plots import plot_fitness_trace

            fig_path = str(Path(args.out).with_suffix("")) + "_trace.png"
            plot_fitness_trace(
                result["trace"], fig_path, title=payload["instance"]["name"]
            )
            print(f"figure: {fig_path}")
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        instance_path=args.cnf,
        mode="baseline",
        heuristic=_spec_from_args(args),
        seed=_resolve_seed(args),
        per_run_budget=args.flip_budget,
        time_budget_s=args.time_budget,
        run_count=args.runs,
        dataset=args.dataset,
        out_path=args.out,
        report_format=args.format,
    )
    payload = run_experiment(config)
    result = payload["result"]
    if result["best_count"] is None:
        print(
            f"{payload['instance']['name']}: no result"
            f" ({result['runs']} runs, no 50-run block completed)"
        )
    else:
        print(
            f"{payload['instance']['name']}: best_count={result['best_count']}"
            f" runs={result['runs']} blocks={result['blocks']} seed={payload['seed']}"
        )
    return EXIT_OK


def _collect_payloads(paths: list[str]) -> dict[str, dict]:
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(p.glob("*.json")))
        else:
            files.append(p)
    out: dict[str, dict] = {}
    for f in files:
        payload = json.loads(f.read_text(encoding="utf-8"))
        name = (payload.get("instance") or {}).get("name")
        if not name:
            raise ConfigError(f"{f}: payload has no instance name")
        if name in out:
            raise ConfigError(f"duplicate results for instance {name!r} ({f})")
        out[name] = payload
    if not out:
        raise ConfigError("no result payloads found")
    return out


def cmd_compare(args: argparse.Namespace) -> int:
    if args.fixture:
        rows = read_rows_csv(Path(args.fixture).read_text(encoding="utf-8"))
    else:
        if not args.ga or not args.baseline:
            raise ConfigError("compare needs --fixture, or both --ga and --baseline")
        rows = emit_report(_collect_payloads(args.ga), _collect_payloads(args.baseline))
    text = render_report(rows, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"report: {args.out} ({len(rows)} rows)")
        if not args.no_plot:
            from evosat.plots import plot_comparison

            fig_path = str(Path(args.out).with_suffix("")) + ".png"
            plot_comparison(rows, fig_path)
            print(f"figure: {fig_path}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    inst = load_instance(args.cnf)
    best, witness = brute_force_optimum(inst)
    payload = build_payload(
        "oracle", args.cnf, inst, None, {}, 0, None, {"best_count": best}
    )
    payload["witness"] = "".join("1" if b else "0" for b in witness)
    _emit_payload(payload, args)
    print(f"{payload['instance']['name']}: optimum={best}/{inst.m}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evosat",
        description="MAX-SAT local search with evolved initial-assignment preambles",
        epilog="exit codes: 0 ok, 2 usage/config error, 3 parse error, 4 runtime error",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="one heuristic run from a random start")
    solve.add_argument("cnf", help="DIMACS CNF file")
    _add_heuristic_args(solve)
    solve.add_argument("--flip-budget", type=int, help="maximum flips")
    solve.add_argument("--time-budget", type=float, help="maximum seconds")
    solve.add_argument("--seed", type=int, help="master seed (default: drawn)")
    solve.add_argument("--out", help="write the result payload here")
    solve.add_argument("--format", choices=("json", "csv"), default="json")
    solve.set_defaults(func=cmd_solve)

    evolve = sub.add_parser("evolve", help="evolve a preamble for one instance")
    evolve.add_argument("cnf", help="DIMACS CNF file")
    _add_heuristic_args(evolve)
    evolve.add_argument(
        "--generations", type=int, help="run this many generations (deterministic)"
    )
    evolve.add_argument("--time-budget", type=float, help="wall-clock budget in seconds")
    evolve.add_argument(
        "--flip-budget",
        type=int,
        help="heuristic flips per evaluation (default: 10 * n)",
    )
    evolve.add_argument("--seed", type=int, help="master seed (default: drawn)")
    evolve.add_argument("--pop-size", type=int, default=50)
    evolve.add_argument("--elite-frac", type=float, default=0.20)
    evolve.add_argument("--crossover-prob", type=float, default=0.25)
    evolve.add_argument("--eval-starts", type=int, default=10)
    evolve.add_argument("--selection-ratio", type=float, default=20.0)
    evolve.add_argument("--distinct-floor-frac", type=float, default=0.4)
    evolve.add_argument("--init-maxlen-frac", type=float, default=1.5)
    evolve.add_argument("--mutation-frac", type=float, default=0.5)
    evolve.add_argument("--dataset", help="dataset label carried into reports")
    evolve.add_argument("--out", help="write the result payload here")
    evolve.add_argument("--format", choices=("json", "csv"), default="json")
    evolve.add_argument(
        "--plot", action="store_true", help="also render the fitness trace figure"
    )
    evolve.set_defaults(func=cmd_evolve)

    baseline = sub.add_parser(
        "baseline", help="repeated heuristic runs reported per 50-run block"
    )
    baseline.add_argument("cnf", help="DIMACS CNF file")
    _add_heuristic_args(baseline)
    baseline.add_argument(
        "--flip-budget", type=int, required=True, help="flips per run"
    )
    baseline.add_argument("--time-budget", type=float, help="wall-clock budget in seconds")
    baseline.add_argument("--runs", type=int, help="exact run count (deterministic)")
    baseline.add_argument("--seed", type=int, help="master seed (default: drawn)")
    baseline.add_argument("--dataset", help="dataset label carried into reports")
    baseline.add_argument("--out", help="write the result payload here")
    baseline.add_argument("--format", choices=("json", "csv"), default="json")
    baseline.set_defaults(func=cmd_baseline)

    compare = sub.add_parser(
        "compare", help="GA-vs-baseline comparison table with success ratios"
    )
    compare.add_argument(
        "--ga", nargs="+", help="GA result payloads (files or directories)"
    )
    compare.add_argument(
        "--baseline", nargs="+", help="baseline result payloads (files or directories)"
    )
    compare.add_argument(
        "--fixture", help="pre-built comparison CSV instead of payloads"
    )
    compare.add_argument("--format", choices=("csv", "json"), default="csv")
    compare.add_argument("--out", help="write the report here")
    compare.add_argument(
        "--no-plot", action="store_true", help="skip the comparison figure"
    )
    compare.set_defaults(func=cmd_compare)

    oracle = sub.add_parser("oracle", help="exact optimum by enumeration (n <= 26)")
    oracle.add_argument("cnf", help="DIMACS CNF file")
    oracle.add_argument("--out", help="write the result payload here")
    oracle.add_argument("--format", choices=("json", "csv"), default="json")
    oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DimacsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
