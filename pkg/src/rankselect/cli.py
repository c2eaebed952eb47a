"""Command-line entry point: ``rankselect <subcommand> ...``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import exact, mcmc, selection
from .core import NoiseParams, Ranking, format_dataset, format_profile, read_input
from .errors import ConfigurationError, InvalidArgument
from .experiments import ExperimentConfig, config_from_mapping, emit_csv, format_csv_rows, read_config_file, run_experiment, CSV_HEADER
from .noise_models import sample_noisy_comparisons, sample_partial_orders, sample_profile
from .seeding import derive_rng

SELECT_METHODS = ("extended", "tuples", "borda", "plurality", "approval", "maximin", "copeland", "kemeny")
PROFILE_ONLY = ("borda", "plurality", "approval", "maximin")


def _fmt_members(members) -> str:
    if isinstance(members, frozenset):
        members = sorted(members)
    return " ".join(str(a) for a in members)


def _fmt_number(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.10g}"


def _gamma(args) -> float:
    if args.gamma is not None and args.p is not None:
        raise InvalidArgument("give either --gamma or --p, not both")
    if args.gamma is not None:
        return NoiseParams.from_gamma(args.gamma).gamma
    if args.p is not None:
        return NoiseParams(args.p).gamma
    raise InvalidArgument("one of --gamma or --p is required")


def cmd_select(args, out) -> int:
    D, profile = read_input(args.input)
    if args.method in PROFILE_ONLY and profile is None:
        raise InvalidArgument(f"--method {args.method} needs a profile file (complete rankings)")
    k, ties, seed = args.k, args.ties, args.seed
    if args.method == "kemeny":
        res = exact.kemeny_dp(D)
        prefixes = sorted({r.prefix(k) for r in res.rankings})
        if ties == "random":
            chosen = exact.sample_kemeny(D, seed).prefix(k)
            prefixes = [chosen]
        elif ties == "lex":
            prefixes = prefixes[:1]
        for pre in prefixes:
            print(f"{_fmt_members(pre)}\t{res.distance}", file=out)
        return 0
    if args.method == "extended":
        res = selection.select_top_k(D, k, ties, seed)
    elif args.method == "tuples":
        res = selection.select_top_tuple(D, k, ties, seed)
    elif args.method == "copeland":
        res = selection.select_copeland(D, k, ties, seed)
    elif args.method == "borda":
        res = selection.select_borda(profile, k, ties, seed)
    elif args.method == "plurality":
        res = selection.plurality(profile, k, ties, seed)
    elif args.method == "approval":
        res = selection.k_approval(profile, k, ties, seed)
    else:
        res = selection.select_maximin(profile, k, ties, seed)
    members = res.tie_set if ties == "all" else (res.chosen,)
    for member in members:
        print(f"{_fmt_members(member)}\t{_fmt_number(res.score)}", file=out)
    if res.truncated and ties == "all":
        print(f"# tie set truncated: {len(res.tie_set)} of {res.tie_count} shown", file=sys.stderr)
    return 0


def cmd_exact(args, out) -> int:
    D, _ = read_input(args.input)
    gamma = _gamma(args)
    oracle = {1: exact.optimal_objective1, 2: exact.optimal_objective2, 3: exact.optimal_objective3}[args.objective]
    res = oracle(D, gamma, args.k)
    table = exact.posterior_over_rankings(D, gamma)
    for member in res.tie_set:
        if args.objective == 1:
            prob = sum(res.values[a] for a in member)
        else:
            prob = _set_or_prefix_mass(table, member, args.objective)
        print(f"{_fmt_members(member)}\t{prob:.12g}", file=out)
    return 0


def _set_or_prefix_mass(table, member, objective) -> float:
    k = len(member)
    probs = table.probabilities
    top = table.orders[:, :k]
    if objective == 2:
        hit = np.sort(top, axis=1) == np.array(sorted(member))
    else:
        hit = top == np.array(member)
    return float(probs[hit.all(axis=1)].sum())


def cmd_kemeny(args, out) -> int:
    D, _ = read_input(args.input)
    res = exact.kemeny_dp(D)
    print(f"distance {res.distance}", file=out)
    for r in res.rankings:
        print(_fmt_members(r.order), file=out)
    if res.truncated:
        print(f"# {len(res.rankings)} of {res.count} optimal rankings shown", file=sys.stderr)
    return 0


def cmd_sample(args, out) -> int:
    D, _ = read_input(args.input)
    gamma = _gamma(args)
    burn = args.burn_in if args.burn_in is not None else args.steps // 20
    cfg = mcmc.ChainConfig(args.steps, burn, args.thin, args.seed)
    est = mcmc.estimate_top_marginals(D, gamma, cfg, chains=args.chains)
    print("alternative,estimate,stderr", file=out)
    for a in range(D.m):
        print(f"{a},{est.estimates[a]:.6f},{est.stderr[a]:.6f}", file=out)
    return 0


def cmd_simulate(args, out) -> int:
    values = read_config_file(args.config) if args.config else {}
    overrides = {
        "model": args.model, "m": args.m, "n": args.n, "p": args.p, "l": args.l,
        "k": args.k, "methods": args.methods, "iters": args.iters, "seed": args.seed,
        "mcmc_steps": args.mcmc_steps,
    }
    if args.objective:
        overrides["objective"] = ",".join(str(o) for o in args.objective)
    for key, value in overrides.items():
        if value is not None:
            values[key] = value if isinstance(value, str) else str(value)
    config = config_from_mapping(values)
    result = run_experiment(config, workers=args.workers)
    if args.out:
        emit_csv(result, args.out)
    else:
        print(",".join(CSV_HEADER), file=out)
        for row in format_csv_rows(result):
            print(",".join(row), file=out)
    return 0


def cmd_generate(args, out) -> int:
    params = NoiseParams(args.p)
    truth = Ranking(derive_rng(args.seed, "truth", 0).permutation(args.m))
    rng = derive_rng(args.seed, "data", 0)
    if args.model == "orders":
        text = format_profile([Ranking(o) for o in sample_profile(truth, params, args.n, rng)])
    elif args.model == "comparisons":
        text = format_dataset(sample_noisy_comparisons(truth, params, args.n, rng))
    else:
        if args.l is None:
            raise InvalidArgument("--l is required for the partial model")
        text = format_dataset(sample_partial_orders(truth, params, args.l, args.n, rng))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    print("truth " + _fmt_members(truth.order), file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankselect", description="Select likely-best subsets of alternatives from noisy rankings.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="run a selection method on a dataset or profile file")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=SELECT_METHODS, default="extended")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ties", choices=selection.TIE_POLICIES, default="all")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_select)

    def noise(p):
        p.add_argument("--gamma", type=float)
        p.add_argument("--p", type=float)

    p = sub.add_parser("exact", help="exact optimal selection by posterior enumeration (m <= 8)")
    p.add_argument("--input", required=True)
    noise(p)
    p.add_argument("--objective", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("kemeny", help="all Kemeny / minimum feedback rankings")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_kemeny)

    p = sub.add_parser("sample", help="MCMC estimate of top-alternative marginals (CSV)")
    p.add_argument("--input", required=True)
    noise(p)
    p.add_argument("--steps", type=int, default=200_000)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chains", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", help="simulation study; writes success rates with 95%% CIs as CSV")
    p.add_argument("--config", help="key=value file; flags override its values")
    p.add_argument("--model", choices=("orders", "comparisons", "partial"))
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--l", type=int)
    p.add_argument("--k", help='k values, e.g. "1..9" or "1,3,5"')
    p.add_argument("--objective", type=int, action="append", choices=(1, 2, 3))
    p.add_argument("--methods", help="comma-separated method names")
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--mcmc-steps", type=int, help="add the MCMC-estimated optimal curve (objective 1)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("generate", help="sample a profile or dataset file from a random true ranking")
    p.add_argument("--model", choices=("orders", "comparisons", "partial"), default="orders")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--l", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None, out=None) -> int:
    args = build_parser().parse_args(argv)
    out = out or sys.stdout
    try:
        return args.func(args, out)
    except (InvalidArgument, ConfigurationError, ValueError, RuntimeError, OSError) as exc:
        print(f"rankselect {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
