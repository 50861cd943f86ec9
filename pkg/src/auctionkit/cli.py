"""Command-line entry point.

Subcommands: solve, levelk, cycle, optimize-p, distance, estimate, simulate,
assign-levels, verify, rmse.  Outputs are machine-readable (CSV / JSON) and
deterministic: identical inputs and seed give byte-identical files.  The
resolved auction spec is logged on every run and embedded in JSON outputs.

Exit codes: 0 success, 1 domain/data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import design, estimation, io as akio
from .core import AuctionSpec, Format
from .equilibrium import continuous_equilibrium, solve_equilibrium, verify_equilibrium
from .errors import AuctionKitError
from .estimation import (
    Grouping,
    TypeSet,
    assign_levels,
    correlate,
    equilibrium_type,
    fit_mixture,
    jackknife_se,
    levelk_type,
    prediction_rmse,
    simulate_dataset,
)
from .levelk import Level0Spec, iterate_levels

log = logging.getLogger("auctionkit")


def _add_spec_flags(sub: argparse.ArgumentParser, require_format=True) -> None:
    sub.add_argument("--spec", type=Path, help="auction spec JSON (overrides inline flags)")
    sub.add_argument("--format", choices=[f.value for f in Format],
                     required=False, help="auction format")
    sub.add_argument("--n", type=int, default=2, help="number of bidders")
    sub.add_argument("--x", type=int, default=100, help="maximum valuation")
    sub.add_argument("--p", default=None,
                     help="pass-through probability (rational like 1/2, or decimal)")
    sub.add_argument("--bid-step", type=int, default=1, help="bid grid step")
    sub.add_argument("--grid", default=None, help="explicit comma-separated bid grid")
    sub.add_argument("--alpha", type=float, default=1.0, help="utility exponent")


def _resolve_spec(args) -> AuctionSpec:
    if args.spec:
        spec = akio.load_spec(args.spec)
    else:
        if not args.format:
            raise AuctionKitError("need --format (or --spec FILE.json)")
        fmt = Format(args.format)
        if args.grid:
            grid = tuple(int(b) for b in args.grid.split(","))
        else:
            grid = tuple(range(0, args.x + 1, args.bid_step))
        p = args.p
        if p is None:
            p = 1
        spec = AuctionSpec(format=fmt, n=args.n, x=args.x, bid_grid=grid, p=p, alpha=args.alpha)
    log.info("resolved spec: %s", json.dumps(akio.spec_to_dict(spec), sort_keys=True))
    return spec


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(payload: dict, path: Path | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is not None:
        path.write_text(text + "\n")
    print(text)


def _parse_l0(name: str) -> Level0Spec:
    return Level0Spec.truthful() if name == "truthful" else Level0Spec.uniform()


def _types_from_arg(arg: str, spec: AuctionSpec, l0: Level0Spec, tiebreak: str) -> TypeSet:
    types = []
    for token in arg.split(","):
        token = token.strip().lower()
        if token in ("eq", "equilibrium"):
            types.append(equilibrium_type(spec))
        elif token.startswith("l"):
            types.append(levelk_type(spec, int(token[1:]), l0, tiebreak))
        else:
            raise AuctionKitError(f"unknown type {token!r}; use eq or lK (e.g. l3)")
    return TypeSet(types)


def cmd_solve(args) -> int:
    spec = _resolve_spec(args)
    out = _outdir(args)
    result = solve_equilibrium(spec)
    akio.write_strategy_csv(out / "strategy.csv", spec, result.strategy)
    payload = {
        "spec": akio.spec_to_dict(spec),
        "jumps": [str(j) for j in result.jumps],
        "verified": result.verified,
        "max_regret": str(result.max_regret),
        "notes": list(result.notes),
    }
    _emit(payload, out / "jumps.json")
    if args.continuous:
        with open(out / "continuous.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["value", "bid"])
            for v in spec.values:
                writer.writerow([v, repr(continuous_equilibrium(spec, v))])
    return 0


def cmd_levelk(args) -> int:
    spec = _resolve_spec(args)
    out = _outdir(args)
    prediction = iterate_levels(spec, _parse_l0(args.l0), args.k_max, args.tiebreak)
    with open(out / "levels.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "value", "bid"])
        for k in range(1, args.k_max + 1):
            bf = prediction.by_level(k)
            for v in spec.values:
                writer.writerow([k, v, bf(v)])
    payload = {
        "spec": akio.spec_to_dict(spec),
        "k_max": args.k_max,
        "l0": args.l0,
        "tiebreak": args.tiebreak,
        "cycle": (
            {"start_level": prediction.cycle[0], "period": prediction.cycle[1]}
            if prediction.cycle else None
        ),
        "max_bids": prediction.max_bids(),
    }
    _emit(payload, out / "cycle.json")
    return 0


def cmd_cycle(args) -> int:
    spec = _resolve_spec(args)
    out = _outdir(args)
    prediction = iterate_levels(spec, _parse_l0(args.l0), args.k_max, args.tiebreak)
    with open(out / "max_bids.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "max_bid"])
        for k, mb in enumerate(prediction.max_bids(), start=1):
            writer.writerow([k, mb])
    payload = {
        "spec": akio.spec_to_dict(spec),
        "cycle": (
            {"start_level": prediction.cycle[0], "period": prediction.cycle[1]}
            if prediction.cycle else None
        ),
    }
    _emit(payload, out / "cycle.json")
    return 0


def cmd_optimize_p(args) -> int:
    result = design.optimize_p(args.n, args.x)
    payload = {
        "n": args.n,
        "x": args.x,
        "p_star": result.p_star,
        "distance": result.distance_at_p_star,
        "roots": [{"p": p, "distance": d} for p, d in result.candidates],
    }
    _emit(payload, _outdir(args) / "optimal_p.json")
    return 0


def eval_fraction(text: str) -> float:
    from fractions import Fraction

    return float(Fraction(text))


def cmd_distance(args) -> int:
    p = eval_fraction(args.p)
    value = design.distance(args.n, args.x, p)
    _emit({"n": args.n, "x": args.x, "p": p, "distance": value}, None)
    return 0


def cmd_estimate(args) -> int:
    spec = _resolve_spec(args)
    out = _outdir(args)
    l0 = _parse_l0(args.l0)
    typeset = _types_from_arg(args.types, spec, l0, args.tiebreak)
    records = akio.read_bid_csv(args.data, spec)
    grouping = Grouping.SUBJECT if args.grouping == "subject" else Grouping.SUBJECT_ROUND
    fit = fit_mixture(
        records, typeset, grouping,
        n_starts=args.starts, seed=args.seed, sigma_shared=args.sigma_shared,
        grid=spec.bid_grid,
    )
    payload = {"spec": akio.spec_to_dict(spec), **fit.to_dict()}
    if args.jackknife:
        se = jackknife_se(records, typeset, grouping, seed=args.seed,
                          sigma_shared=args.sigma_shared, grid=spec.bid_grid)
        payload["shares_se"] = list(se.shares_se)
        payload["sigmas_se"] = list(se.sigmas_se)
    _emit(payload, out / "fit.json")
    return 0


def cmd_simulate(args) -> int:
    spec = _resolve_spec(args)
    out = _outdir(args)
    l0 = _parse_l0(args.l0)
    typeset = _types_from_arg(args.types, spec, l0, args.tiebreak)
    shares = [float(eval_fraction(s)) for s in args.shares.split(",")]
    sigmas = [float(s) for s in args.sigmas.split(",")]
    grouping = Grouping.SUBJECT if args.grouping == "subject" else Grouping.SUBJECT_ROUND
    records = simulate_dataset(
        spec, typeset, shares, sigmas,
        n_subjects=args.subjects, rounds=args.rounds, seed=args.seed,
        grouping=grouping, treatment=args.treatment,
    )
    akio.write_bid_csv(out / "bids.csv", records)
    _emit({"spec": akio.spec_to_dict(spec), "records": len(records),
           "file": str(out / "bids.csv")}, None)
    return 0


def cmd_assign_levels(args) -> int:
    spec = _resolve_spec(args)
    out = _outdir(args)
    l0 = _parse_l0(args.l0)
    typeset = _types_from_arg(args.types, spec, l0, args.tiebreak)
    records = akio.read_bid_csv(args.data, spec)
    assignments = assign_levels(records, typeset, grid=spec.bid_grid)
    payload = {
        "spec": akio.spec_to_dict(spec),
        "levels": {
            sid: {"level": a.level, "sigma": a.sigma, "tied": a.tied}
            for sid, a in assignments.items()
        },
    }
    if args.compare:
        other = json.loads(Path(args.compare).read_text())
        mine = {sid: a.level for sid, a in assignments.items()}
        other = {str(k): int(v) for k, v in other.items()}
        corr = correlate(mine, other, seed=args.seed)
        payload["correlation"] = {
            "r": corr.r, "ci_low": corr.ci_low, "ci_high": corr.ci_high, "n": corr.n,
        }
    _emit(payload, out / "levels.json")
    return 0


def cmd_verify(args) -> int:
    spec = _resolve_spec(args)
    strategy = akio.read_strategy_csv(args.strategy, spec)
    regret = verify_equilibrium(spec, strategy)
    _emit({
        "spec": akio.spec_to_dict(spec),
        "max_regret": str(regret),
        "is_equilibrium": regret == 0,
    }, None)
    return 0


def cmd_rmse(args) -> int:
    spec = _resolve_spec(args)
    records = akio.read_bid_csv(args.data, spec)
    l0 = _parse_l0(args.l0)
    if args.predictor == "eq":
        predictors = [equilibrium_type(spec)]
    else:
        lo, hi = (int(t) for t in args.levels.split("-"))
        predictors = [levelk_type(spec, k, l0, args.tiebreak) for k in range(lo, hi + 1)]
    value = prediction_rmse(records, predictors)
    _emit({"spec": akio.spec_to_dict(spec), "predictor": args.predictor, "rmse": value}, None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auctionkit",
        description="Equilibrium and level-k analysis of discrete auctions",
    )
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("solve", help="compute the symmetric equilibrium")
    _add_spec_flags(sp)
    sp.add_argument("--continuous", action="store_true",
                    help="also emit the closed-form continuous bid curve")
    sp.set_defaults(func=cmd_solve)

    for name, func in (("levelk", cmd_levelk), ("cycle", cmd_cycle)):
        sp = subs.add_parser(name, help=f"{name} analysis")
        _add_spec_flags(sp)
        sp.add_argument("--k-max", type=int, default=100)
        sp.add_argument("--l0", choices=["uniform", "truthful"], default="uniform")
        sp.add_argument("--tiebreak", choices=["low", "high"], default="low")
        sp.set_defaults(func=func)

    sp = subs.add_parser("optimize-p", help="separation-maximizing pass-through probability")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--x", type=float, default=100.0)
    sp.set_defaults(func=cmd_optimize_p)

    sp = subs.add_parser("distance", help="area between equilibrium and level-1 curves")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--x", type=float, default=100.0)
    sp.add_argument("--p", required=True)
    sp.set_defaults(func=cmd_distance)

    sp = subs.add_parser("estimate", help="fit the mixture model to bid data")
    _add_spec_flags(sp)
    sp.add_argument("--data", type=Path, required=True)
    sp.add_argument("--types", default="eq,l1,l2,l3")
    sp.add_argument("--grouping", choices=["subject", "round"], default="subject")
    sp.add_argument("--l0", choices=["uniform", "truthful"], default="uniform")
    sp.add_argument("--tiebreak", choices=["low", "high"], default="low")
    sp.add_argument("--starts", type=int, default=10)
    sp.add_argument("--sigma-shared", action="store_true")
    sp.add_argument("--jackknife", action="store_true")
    sp.set_defaults(func=cmd_estimate)

    sp = subs.add_parser("simulate", help="draw a synthetic bid dataset")
    _add_spec_flags(sp)
    sp.add_argument("--types", default="eq,l3")
    sp.add_argument("--shares", required=True, help="comma-separated type shares")
    sp.add_argument("--sigmas", required=True, help="comma-separated noise levels")
    sp.add_argument("--subjects", type=int, default=84)
    sp.add_argument("--rounds", type=int, default=2)
    sp.add_argument("--grouping", choices=["subject", "round"], default="subject")
    sp.add_argument("--treatment", default="T1")
    sp.add_argument("--l0", choices=["uniform", "truthful"], default="uniform")
    sp.add_argument("--tiebreak", choices=["low", "high"], default="low")
    sp.set_defaults(func=cmd_simulate)

    sp = subs.add_parser("assign-levels", help="per-subject maximum-likelihood levels")
    _add_spec_flags(sp)
    sp.add_argument("--data", type=Path, required=True)
    sp.add_argument("--types", default="l1,l2,l3")
    sp.add_argument("--l0", choices=["uniform", "truthful"], default="uniform")
    sp.add_argument("--tiebreak", choices=["low", "high"], default="low")
    sp.add_argument("--compare", type=Path,
                    help="JSON {subject: level} to correlate against")
    sp.set_defaults(func=cmd_assign_levels)

    sp = subs.add_parser("verify", help="best-response check of a strategy CSV")
    _add_spec_flags(sp)
    sp.add_argument("--strategy", type=Path, required=True)
    sp.set_defaults(func=cmd_verify)

    sp = subs.add_parser("rmse", help="root-mean-square prediction error")
    _add_spec_flags(sp)
    sp.add_argument("--data", type=Path, required=True)
    sp.add_argument("--predictor", choices=["eq", "levelk"], required=True)
    sp.add_argument("--levels", default="1-3", help="level range for the levelk predictor")
    sp.add_argument("--l0", choices=["uniform", "truthful"], default="uniform")
    sp.add_argument("--tiebreak", choices=["low", "high"], default="low")
    sp.set_defaults(func=cmd_rmse)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except AuctionKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
