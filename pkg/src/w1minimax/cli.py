"""Command-line entry point: ``w1minimax {oracle,estimate,lowerbound,rate-study}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .densities import GridDensity, SampleSet
from .errors import W1Error


def _load_measure(path: str):
    p = Path(path)
    if p.suffix.lower() == ".json":
        return GridDensity.load(p)
    return SampleSet.from_csv(p)


def _cmd_oracle_w1(args) -> int:
    from .transport import DiscreteMeasure, w1_discrete, w1_empirical, w1_grid

    mu, nu = _load_measure(args.mu), _load_measure(args.nu)
    flow = []
    if isinstance(mu, GridDensity) and isinstance(nu, GridDensity):
        L = max(mu.L, nu.L)
        sol = w1_grid(mu.refine(L), nu.refine(L))
        cost, flow = sol.cost, sol.flow
    elif isinstance(mu, SampleSet) and isinstance(nu, SampleSet) and not args.flow:
        cost = w1_empirical(mu, nu)
    else:
        def as_discrete(m):
            return DiscreteMeasure.from_grid(m) if isinstance(m, GridDensity) else DiscreteMeasure(m.points, [1 / m.n] * m.n)

        sol = w1_discrete(as_discrete(mu), as_discrete(nu))
        cost, flow = sol.cost, sol.flow
    print(repr(float(cost)))
    if args.flow:
        print("source,target,mass")
        for i, j, m in flow:
            print(f"{i},{j},{m!r}")
    return 0


def _cmd_estimate(args) -> int:
    from .estimators import EstimatorConfig, smoothed_estimate

    X, Y = SampleSet.from_csv(args.x), SampleSet.from_csv(args.y)
    est = smoothed_estimate(X, Y, EstimatorConfig(args.beta, args.backend, args.J))
    print(json.dumps(est.to_json()))
    return 0


def _cmd_priors(args) -> int:
    from .lowerbound import build_matching_priors

    pair = build_matching_priors(args.K, args.tau, args.grid)
    print(json.dumps(pair.to_json()))
    return 0


def _cmd_verify(args) -> int:
    from .lowerbound import verify_lower_bound

    kw = {} if args.c is None else {"c": args.c}
    print(json.dumps(verify_lower_bound(args.n, args.d, args.beta, J=args.J, **kw)))
    return 0


def _cmd_rate_study(args) -> int:
    from .harness import ExperimentConfig, run_rate_study

    config = ExperimentConfig.load(args.config)
    if args.n_jobs is not None:
        config.n_jobs = args.n_jobs
    table = run_rate_study(config)
    print(json.dumps({"output_path": config.output_path, "fitted": table.fitted}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="w1minimax", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    oracle = sub.add_parser("oracle", help="exact transport ground truth")
    osub = oracle.add_subparsers(dest="oracle_command", required=True)
    w1 = osub.add_parser("w1", help="W1 between grid densities (JSON) or sample sets (CSV)")
    w1.add_argument("--mu", required=True)
    w1.add_argument("--nu", required=True)
    w1.add_argument("--flow", action="store_true", help="also print the optimal flow as CSV")
    w1.set_defaults(func=_cmd_oracle_w1)

    est = sub.add_parser("estimate", help="wavelet-smoothed plug-in estimate")
    est.add_argument("--x", required=True)
    est.add_argument("--y", required=True)
    est.add_argument("--beta", type=float, required=True)
    est.add_argument("--backend", choices=("oracle", "besov"), default="besov")
    est.add_argument("--J", type=int)
    est.set_defaults(func=_cmd_estimate)

    lb = sub.add_parser("lowerbound", help="lower-bound machinery")
    lsub = lb.add_subparsers(dest="lowerbound_command", required=True)
    pr = lsub.add_parser("priors", help="moment-matched prior pair")
    pr.add_argument("--K", type=int, required=True)
    pr.add_argument("--tau", type=float, required=True)
    pr.add_argument("--grid", type=int, default=401)
    pr.set_defaults(func=_cmd_priors)
    ver = lsub.add_parser("verify", help="all bounds of the two-point construction")
    ver.add_argument("--n", type=int, required=True)
    ver.add_argument("--d", type=int, required=True)
    ver.add_argument("--beta", type=float, required=True)
    ver.add_argument("--J", type=int)
    ver.add_argument("--c", type=float)
    ver.set_defaults(func=_cmd_verify)

    rs = sub.add_parser("rate-study", help="Monte Carlo rate study from a JSON config")
    rs.add_argument("--config", required=True)
    rs.add_argument("--n-jobs", type=int, dest="n_jobs")
    rs.set_defaults(func=_cmd_rate_study)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (W1Error, ValueError, OSError, TypeError) as exc:
        code = getattr(exc, "code", type(exc).__name__)
        print(json.dumps({"error": code, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
