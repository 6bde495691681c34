"""Command-line entry point: ``stochcut {edcc,fsl,rcce,sample} --config MODEL ...``.

Exit codes: 0 success, 2 parse/config error, 3 infeasible budget, 4 io error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from .geometry import CircularCut
from .grid import DegenerateRec, InfeasibleBudget, compute_grid, implied_eps
from .integrator import GridEvaluator
from .io import (ConfigError, IoError, MissingValues, NegativeIntensity, ParseError, export_map,
                 load_budget, load_model, load_raster)
from .model import ExpectedCountOverflow
from .oracle import sample_records, summarize
from .planner import AttackDistribution, UnnormalizedDensity, fsl, rcce, worst_cut

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("stochcut")


def _report_delta(model, r, delta, budget):
    add, mult = implied_eps(model.rec, r, delta, budget, model)
    msg = f"delta={delta:g} implies additive eps={add:.6g}"
    if budget.mode == "combined":
        msg += f", multiplicative eps={mult:.6g}"
    print(msg, file=sys.stderr)


def cmd_edcc(args):
    model = load_model(args.config)
    budget = load_budget(args.config, args.eps)
    cut = CircularCut((args.cx, args.cy), args.radius)
    if not cut.fits_in(model.rec):
        raise ConfigError(f"{cut} does not fit inside {model.rec}")
    grid = compute_grid(model.rec, args.radius, budget, model, delta=args.delta)
    if args.delta is not None:
        _report_delta(model, args.radius, args.delta, budget)
    res = GridEvaluator(model, grid, budget)(cut)
    json.dump(res.as_dict(), sys.stdout, indent=2)
    print()


def cmd_fsl(args):
    model = load_model(args.config)
    budget = load_budget(args.config, args.eps)
    smap = fsl(model, args.radius, budget, delta=args.delta, workers=args.workers)
    if args.delta is not None:
        _report_delta(model, args.radius, args.delta, budget.halved())
    export_map(smap, args.out, args.format)
    cut, value = worst_cut(smap)
    json.dump({"cx": cut.center.x, "cy": cut.center.y, "radius": cut.radius, "tec": value,
               "delta": smap.delta, "shape": list(smap.values.shape),
               "rec_r": [smap.rec_r.xmin, smap.rec_r.xmax, smap.rec_r.ymin, smap.rec_r.ymax]},
              sys.stdout, indent=2)
    print()


def cmd_rcce(args):
    model = load_model(args.config)
    budget = load_budget(args.config, args.eps)
    dist = AttackDistribution.uniform()
    if args.psi:
        dist = AttackDistribution.density(load_raster(args.psi))
    value = rcce(model, args.radius, budget, dist, delta=args.delta,
                 normalize=args.normalize, workers=args.workers)
    if args.delta is not None:
        _report_delta(model, args.radius, args.delta, budget.halved())
    json.dump({"expected_tec": value, "radius": args.radius, "distribution": dist.kind},
              sys.stdout, indent=2)
    print()


def cmd_sample(args):
    model = load_model(args.config)
    cut = CircularCut((args.cx, args.cy), args.radius)
    records = sample_records(model, cut, args.n, args.seed)
    try:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sample", "alpha", "beta", "gamma", "total"])
            for k, (a, b, g) in enumerate(records):
                w.writerow([k] + [format(v, ".17g") for v in (a, b, g, a + b + g)])
    except OSError as exc:
        raise IoError(str(exc)) from exc
    json.dump(summarize(records).as_dict(), sys.stdout, indent=2)
    print()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stochcut", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, eps=True):
        sp.add_argument("--config", required=True, help="model config file")
        sp.add_argument("--radius", type=float, required=True)
        if eps:
            sp.add_argument("--eps", type=float, required=True, help="additive error target")
            sp.add_argument("--delta", type=float, help="grid spacing, overrides the error rule")

    sp = sub.add_parser("edcc", help="expected damage of one cut")
    common(sp)
    sp.add_argument("--cx", type=float, required=True)
    sp.add_argument("--cy", type=float, required=True)
    sp.set_defaults(func=cmd_edcc)

    sp = sub.add_parser("fsl", help="sensitivity map and worst cut")
    common(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=["csv", "ascii"], default="csv")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_fsl)

    sp = sub.add_parser("rcce", help="expected damage of a randomly placed cut")
    common(sp)
    sp.add_argument("--psi", help="ASCII grid with the density of the cut center")
    sp.add_argument("--normalize", choices=["rec_r", "rec"], default="rec_r")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_rcce)

    sp = sub.add_parser("sample", help="Monte-Carlo damage records")
    common(sp, eps=False)
    sp.add_argument("--cx", type=float, required=True)
    sp.add_argument("--cy", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (InfeasibleBudget, ExpectedCountOverflow) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (IoError, FileNotFoundError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ParseError, MissingValues, NegativeIntensity, DegenerateRec,
            UnnormalizedDensity, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
