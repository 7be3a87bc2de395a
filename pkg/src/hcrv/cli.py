"""Command-line front end: simulation, fitting, diagnostics, benchmarks.

Subcommands: simulate, fit, bench, elicit, moments, diag. Every subcommand
is deterministic given (seed, config); CSV outputs carry a schema header
line so downstream consumers can validate their inputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import elicitation, exact, hdp, mcmc, measures, simulate
from .data import BaseMeasure, ModelParams, ingest_groups, load_dataset, save_dataset, validate_params
from .diagnostics import ess
from .errors import HcrvError, InvalidParam
from .rng import stream

SCHEMA_LINE = "# hcrv-schema v1"
SAMPLERS = ("mh", "mhlog", "exact", "ars", "hdppr", "hdpfixed")


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as f:
        f.write(SCHEMA_LINE + "\n")
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row)


def read_schema_csv(path):
    """Read a schema-tagged CSV; returns (columns, list-of-row-dicts)."""
    with open(path, newline="") as f:
        first = f.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise InvalidParam("schema", f"{path}: missing {SCHEMA_LINE!r}")
        reader = csv.DictReader(f)
        rows = list(reader)
        return reader.fieldnames, rows


def _parse_float_list(text):
    return [float(v) for v in str(text).split(",") if v != ""]


def _base_measure_from(text):
    kind, _, rest = str(text).partition(":")
    vals = _parse_float_list(rest) if rest else []
    if kind == "normal":
        mean, sd = (vals + [0.0, 1.0])[:2] if vals else (0.0, 1.0)
        return BaseMeasure("normal", mean=mean, sd=sd)
    if kind == "uniform":
        low, high = (vals + [0.0, 1.0])[:2] if vals else (0.0, 1.0)
        return BaseMeasure("uniform", low=low, high=high)
    raise InvalidParam("p0", f"unknown base measure spec {text!r}")


def _params_from_args(args):
    has_explicit = args.alpha is not None or args.alpha0 is not None
    has_elicited = args.sigma2 is not None or args.rho is not None
    if has_explicit and has_elicited:
        raise InvalidParam("params", "give either (alpha, alpha0) or (sigma2, rho), not both")
    base = _base_measure_from(args.p0)
    if has_elicited:
        if args.sigma2 is None or args.rho is None:
            raise InvalidParam("params", "elicitation needs both --sigma2 and --rho")
        alpha, alpha0 = elicitation.solve_hcrv_params(args.sigma2, args.rho)
        return ModelParams(alpha=alpha, alpha0=alpha0, base_measure=base)
    alpha = args.alpha if args.alpha is not None else 1.0
    alpha0 = args.alpha0 if args.alpha0 is not None else 1.0
    return ModelParams(alpha=alpha, alpha0=alpha0, b=args.b, b0=args.b0,
                       base_measure=base)


def run_sampler(dataset, params, sampler, draws, burnin, thin, seed, trunc_l):
    """Run one sampler; returns chains, weights, acceptance, and timings.

    Setup covers plan building / state initialization / burn-in; the
    sampling phase is timed separately so benchmark records can exclude
    setup per the reporting convention.
    """
    if sampler not in SAMPLERS:
        raise InvalidParam("sampler", f"unknown sampler {sampler!r}")
    rng = stream(seed, "fit", sampler)
    wall0 = time.perf_counter()
    cpu0 = time.process_time()
    result = {"sampler": sampler, "draws": draws, "burnin": burnin, "thin": thin}

    if sampler in ("mh", "mhlog"):
        cfg = mcmc.ProposalConfig("gamma" if sampler == "mh" else "log-walk")
        state = mcmc.init_state(dataset, params, rng)
        for _ in range(burnin):
            mcmc.gibbs_sweep(state, cfg, dataset, params, rng)
        wall1, cpu1 = time.perf_counter(), time.process_time()
        out = mcmc.run_chain(dataset, params, cfg, draws=draws, burnin=0,
                             thin=thin, rng=rng, state=state)
        wall2, cpu2 = time.perf_counter(), time.process_time()
        result.update(
            scalar=out.alpha_t, lam=out.lam, alpha_j0=out.alpha_j0,
            acceptance={k: out.tracker.rate(k) for k in out.tracker.proposed},
            latents=[exact.LatentDraw(out.alpha_t[s], out.u[s], out.lam[s],
                                      out.alpha_j0[s], out.jumps[s])
                     for s in range(draws)],
        )
    elif sampler in ("exact", "ars"):
        plan = exact.build_plan(dataset, params)
        wall1, cpu1 = time.perf_counter(), time.process_time()
        latents = []
        envelope = None
        for _ in range(draws):
            if sampler == "ars":
                draw, envelope = exact.exact_draw(dataset=dataset, params=params,
                                                  plan=plan, rng=rng,
                                                  method="ars", envelope=envelope)
            else:
                draw = exact.exact_draw(plan, dataset, params, rng)
            latents.append(draw)
        wall2, cpu2 = time.perf_counter(), time.process_time()
        key = "ars" if sampler == "ars" else "alpha_t"
        result.update(
            scalar=np.array([d.alpha_t for d in latents]),
            lam=np.array([d.lam for d in latents]),
            alpha_j0=np.array([d.alpha_j0 for d in latents]),
            acceptance={key: plan.tracker.rate(key)},
            plan=plan, latents=latents,
        )
    else:
        mode = "gamma" if sampler == "hdppr" else "fixed"
        state = hdp.FranchiseState.init(dataset, params, mode=mode, rng=rng)
        for _ in range(burnin):
            hdp.crf_gibbs_sweep(state, rng)
            if mode == "gamma":
                hdp.resample_concentration(state, rng)
        wall1, cpu1 = time.perf_counter(), time.process_time()
        out = hdp.run_franchise(dataset, params, draws=draws, burnin=0,
                                thin=thin, rng=rng, L=trunc_l, state=state)
        wall2, cpu2 = time.perf_counter(), time.process_time()
        # in fixed mode the concentration is constant, so the table count
        # serves as the designated scalar chain instead
        scalar = (out.concentration if mode == "gamma"
                  else out.tables_total.astype(float))
        result.update(
            scalar=scalar, tables_total=out.tables_total,
            acceptance={}, franchise=out,
        )
    result["timing"] = {
        "setup_seconds": wall1 - wall0,
        "sampling_seconds": wall2 - wall1,
        "total_seconds": wall2 - wall0,
        "setup_cpu_seconds": cpu1 - cpu0,
        "sampling_cpu_seconds": cpu2 - cpu1,
    }
    return result


def _weight_rows(result, dataset, params, seed, trunc_l):
    """Yield (draw, group, w_1..w_k, residual_sum) rows for weights.csv."""
    rng = stream(seed, "weights", result["sampler"])
    if "franchise" in result:
        out = result["franchise"]
        for s in range(out.fixed_weights.shape[0]):
            for i in range(dataset.d):
                yield ([s, i] + [f"{w:.10g}" for w in out.fixed_weights[s, i]]
                       + [f"{out.residual_weights[s, i].sum():.10g}"])
        return
    for s, draw in enumerate(result["latents"]):
        atoms = measures.materialize_atoms(draw, dataset, params, rng, L=trunc_l)
        weights = measures.normalized_weights(atoms, dataset, rng)
        for i in range(dataset.d):
            yield ([s, i] + [f"{w:.10g}" for w in weights.fixed[i]]
                   + [f"{weights.residual[i].sum():.10g}"])


def cmd_simulate(args):
    rng = stream(args.seed, "simulate", args.generator)
    if args.generator == "poisson-groups":
        means = _parse_float_list(args.means)
        sizes = [int(s) for s in _parse_float_list(args.sizes)]
        groups = simulate.poisson_groups(means, sizes, rng)
    elif args.generator == "hdp-crf":
        groups = simulate.hdp_crf_groups(args.d, args.n, args.alpha or 5.0,
                                         args.alpha0 or 3.0, rng)
    else:
        raise InvalidParam("generator", f"unknown generator {args.generator!r}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "dataset.json"
    save_dataset(groups, path)
    dataset = ingest_groups(groups)
    meta = {"path": str(path), "d": dataset.d, "k": dataset.k, "n": dataset.n}
    print(json.dumps(meta))
    return 0


def cmd_fit(args):
    dataset = load_dataset(args.data)
    params = _params_from_args(args)
    validate_params(params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        result = run_sampler(dataset, params, args.sampler, args.draws,
                             args.burnin, args.thin, args.seed, args.trunc_L)
        scalar = result["scalar"]
        if "alpha_j0" in result:
            cols = (["draw", "scalar", "lam"]
                    + [f"aj0_{j}" for j in range(dataset.k)])
            rows = [[s, f"{scalar[s]:.10g}", f"{result['lam'][s]:.10g}"]
                    + [f"{v:.10g}" for v in result["alpha_j0"][s]]
                    for s in range(args.draws)]
        else:
            cols = ["draw", "scalar", "tables_total"]
            rows = [[s, f"{scalar[s]:.10g}", int(result["tables_total"][s])]
                    for s in range(args.draws)]
        _write_csv(out / "chain.csv", cols, rows)
        wcols = (["draw", "group"] + [f"w_{j}" for j in range(dataset.k)]
                 + ["residual"])
        _write_csv(out / "weights.csv", wcols,
                   _weight_rows(result, dataset, params, args.seed, args.trunc_L))
        x = np.asarray(scalar)
        xc = x - x.mean()
        lag1 = float(np.dot(xc[:-1], xc[1:]) / np.dot(xc, xc)) if x.size > 2 else 0.0
        diag = {
            "sampler": args.sampler, "seed": args.seed, "draws": args.draws,
            "burnin": args.burnin, "thin": args.thin,
            "d": dataset.d, "k": dataset.k,
            "ess_scalar": ess(scalar), "lag1_autocorr": lag1,
            "acceptance": result["acceptance"], "runtime": result["timing"],
        }
        with open(out / "diag.json", "w") as f:
            json.dump(diag, f, indent=2)
        print(json.dumps({"out": str(out), "ess_scalar": diag["ess_scalar"]}))
        return 0
    except Exception as e:
        with open(out / "FAILED", "w") as f:
            f.write(f"{type(e).__name__}: {e}\n")
        raise


def default_bench_grid():
    return {
        "cells": (
            [{"d": d, "n": 10} for d in (2, 4)]
            + [{"d": 4, "n": n} for n in (10, 40)]
            + [{"d": 5, "n": 12, "alpha0_gen": a0} for a0 in (2.0, 4.0)]
        ),
        "samplers": ["mhlog", "hdppr"],
        "replicates": 10,
        "draws": 300,
        "burnin": 100,
        "thin": 2,
    }


def cmd_bench(args):
    grid = default_bench_grid()
    if args.config:
        with open(args.config) as f:
            grid.update(json.load(f))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, errors = [], []
    for ci, cell in enumerate(grid["cells"]):
        for rep in range(grid["replicates"]):
            rng = stream(args.seed, "bench", ci, rep)
            groups = simulate.hdp_crf_groups(
                cell["d"], cell["n"], cell.get("alpha_gen", 5.0),
                cell.get("alpha0_gen", 3.0), rng)
            dataset = ingest_groups(groups)
            params = ModelParams(alpha=1.0, alpha0=1.0)
            for sampler in grid["samplers"]:
                try:
                    res = run_sampler(dataset, params, sampler, grid["draws"],
                                      grid["burnin"], grid["thin"],
                                      args.seed + 1000 * ci + rep, args.trunc_L)
                    n_eff = ess(res["scalar"])
                    cpu = res["timing"]["sampling_cpu_seconds"]
                    rows.append([
                        ci, sampler, cell["d"], cell["n"], dataset.k, rep,
                        f"{res['timing']['setup_cpu_seconds']:.6g}",
                        f"{cpu:.6g}", f"{n_eff:.6g}", f"{cpu / n_eff:.6g}",
                    ])
                except HcrvError as e:
                    errors.append({"cell": ci, "sampler": sampler,
                                   "replicate": rep, "error": str(e)})
    cols = ["cell", "sampler", "d", "n", "k", "replicate",
            "setup_cpu_seconds", "cpu_seconds", "ess", "cpu_per_ess"]
    _write_csv(out / "bench.csv", cols, rows)
    summary = {}
    for row in rows:
        key = f"cell{row[0]}:{row[1]}"
        summary.setdefault(key, []).append(float(row[9]))
    medians = {k: float(np.median(v)) for k, v in summary.items()}
    with open(out / "bench_summary.json", "w") as f:
        json.dump({"median_cpu_per_ess": medians, "errors": errors}, f, indent=2)
    print(json.dumps({"out": str(out), "records": len(rows),
                      "failures": len(errors)}))
    return 0


def cmd_elicit(args):
    sigma2 = _parse_float_list(args.sigma2)
    rho = _parse_float_list(args.rho)
    rows = [[f"{s2:.10g}", f"{r:.10g}", f"{a:.10g}", f"{a0:.10g}", model]
            for (s2, r, a, a0, model) in elicitation.elicitation_grid(sigma2, rho)]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "grid.csv", ["sigma2", "rho", "alpha", "alpha0", "model"],
               rows)
    print(json.dumps({"out": str(out / 'grid.csv'), "rows": len(rows)}))
    return 0


def cmd_moments(args):
    fn = elicitation.hcrv_moments if args.model == "hcrv" else elicitation.hdp_moments
    rep = fn(args.alpha, args.alpha0, args.p0a)
    print(json.dumps({k: v for k, v in rep.__dict__.items() if v is not None}))
    return 0


def cmd_diag(args):
    _, rows = read_schema_csv(args.chain)
    scalar = np.array([float(r["scalar"]) for r in rows])
    xc = scalar - scalar.mean()
    lag1 = float(np.dot(xc[:-1], xc[1:]) / np.dot(xc, xc))
    print(json.dumps({"n": scalar.size, "ess": ess(scalar),
                      "lag1_autocorr": lag1}))
    return 0


def _apply_config_overrides(args):
    if getattr(args, "config", None) and args.command != "bench":
        with open(args.config) as f:
            overrides = json.load(f)
        for key, value in overrides.items():
            setattr(args, key.replace("-", "_"), value)
    return args


def build_parser():
    parser = argparse.ArgumentParser(prog="hcrv")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="hcrv-out")
        p.add_argument("--config", default=None,
                       help="JSON file whose keys override flags")

    p = sub.add_parser("simulate", help="generate a grouped dataset")
    common(p)
    p.add_argument("--generator", default="poisson-groups",
                   choices=["poisson-groups", "hdp-crf"])
    p.add_argument("--means", default="2,3,4")
    p.add_argument("--sizes", default="10,10,10")
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--alpha0", type=float, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="posterior sampling on a dataset")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--sampler", default="mhlog", choices=list(SAMPLERS))
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--burnin", type=int, default=100)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--trunc-L", type=int, default=100)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--alpha0", type=float, default=None)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--b0", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--p0", default="normal:0,1")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bench", help="CPU-per-effective-sample grid")
    common(p)
    p.add_argument("--trunc-L", type=int, default=50)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("elicit", help="parameter grid from (sigma2, rho)")
    common(p)
    p.add_argument("--sigma2", default="0.1,0.3,0.5,0.7,0.9")
    p.add_argument("--rho", default="0.1,0.3,0.5,0.7,0.9")
    p.set_defaults(func=cmd_elicit)

    p = sub.add_parser("moments", help="closed-form prior moments")
    p.add_argument("--model", default="hcrv", choices=["hcrv", "hdp"])
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--alpha0", type=float, required=True)
    p.add_argument("--p0a", type=float, default=0.5)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("diag", help="diagnostics for a saved chain")
    p.add_argument("--chain", required=True)
    p.set_defaults(func=cmd_diag)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config_overrides(args)
    try:
        return args.func(args)
    except HcrvError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
