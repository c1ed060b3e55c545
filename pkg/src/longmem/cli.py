"""Command-line interface.

Subcommands:

* ``simulate``   -- draw a benchmark/synthetic series and write it out
* ``estimate``   -- run an estimator on a stored series, print a JSON report
* ``montecarlo`` -- reproduce the benchmark tables from a JSON config
* ``gamma``      -- tabulate the asymptotic slope variance over (d, ell)

Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from ._validation import LongmemError
from .estimation import WaveletMemoryEstimator
from .montecarlo import (
    BENCHMARK_PROCESSES,
    McConfig,
    emit_table,
    quick_profile,
    run_montecarlo,
)
from .spectral import fexp_estimate, local_whittle
from .synthesis import (
    ProcessModel,
    generate,
    load_series,
    save_series_binary,
    save_series_csv,
)
from .wavelet import gamma_matrix, sigma2_d

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="longmem",
        description="Adaptive wavelet estimation of the long-memory parameter",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic series")
    sim.add_argument("--process", required=True,
                     help="fgn | farima | spectral | garma | mfarima, or a "
                          "benchmark id such as X2 or TREND")
    sim.add_argument("--n", type=int, required=True, help="series length")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--d", type=float, default=None, help="memory parameter")
    sim.add_argument("--hurst", type=float, default=None, help="fGn Hurst index")
    sim.add_argument("--dprime", type=float, default=None, help="second-order exponent")
    sim.add_argument("--ar", type=float, nargs="*", default=[], help="AR coefficients")
    sim.add_argument("--ma", type=float, nargs="*", default=[], help="MA coefficients")
    sim.add_argument("--innovation", default="gaussian",
                     choices=["gaussian", "uniform", "burr", "cauchy"])
    sim.add_argument("--d1", type=float, default=0.1, help="mfarima first-half d")
    sim.add_argument("--d2", type=float, default=0.4, help="mfarima second-half d")
    sim.add_argument("--trend", action="store_true", help="add the linear trend 1-2t/n")
    sim.add_argument("--seasonal", action="store_true", help="add sin(pi t/6)")
    sim.add_argument("--format", choices=["csv", "bin"], default="csv")
    sim.add_argument("--output", required=True)

    est = sub.add_parser("estimate", help="estimate d from a stored series")
    est.add_argument("--input", required=True, help="CSV or binary series file")
    est.add_argument("--estimator", choices=["wavelet", "lw", "fexp"], default="wavelet")
    est.add_argument("--m", type=int, default=None, help="local Whittle bandwidth (default N/30)")
    est.add_argument("--kappa", type=float, default=2.0, help="FEXP penalty constant")
    est.add_argument("--ell2-cap", type=int, default=None,
                     help="cap on stage-2 regression scales (default uncapped)")
    est.add_argument("--gamma-step", type=float, default=None,
                     help="covariance interpolation grid step (default exact)")
    est.add_argument("--output", default=None, help="write the JSON report here instead of stdout")
    est.add_argument("--emit-variogram", default=None, metavar="CSV",
                     help="write the stage-2 (log a, log T) points for plotting")

    mc = sub.add_parser("montecarlo", help="run the benchmark table reproduction")
    mc.add_argument("--config", default=None, help="McConfig JSON file (default: paper grid)")
    mc.add_argument("--quick", action="store_true", help="25 replications, N=1000 only")
    mc.add_argument("--only", default=None, help="comma-separated process ids, e.g. X1,X2")
    mc.add_argument("--threads", type=int, default=_default_threads(), metavar="K",
                    help="worker processes (env LONGMEM_THREADS, default all cores)")
    mc.add_argument("--output-dir", default="runs", help="parent of the run directory")
    mc.add_argument("--verbose", action="store_true")

    gam = sub.add_parser("gamma", help="tabulate sigma^2_d(ell) for plotting")
    gam.add_argument("--d-grid", default="0:0.45:0.05", metavar="LO:HI:STEP")
    gam.add_argument("--ell-list", default="10,20,50,100,200,500")
    gam.add_argument("--output", required=True)
    return parser


def _default_threads() -> int | None:
    value = os.environ.get("LONGMEM_THREADS")
    return int(value) if value else None


def _model_from_args(args) -> ProcessModel:
    name = args.process
    if name.upper() in BENCHMARK_PROCESSES:
        if name.upper() == "MFARIMA":
            return ProcessModel.mfarima(args.d1, args.d2)
        if args.d is None:
            raise ValueError(f"benchmark process {name} needs --d")
        return BENCHMARK_PROCESSES[name.upper()](args.d)
    kind = name.lower()
    if kind == "fgn":
        hurst = args.hurst if args.hurst is not None else (
            args.d + 0.5 if args.d is not None else None)
        if hurst is None:
            raise ValueError("fgn needs --hurst or --d")
        model = ProcessModel.fgn(hurst)
    elif kind == "farima":
        if args.d is None:
            raise ValueError("farima needs --d")
        model = ProcessModel.farima(args.d, ar=args.ar, ma=args.ma,
                                    innovation=args.innovation)
    elif kind == "spectral":
        if args.d is None:
            raise ValueError("spectral needs --d (and --dprime)")
        model = ProcessModel.spectral("power_law", d=args.d,
                                      dprime=args.dprime if args.dprime is not None else 1.0)
    elif kind == "garma":
        if args.d is None:
            raise ValueError("garma needs --d")
        model = ProcessModel.spectral("shifted_singularity", d=args.d)
    elif kind == "mfarima":
        model = ProcessModel.mfarima(args.d1, args.d2)
    else:
        raise ValueError(f"unknown process {name!r}")
    if args.trend or args.seasonal:
        model = model.contaminated(trend=args.trend, seasonal=args.seasonal)
    return model


def cmd_simulate(args) -> int:
    model = _model_from_args(args)
    ts = generate(model, args.n, args.seed)
    if args.format == "csv":
        save_series_csv(args.output, ts.values)
    else:
        save_series_binary(args.output, ts.values)
    print(f"wrote {ts.n} values to {args.output}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    x = load_series(args.input)
    if x.size < 500:
        raise LongmemError(f"series too short for the adaptive pipeline: {x.size} < 500")
    if args.estimator == "wavelet":
        est = WaveletMemoryEstimator(ell2_cap=args.ell2_cap, gamma_step=args.gamma_step).fit(x)
        payload = est.report_.to_dict()
        payload["estimator"] = "wavelet_pgls"
        if args.emit_variogram:
            with open(args.emit_variogram, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["log_scale", "log_t"])
                for a, lt in zip(est.report_.scales, est.report_.log_t_values):
                    writer.writerow([repr(float(np.log(a))), repr(float(lt))])
    elif args.estimator == "lw":
        payload = {"estimator": "local_whittle",
                   "d": local_whittle(x, m=args.m),
                   "m": args.m if args.m is not None else x.size // 30}
    else:
        fit = fexp_estimate(x, kappa=args.kappa)
        payload = {"estimator": "fexp", "d": fit.d, "order": fit.order,
                   "kappa": args.kappa}
    text = json.dumps(payload, indent=1)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    config = McConfig.from_json(args.config) if args.config else McConfig()
    if args.quick:
        config = quick_profile(config)
    if args.only:
        config = config.restrict([p.strip() for p in args.only.split(",") if p.strip()])
    run_dir = os.path.join(
        args.output_dir,
        time.strftime("%Y%m%d-%H%M%S") + "-" + config.config_hash(),
    )
    summary = run_montecarlo(config, threads=args.threads, verbose=args.verbose)
    paths = emit_table(summary, run_dir)
    print(f"run directory: {run_dir}")
    for kind, path in paths.items():
        print(f"  {kind}: {path}")
    return EXIT_OK


def _parse_grid(spec: str) -> np.ndarray:
    lo, hi, step = (float(p) for p in spec.split(":"))
    count = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(count), 10)


def cmd_gamma(args) -> int:
    d_grid = _parse_grid(args.d_grid)
    if np.any(d_grid >= 0.5):
        raise LongmemError("sigma^2_d is defined for d < 0.5 only")
    ells = [int(p) for p in args.ell_list.split(",")]
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["d", "ell", "sigma2"])
        for d in d_grid:
            cov = gamma_matrix(float(d), max(ells))
            for ell in ells:
                sub = cov.submodel(tuple(range(1, ell + 1)))
                writer.writerow([d, ell, repr(sigma2_d(sub))])
    print(f"wrote {len(d_grid) * len(ells)} rows to {args.output}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "estimate": cmd_estimate,
        "montecarlo": cmd_montecarlo,
        "gamma": cmd_gamma,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, LongmemError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if not isinstance(exc, ValueError) else EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
