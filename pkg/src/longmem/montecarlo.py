"""Seeded, parallel Monte-Carlo reproduction of the benchmark tables.

A configuration spans processes x d values x lengths; every cell draws
``replications`` independent paths (one derived seed stream each), runs
the enabled estimators, and aggregates root-mean-square errors and the
acceptance frequency of the goodness-of-fit test at the configured level.
Identical configurations reproduce identical summaries regardless of the
worker count: results are gathered per replication index and reduced in a
fixed order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import LongmemError
from .estimation import WaveletMemoryEstimator, chi2_quantile
from .spectral import fexp_estimate, local_whittle
from .synthesis import ProcessModel, generate

__all__ = [
    "McConfig",
    "CellResult",
    "McSummary",
    "BENCHMARK_PROCESSES",
    "ESTIMATORS",
    "build_cells",
    "run_cell",
    "run_montecarlo",
    "emit_table",
    "quick_profile",
]

# Benchmark identifiers -> process factory at memory parameter d.
# MFARIMA ignores d (fixed change-point pair), flagged by D_FREE below.
BENCHMARK_PROCESSES = {
    "X1": lambda d: ProcessModel.fgn(d + 0.5),
    "X2": lambda d: ProcessModel.farima(d),
    "X3": lambda d: ProcessModel.farima(d, innovation="uniform"),
    "X4": lambda d: ProcessModel.farima(d, innovation="burr"),
    "X5": lambda d: ProcessModel.farima(d, innovation="cauchy"),
    "X6": lambda d: ProcessModel.farima(d, ar=(0.7,), ma=(-0.3,)),
    "X7": lambda d: ProcessModel.farima(d, ar=(0.7,), ma=(-0.3,), innovation="uniform"),
    "X8": lambda d: ProcessModel.spectral("power_law", d=d, dprime=1.0),
    "GARMA": lambda d: ProcessModel.spectral("shifted_singularity", d=d),
    "TREND": lambda d: ProcessModel.farima(d).contaminated(trend=True),
    "TREND_SEASON": lambda d: ProcessModel.farima(d).contaminated(trend=True, seasonal=True),
    "MFARIMA": lambda d: ProcessModel.mfarima(0.1, 0.4),
}

#: processes whose definition does not involve the d grid
D_FREE = {"MFARIMA"}

ESTIMATOR_NAMES = ("wavelet_pgls", "local_whittle", "fexp")


@dataclass(frozen=True)
class McConfig:
    """Monte-Carlo experiment layout; the paper grid is the default."""

    processes: tuple = ("X1", "X2", "X3", "X4", "X5", "X6", "X7", "X8")
    d_values: tuple = (0.0, 0.1, 0.2, 0.3, 0.4)
    n_values: tuple = (1_000, 10_000)
    replications: int = 100
    base_seed: int = 20080501
    estimators: tuple = ("wavelet_pgls", "local_whittle", "fexp")
    level: float = 0.95
    ell2_cap: int | None = 50
    gamma_step: float | None = 0.01
    eig_floor: float = 1e-2

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie in (0, 1)")
        unknown = set(self.processes) - set(BENCHMARK_PROCESSES)
        if unknown:
            raise ValueError(f"unknown process ids: {sorted(unknown)}")
        unknown = set(self.estimators) - set(ESTIMATOR_NAMES)
        if unknown:
            raise ValueError(f"unknown estimators: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "McConfig":
        kwargs = dict(data)
        for key in ("processes", "d_values", "n_values", "estimators"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "McConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]

    def restrict(self, processes=None) -> "McConfig":
        if processes is None:
            return self
        return dataclasses.replace(self, processes=tuple(processes))


def quick_profile(config: McConfig | None = None) -> McConfig:
    """CI profile: 25 replications, N = 1000 only."""
    base = config or McConfig()
    return dataclasses.replace(base, replications=25, n_values=(1_000,))


# ---------------------------------------------------------------------------
# one replication (top level so worker processes can pickle it)
# ---------------------------------------------------------------------------

def _cell_key(process: str, d, n: int) -> int:
    digest = hashlib.sha256(f"{process}|{d}|{n}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _run_replication(task):
    model, n, seed_entropy, estimators, options = task
    ts = generate(model, n, list(seed_entropy))
    out: dict = {}
    for name in estimators:
        try:
            if name == "wavelet_pgls":
                est = WaveletMemoryEstimator(
                    ell2_cap=options["ell2_cap"],
                    gamma_step=options["gamma_step"],
                    eig_floor=options["eig_floor"],
                ).fit(ts.values)
                out[name] = est.d_
                out["gof_stat"] = est.gof_stat_
                out["gof_dof"] = est.gof_dof_
                out["ci_lo"], out["ci_hi"] = est.conf_int_
            elif name == "local_whittle":
                out[name] = local_whittle(ts.values)
            elif name == "fexp":
                out[name] = fexp_estimate(ts.values).d
        except (LongmemError, np.linalg.LinAlgError, ValueError):
            out[name] = math.nan
    return out


@dataclass
class CellResult:
    """Aggregate of one (process, d, N) cell."""

    process: str
    d: float | None
    n: int
    estimates: dict = field(default_factory=dict)  # name -> array over reps
    gof_stats: np.ndarray | None = None
    gof_dofs: np.ndarray | None = None
    ci_lo: np.ndarray | None = None
    ci_hi: np.ndarray | None = None
    elapsed: float = 0.0
    level: float = 0.95

    @property
    def replications(self) -> int:
        first = next(iter(self.estimates.values()))
        return first.size

    def failures(self, estimator: str) -> int:
        return int(np.isnan(self.estimates[estimator]).sum())

    def valid(self, estimator: str) -> bool:
        return self.failures(estimator) <= self.replications // 2

    def errors(self, estimator: str) -> np.ndarray:
        if self.d is None:
            raise ValueError(f"{self.process} has no reference d for errors")
        values = self.estimates[estimator]
        return values[~np.isnan(values)] - self.d

    def rmse(self, estimator: str) -> float:
        if self.d is None or not self.valid(estimator):
            return math.nan
        err = self.errors(estimator)
        return float(np.sqrt(np.mean(err**2)))

    def mean(self, estimator: str) -> float:
        values = self.estimates[estimator]
        good = values[~np.isnan(values)]
        return float(good.mean()) if good.size else math.nan

    def std(self, estimator: str) -> float:
        values = self.estimates[estimator]
        good = values[~np.isnan(values)]
        return float(good.std(ddof=1)) if good.size > 1 else math.nan

    def p_tilde(self) -> float:
        """Acceptance frequency of the goodness-of-fit test at ``level``."""
        if self.gof_stats is None:
            return math.nan
        ok = ~np.isnan(self.gof_stats)
        if not ok.any():
            return math.nan
        stats = self.gof_stats[ok]
        dofs = self.gof_dofs[ok].astype(int)
        accepted = [s < chi2_quantile(self.level, k) for s, k in zip(stats, dofs)]
        return float(np.mean(accepted))

    def ci_coverage(self) -> float:
        """Fraction of replications whose interval covers the true d."""
        if self.d is None or self.ci_lo is None:
            return math.nan
        ok = ~np.isnan(self.ci_lo)
        if not ok.any():
            return math.nan
        inside = (self.ci_lo[ok] <= self.d) & (self.d <= self.ci_hi[ok])
        return float(inside.mean())


def build_cells(config: McConfig):
    """Cell grid in a stable order: process, then d, then n."""
    cells = []
    for process in config.processes:
        d_list = [None] if process in D_FREE else list(config.d_values)
        for d in d_list:
            for n in config.n_values:
                cells.append((process, d, n))
    return cells


def run_cell(config: McConfig, process: str, d, n: int, executor=None) -> CellResult:
    """Run one cell; per-replication failures are recorded, not fatal."""
    model = BENCHMARK_PROCESSES[process](d if d is not None else 0.0)
    key = _cell_key(process, d, n)
    options = {
        "ell2_cap": config.ell2_cap,
        "gamma_step": config.gamma_step,
        "eig_floor": config.eig_floor,
    }
    tasks = [
        (model, n, (config.base_seed, key, rep), config.estimators, options)
        for rep in range(config.replications)
    ]
    start = time.perf_counter()
    if executor is None:
        results = [_run_replication(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (8 * getattr(executor, "_max_workers", 1)))
        results = list(executor.map(_run_replication, tasks, chunksize=chunk))
    elapsed = time.perf_counter() - start

    cell = CellResult(process=process, d=d, n=n, elapsed=elapsed, level=config.level)
    for name in config.estimators:
        cell.estimates[name] = np.array([r.get(name, math.nan) for r in results])
    if "wavelet_pgls" in config.estimators:
        cell.gof_stats = np.array([r.get("gof_stat", math.nan) for r in results])
        cell.gof_dofs = np.array([r.get("gof_dof", 0) for r in results])
        cell.ci_lo = np.array([r.get("ci_lo", math.nan) for r in results])
        cell.ci_hi = np.array([r.get("ci_hi", math.nan) for r in results])
    return cell


@dataclass
class McSummary:
    """All cell results of one Monte-Carlo run."""

    config: McConfig
    cells: list

    def cell(self, process: str, d, n: int) -> CellResult:
        for c in self.cells:
            if c.process == process and c.n == n and (c.d == d or (c.d is None and d is None)):
                return c
        raise KeyError(f"no cell ({process}, {d}, {n})")

    def total_elapsed(self) -> float:
        return sum(c.elapsed for c in self.cells)


def run_montecarlo(config: McConfig, threads: int | None = None, verbose: bool = False) -> McSummary:
    """Execute the full grid; ``threads`` caps the worker processes."""
    cells = build_cells(config)
    results = []
    if threads is not None and threads <= 1:
        for process, d, n in cells:
            results.append(run_cell(config, process, d, n))
            if verbose:
                _print_cell(results[-1])
    else:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            for process, d, n in cells:
                results.append(run_cell(config, process, d, n, executor=executor))
                if verbose:
                    _print_cell(results[-1])
    return McSummary(config=config, cells=results)


def _print_cell(cell: CellResult) -> None:
    parts = [f"{cell.process} d={cell.d} N={cell.n}:"]
    for name in cell.estimates:
        parts.append(f"{name} rmse={cell.rmse(name):.4f}" if cell.d is not None
                     else f"{name} mean={cell.mean(name):.4f}")
    parts.append(f"p~={cell.p_tilde():.2f}")
    parts.append(f"[{cell.elapsed:.1f}s]")
    print("  ".join(parts))


# ---------------------------------------------------------------------------
# table emission
# ---------------------------------------------------------------------------

def _summary_rows(summary: McSummary):
    rows = []
    for cell in summary.cells:
        for name in summary.config.estimators:
            rows.append({
                "process": cell.process,
                "d": "" if cell.d is None else cell.d,
                "n": cell.n,
                "estimator": name,
                "rmse": "" if cell.d is None else _fmt(cell.rmse(name)),
                "mean": _fmt(cell.mean(name)),
                "std": _fmt(cell.std(name)),
                "p_tilde": _fmt(cell.p_tilde()) if name == "wavelet_pgls" else "",
                "failures": cell.failures(name),
                "valid": cell.valid(name),
                "elapsed_s": round(cell.elapsed, 3),
            })
    return rows


def _fmt(v: float) -> str:
    return "" if (isinstance(v, float) and math.isnan(v)) else f"{v:.6f}"


def emit_table(summary: McSummary, out_dir) -> dict:
    """Write summary.csv, summary.json and table.txt into ``out_dir``."""
    import csv
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "csv": os.path.join(out_dir, "summary.csv"),
        "json": os.path.join(out_dir, "summary.json"),
        "txt": os.path.join(out_dir, "table.txt"),
    }

    rows = _summary_rows(summary)
    headers = ["process", "d", "n", "estimator", "rmse", "mean", "std",
               "p_tilde", "failures", "valid", "elapsed_s"]
    with open(paths["csv"], "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=headers)
        writer.writeheader()
        writer.writerows(rows)

    detail = {
        "config": summary.config.to_dict(),
        "config_hash": summary.config.config_hash(),
        "cells": [
            {
                "process": c.process,
                "d": c.d,
                "n": c.n,
                "elapsed_s": c.elapsed,
                "estimates": {k: [None if math.isnan(v) else v for v in arr]
                              for k, arr in c.estimates.items()},
                "gof_stats": None if c.gof_stats is None
                else [None if math.isnan(v) else v for v in c.gof_stats],
                "gof_dofs": None if c.gof_dofs is None else [int(v) for v in c.gof_dofs],
            }
            for c in summary.cells
        ],
    }
    with open(paths["json"], "w") as fh:
        json.dump(detail, fh, indent=1)

    with open(paths["txt"], "w") as fh:
        fh.write(render_text_table(summary))
    return paths


def render_text_table(summary: McSummary) -> str:
    """Aligned text table grouped like the benchmark tables: one block per
    N, one row group per process, columns over d."""
    config = summary.config
    lines = []
    for n in config.n_values:
        lines.append(f"N = {n}")
        header = ["process", "metric"] + [
            (f"d={d}" if d is not None else "-") for d in config.d_values
        ]
        widths = [14, 22] + [10] * len(config.d_values)
        lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for process in config.processes:
            d_list = [None] if process in D_FREE else list(config.d_values)
            for name in config.estimators:
                label = "sqrtMSE " + name if process not in D_FREE else "mean " + name
                row = [process.ljust(widths[0]), label.ljust(widths[1])]
                for d in d_list:
                    try:
                        cell = summary.cell(process, d, n)
                    except KeyError:
                        row.append("".ljust(10))
                        continue
                    value = cell.rmse(name) if process not in D_FREE else cell.mean(name)
                    row.append(("-" if math.isnan(value) else f"{value:.3f}").ljust(10))
                lines.append("  ".join(row))
            if "wavelet_pgls" in config.estimators:
                row = [process.ljust(widths[0]), "p_tilde".ljust(widths[1])]
                for d in d_list:
                    try:
                        cell = summary.cell(process, d, n)
                        value = cell.p_tilde()
                    except KeyError:
                        value = math.nan
                    row.append(("-" if math.isnan(value) else f"{value:.2f}").ljust(10))
                lines.append("  ".join(row))
        lines.append("")
    return "\n".join(lines) + "\n"
