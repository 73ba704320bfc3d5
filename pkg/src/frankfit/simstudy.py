"""Monte Carlo study of the three estimators.

For each cell (n, theta, L), replication l draws a sample from stream l of
the cell's base seed.  All three estimators run on that same sample.  Errors
e = theta_hat - theta are aggregated in replication order with compensated
summation, so results do not depend on how work is split across processes.

A cell with theta < 0 draws the samples of the |theta| cell and reflects
them (u2 -> 1 - u2).  Biases at -theta and theta are then exact negatives
of each other, up to rounding in the reflection.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .copula import theta_value
from .estimators import Method, mle_batch, mme_rho_batch, mme_tau_batch
from .sampler import SeedSpec, sample_arrays

CHUNK = 1000

METRICS_HEADER = (
    "n,theta,L,bias_ml,bias_mm1,bias_mm2,mse_ml,mse_mm1,mse_mm2,"
    "rbias_ml,rbias_mm1,rbias_mm2,rmse_ml,rmse_mm1,rmse_mm2,"
    "se_bias_ml,se_bias_mm1,se_bias_mm2,se_mse_ml,se_mse_mm1,se_mse_mm2,"
    "failures_ml,failures_mm1,failures_mm2"
).split(",")
RD_HEADER = ["n", "theta", "m_star", "inv_i", "rd"]

GRID_N = (5, 10, 15, 20, 25, 50, 75, 100)
GRID_THETA = (0.1, 0.5, 0.75, 1, 1.5, 2, 3, 4, 5, 6, 7, 8, 9, 10)

_BATCH = {Method.ML: mle_batch, Method.MM1: mme_tau_batch, Method.MM2: mme_rho_batch}


@dataclass(frozen=True)
class SimulationCell:
    n: int
    theta: float
    replications: int = 20_000
    seed: SeedSpec = field(default_factory=lambda: SeedSpec(0))

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        object.__setattr__(self, "theta", theta_value(self.theta))
        if isinstance(self.seed, int):
            object.__setattr__(self, "seed", SeedSpec(self.seed))


@dataclass(frozen=True)
class EstimatorMetrics:
    bias: float
    mse: float
    rbias: float
    rmse: float
    se_bias: float
    se_mse: float
    failures: int


@dataclass(frozen=True)
class MetricsRow:
    n: int
    theta: float
    L: int
    metrics: dict

    def __getitem__(self, method) -> EstimatorMetrics:
        return self.metrics[Method(method)]

    @property
    def failure_count(self) -> int:
        return sum(m.failures for m in self.metrics.values())

    def csv_row(self) -> list[str]:
        ms = [self.metrics[m] for m in Method]
        out = [str(self.n), f"{self.theta:.17g}", str(self.L)]
        for attr in ("bias", "mse", "rbias", "rmse", "se_bias", "se_mse"):
            out += [f"{getattr(m, attr):.17g}" for m in ms]
        out += [str(m.failures) for m in ms]
        return out


@dataclass
class CellEstimates:
    """Per-replication estimates and failure masks, ordered by replication."""

    theta_hat: dict
    failed: dict
    residual: dict


def _chunk_estimates(args):
    n, theta, base_seed, start, stop = args
    u1, u2 = sample_arrays(abs(theta), n, base_seed, range(start, stop))
    if theta < 0:
        u2 = 1.0 - u2
    out = {}
    for m, fn in _BATCH.items():
        b = fn(u1, u2)
        out[m] = (b.theta_hat, b.failed, b.residual)
    return out


def _tasks(cell: SimulationCell):
    L = cell.replications
    return [
        (cell.n, cell.theta, cell.seed.base_seed, s, min(s + CHUNK, L))
        for s in range(0, L, CHUNK)
    ]


def _merge(parts) -> CellEstimates:
    th, fl, rs = {}, {}, {}
    for m in Method:
        th[m] = np.concatenate([p[m][0] for p in parts])
        fl[m] = np.concatenate([p[m][1] for p in parts])
        rs[m] = np.concatenate([p[m][2] for p in parts])
    return CellEstimates(th, fl, rs)


def cell_estimates(cell: SimulationCell) -> CellEstimates:
    return _merge([_chunk_estimates(t) for t in _tasks(cell)])


def _aggregate(e: np.ndarray, theta: float) -> tuple:
    L = e.size
    if L == 0:
        nan = float("nan")
        return nan, nan, nan, nan
    bias = math.fsum(e) / L
    sq = e * e
    mse = math.fsum(sq) / L
    se_bias = math.sqrt(max(mse - bias * bias, 0.0) / L)
    if L > 1:
        sq_mean = mse
        var_sq = math.fsum((sq - sq_mean) ** 2) / (L - 1)
        se_mse = math.sqrt(var_sq / L)
    else:
        se_mse = float("nan")
    return bias, mse, se_bias, se_mse


def summarize(cell: SimulationCell, est: CellEstimates) -> MetricsRow:
    metrics = {}
    theta = cell.theta
    for m in Method:
        ok = ~est.failed[m]
        e = est.theta_hat[m][ok] - theta
        bias, mse, se_bias, se_mse = _aggregate(e, theta)
        if theta != 0:
            rbias, rmse = bias / abs(theta), mse / theta**2
        else:
            rbias = rmse = float("nan")
        metrics[m] = EstimatorMetrics(bias, mse, rbias, rmse, se_bias, se_mse, int((~ok).sum()))
    return MetricsRow(cell.n, theta, cell.replications, metrics)


def run_cell(cell: SimulationCell) -> MetricsRow:
    return summarize(cell, cell_estimates(cell))


def run_grid(cells, parallelism: int = 1) -> list[MetricsRow]:
    """Run every cell; output is identical for every ``parallelism``."""
    cells = list(cells)
    if not cells:
        raise ValueError("cells must be non-empty")
    tasks, owner = [], []
    for i, c in enumerate(cells):
        for t in _tasks(c):
            tasks.append(t)
            owner.append(i)
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_chunk_estimates, tasks))
    else:
        results = [_chunk_estimates(t) for t in tasks]
    rows = []
    for i, c in enumerate(cells):
        parts = [r for r, o in zip(results, owner) if o == i]
        rows.append(summarize(c, _merge(parts)))
    return rows


def m_star(row: MetricsRow) -> float:
    """n times the simulated MSE of the maximum likelihood estimator."""
    return row.n * row[Method.ML].mse


def relative_difference(row: MetricsRow, inv_i: float) -> float:
    ms = m_star(row)
    if not ms > 0:
        raise ValueError("m_star must be positive")
    return (ms - inv_i) / ms


def standard_grid(replications: int, seed: SeedSpec | int) -> list[SimulationCell]:
    """Cells for every (n, theta) in the standard 8 x 14 study layout."""
    return [SimulationCell(n, t, replications, seed) for n in GRID_N for t in GRID_THETA]


def _write(path, header, rows, header_lines):
    with open(Path(path), "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_metrics_csv(rows, path, header_lines=()) -> None:
    _write(path, METRICS_HEADER, [r.csv_row() for r in rows], header_lines)


def rd_rows(rows, inv_i_fn) -> list[list[str]]:
    out = []
    for r in rows:
        inv_i = inv_i_fn(r.theta)
        out.append([str(r.n), f"{r.theta:.17g}", f"{m_star(r):.17g}", f"{inv_i:.17g}",
                    f"{relative_difference(r, inv_i):.17g}"])
    return out


def write_rd_csv(rows, path, inv_i_fn, header_lines=()) -> None:
    _write(path, RD_HEADER, rd_rows(rows, inv_i_fn), header_lines)
