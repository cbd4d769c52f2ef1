"""Backward Simulation, Forward Continuation and a forward-coupled reference.

Backward Simulation draws the terminal count vector of a period first and
then places each coordinate's events as sorted i.i.d. uniforms over the
period.  Forward Continuation repeats this on ``[mT, (m+1)T)`` with an
independent terminal draw per period, so increments across periods are
independent and the joint law at every grid point ``mT`` is the ``m``-fold
convolution of the calibrated terminal law.

Random streams
--------------
Paths are generated in fixed blocks of :data:`BLOCK_SIZE`.  Within block ``b``
the terminal counts come from the Philox stream keyed ``(seed; b, 0)`` and the
arrival times of coordinate ``k`` from ``(seed; b, 1, k)``, so output depends
only on the seed and never on how blocks are scheduled across workers.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
import numpy as np

from .calibration import CalibratedModel, sample_joint

BLOCK_SIZE = 4096


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream addressed by ``seed`` and an integer key path."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class Path:
    """One sample path: sorted event times and per-period counts per coordinate."""

    arrivals: tuple[np.ndarray, ...]
    period_counts: np.ndarray   # (d, periods)
    horizon: float = 1.0        # period length T

    @property
    def d(self) -> int:
        return len(self.arrivals)

    def count_at(self, t: float) -> np.ndarray:
        return np.array([np.searchsorted(a, t, side="right") for a in self.arrivals])


@dataclass(frozen=True)
class SimulationConfig:
    model: CalibratedModel
    periods: int = 1
    paths: int = 1000
    seed: int = 0
    time_grid: tuple[float, ...] = ()

    def __post_init__(self):
        if self.periods < 1 or self.paths < 1:
            raise ValueError("periods and paths must be positive")
        grid = tuple(float(t) for t in self.time_grid)
        end = self.periods * self.model.horizon
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ValueError("time_grid must be sorted")
        if grid and (grid[0] < 0 or grid[-1] > end):
            raise ValueError(f"time_grid must lie within [0, {end}]")
        object.__setattr__(self, "time_grid", grid)


@dataclass(frozen=True)
class PathSet:
    """Event times of many paths stored flat per coordinate.

    ``counts[p, m, k]`` is the number of events of coordinate ``k`` in period
    ``m`` of path ``p``; ``times[k]`` lists coordinate ``k``'s events ordered by
    path, then time.
    """

    counts: np.ndarray
    times: tuple[np.ndarray, ...]
    horizon: float

    @property
    def n_paths(self) -> int:
        return self.counts.shape[0]

    @property
    def periods(self) -> int:
        return self.counts.shape[1]

    @property
    def d(self) -> int:
        return self.counts.shape[2]

    @property
    def end(self) -> float:
        return self.periods * self.horizon

    @cached_property
    def _path_ids(self) -> tuple[np.ndarray, ...]:
        totals = self.counts.sum(axis=1)
        return tuple(np.repeat(np.arange(self.n_paths), totals[:, k]) for k in range(self.d))

    @cached_property
    def _offsets(self) -> np.ndarray:
        totals = self.counts.sum(axis=1)
        return np.vstack([np.zeros((1, self.d), dtype=np.int64), np.cumsum(totals, axis=0)])

    def path(self, i: int) -> Path:
        lo, hi = self._offsets[i], self._offsets[i + 1]
        arrivals = tuple(self.times[k][lo[k]:hi[k]] for k in range(self.d))
        return Path(arrivals, self.counts[i].T.copy(), self.horizon)

    def counts_at(self, t: float) -> np.ndarray:
        """Cumulative counts ``X_t`` for every path, shape ``(n_paths, d)``."""
        if not 0 <= t <= self.end:
            raise ValueError(f"time {t} outside [0, {self.end}]")
        out = np.empty((self.n_paths, self.d), dtype=np.int64)
        for k in range(self.d):
            hit = self.times[k] <= t
            out[:, k] = np.bincount(self._path_ids[k][hit], minlength=self.n_paths)
        return out

    def terminal_counts(self, period: int = 0) -> np.ndarray:
        return self.counts[:, period, :]

    def normalized_arrivals(self, k: int) -> np.ndarray:
        """Event times of coordinate ``k`` mapped to their position within the period."""
        x = self.times[k] / self.horizon
        return x - np.floor(x)

    def to_csv(self, events_path, counts_path) -> None:
        """Write ``path_id,coordinate,event_time`` and ``path_id,coordinate,period,count``.

        Coordinates are numbered from 1 (scenario order); paths and periods from 0.
        """
        path_id = np.concatenate(self._path_ids)
        coord = np.concatenate([np.full(ids.size, k + 1) for k, ids in enumerate(self._path_ids)])
        times = np.concatenate(self.times)
        order = np.lexsort((coord, path_id))  # stable: keeps time order within a coordinate
        with open(events_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["path_id", "coordinate", "event_time"])
            w.writerows(zip(path_id[order].tolist(), coord[order].tolist(),
                            map(repr, times[order].tolist())))
        n, periods, d = self.counts.shape
        p, m, k = np.meshgrid(np.arange(n), np.arange(periods), np.arange(d), indexing="ij")
        # rows ordered by path, coordinate, period
        p, k, m = (a.transpose(0, 2, 1).ravel() for a in (p, k, m))
        with open(counts_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["path_id", "coordinate", "period", "count"])
            w.writerows(zip(p.tolist(), (k + 1).tolist(), m.tolist(),
                            self.counts[p, m, k].tolist()))


def _fill_uniform_times(counts: np.ndarray, periods: int, horizon: float,
                        rng: np.random.Generator) -> np.ndarray:
    """Sorted uniform event times for a flat sequence of (path, period) counts."""
    total = int(counts.sum())
    if total == 0:
        return np.empty(0)
    segment = np.repeat(np.arange(counts.size), counts)
    u = rng.random(total)
    u = u[np.lexsort((u, segment))]
    start = (segment % periods) * horizon
    t = start + u * horizon
    # (m + u) * T may round up to the next period boundary
    return np.minimum(t, np.nextafter(start + horizon, start))


def backward_simulate_period(counts, start: float, length: float,
                             rng: np.random.Generator) -> list[np.ndarray]:
    """Place ``counts[j]`` sorted uniform event times on ``[start, start + length)``."""
    out = []
    for n in np.asarray(counts, dtype=np.int64):
        if n < 0:
            raise ValueError("counts must be non-negative")
        if n == 0:
            out.append(np.empty(0))
            continue
        t = start + np.sort(rng.random(n)) * length
        out.append(np.minimum(t, np.nextafter(start + length, start)))
    return out


def _simulate_block(model: CalibratedModel, periods: int, n: int, seed: int,
                    block: int) -> tuple[np.ndarray, list[np.ndarray]]:
    count_rng = make_rng(seed, block, 0)
    counts = sample_joint(model, count_rng, size=n * periods).reshape(n, periods, model.d)
    times = []
    for k in range(model.d):
        time_rng = make_rng(seed, block, 1, k)
        times.append(_fill_uniform_times(counts[:, :, k].ravel(), periods,
                                         model.horizon, time_rng))
    return counts, times


def simulate(config: SimulationConfig, threads: int | None = None) -> PathSet:
    """Backward Simulation with Forward Continuation over ``config.periods`` periods."""
    n, periods = config.paths, config.periods
    blocks = [(b, min(BLOCK_SIZE, n - b * BLOCK_SIZE))
              for b in range((n + BLOCK_SIZE - 1) // BLOCK_SIZE)]
    threads = threads or os.cpu_count() or 1

    def run(job):
        b, size = job
        return _simulate_block(config.model, periods, size, config.seed, b)

    if threads == 1 or len(blocks) == 1:
        results = [run(job) for job in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, blocks))
    counts = np.concatenate([r[0] for r in results], axis=0)
    times = tuple(np.concatenate([r[1][k] for r in results]) for k in range(config.model.d))
    return PathSet(counts, times, config.model.horizon)


def forward_comonotone(rate1: float, rate2: float, horizon: float,
                       rng: np.random.Generator, mode: str = "max") -> Path:
    """Two Poisson processes simulated forward with coupled inter-arrival times.

    ``mode="max"`` uses ``rate1 * dT1 = rate2 * dT2`` (a shared unit-rate
    exponential), giving ``N1(t) = N2(kappa t)`` with ``kappa = rate1 / rate2``.
    ``mode="min"`` uses ``exp(-rate1 dT1) + exp(-rate2 dT2) = 1``.
    """
    if rate1 <= 0 or rate2 <= 0:
        raise ValueError("rates must be positive")
    if mode not in ("max", "min"):
        raise ValueError("mode must be 'max' or 'min'")
    need1, need2 = rate1 * horizon, rate2 * horizon
    s1 = s2 = 0.0
    chunks1, chunks2 = [], []
    chunk = int(max(need1, need2) + 5 * np.sqrt(max(need1, need2)) + 10)
    while s1 <= need1 or s2 <= need2:
        u = rng.random(chunk)
        e1 = -np.log1p(-u)
        e2 = e1 if mode == "max" else -np.log(u)
        c1 = s1 + np.cumsum(e1)
        c2 = s2 + np.cumsum(e2)
        chunks1.append(c1)
        chunks2.append(c2)
        s1, s2 = c1[-1], c2[-1]
    # arrival times of a unit-rate clock rescaled per coordinate
    t1 = np.concatenate(chunks1) / rate1
    t2 = np.concatenate(chunks2) / rate2
    t1 = t1[t1 <= horizon]
    t2 = t2[t2 <= horizon]
    return Path((t1, t2), np.array([[t1.size], [t2.size]]), horizon)


def forward_comonotone_counts(rate1: float, rate2: float, horizon: float,
                              rng: np.random.Generator, n_paths: int,
                              mode: str = "max") -> np.ndarray:
    """Terminal counts of ``n_paths`` forward-coupled paths, shape ``(n_paths, 2)``."""
    return np.array([forward_comonotone(rate1, rate2, horizon, rng, mode).period_counts[:, 0]
                     for _ in range(n_paths)])
