"""Seeded, reproducible, parallelizable Monte-Carlo trial engine.

Every trial is a pure function of (base_seed, trial_index): trial t renames
each agent's worst-case base input by an independent uniform permutation
drawn from the counter-based stream of (base_seed, t, agent), runs the
configured algorithm, and records fairness verdicts.  Because no state flows
between trials, the trial range can be chunked and sharded across any number
of worker processes and the aggregated counters — and therefore every
serialized output — are bit-identical regardless of worker count, schedule,
or platform.

Two execution paths produce identical verdicts: a scalar reference path that
drives the library per trial, and a numpy path that vectorizes the picking
loops across a chunk of trials (the default for the picking algorithms; the
equivalence is enforced by tests).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .core import ConfigError, ItemOrdering, MAX_ITEMS, MAX_ORDERING_ITEMS
from .algorithms import give_away_round_robin, round_robin
from .fairness import check_sdef
from .hypergraph import NoBalancedEF, balanced_ef_allocation
from .valuations import Valuation, sample_uniform_permutation
from .rng import (
    Stream,
    draws_np,
    trial_agent_seed,
    trial_agent_seeds_np,
)

WORKERS_ENV = "RENAME_FAIR_WORKERS"

RR = "rr"
GARR = "garr"
BEF2 = "bef2"

TRACK_OVERALL = "overall"
TRACK_PER_K = "per_k"
TRACK_PER_PAIR = "per_pair"

_Z95 = 1.959963984540054

# Chunks are a fixed function of m so memory stays bounded; chunk boundaries
# never influence results because trial streams are counter-based.
_CHUNK_ELEMENT_TARGET = 1 << 22


def _chunk_size(m: int) -> int:
    return max(1024, min(1 << 15, _CHUNK_ELEMENT_TARGET // max(m, 1)))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    m: int
    algorithm: str
    trials: int
    base_seed: int
    base_orders: tuple[ItemOrdering, ...] | None = None
    base_valuations: tuple[Valuation, ...] | None = None
    track: frozenset[str] = frozenset({TRACK_OVERALL})

    def __post_init__(self):
        if self.algorithm not in (RR, GARR, BEF2):
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n < 1 or self.m < 1:
            raise ConfigError("need n >= 1 and m >= 1")
        if not self.track <= {TRACK_OVERALL, TRACK_PER_K, TRACK_PER_PAIR}:
            unknown = self.track - {TRACK_OVERALL, TRACK_PER_K, TRACK_PER_PAIR}
            raise ConfigError(f"unknown track flags {sorted(unknown)}")
        if self.algorithm == BEF2:
            if self.m > MAX_ITEMS:
                raise ConfigError(f"the balanced construction is capped at m={MAX_ITEMS}")
            if self.n != 2:
                raise ConfigError("the balanced construction is defined for n = 2")
            if self.m % 2:
                raise ConfigError("the balanced construction needs even m")
            if self.base_valuations is None or len(self.base_valuations) != 2:
                raise ConfigError("bef2 needs one base valuation per agent")
            if any(v.m != self.m for v in self.base_valuations):
                raise ConfigError("base valuations disagree with m")
        else:
            if self.m > MAX_ORDERING_ITEMS:
                raise ConfigError(f"the picking engine is capped at m={MAX_ORDERING_ITEMS}")
            if self.algorithm == GARR and self.m < self.n * (self.n - 1):
                raise ConfigError(f"give-away phase needs m >= n(n-1) = {self.n * (self.n - 1)}")
            if self.base_orders is not None:
                if len(self.base_orders) != self.n:
                    raise ConfigError("need one base ordering per agent")
                if any(o.m != self.m for o in self.base_orders):
                    raise ConfigError("base orderings disagree with m")

    def orders(self) -> tuple[ItemOrdering, ...]:
        if self.base_orders is not None:
            return self.base_orders
        return tuple(ItemOrdering.identity(self.m) for _ in range(self.n))

    @property
    def q_max(self) -> int:
        """Largest bundle size the algorithm can produce (per-k arrays use 0..q_max)."""
        if self.algorithm == BEF2:
            return self.m // 2
        if self.algorithm == GARR:
            rr_items = self.m - self.n * (self.n - 1)
            return (self.n - 1) + -(-rr_items // self.n)
        return -(-self.m // self.n)


@dataclass(frozen=True)
class TrialStats:
    failures: int
    trials: int
    estimate: float
    wilson_95: tuple[float, float]
    per_k_failures: tuple[int, ...] | None = None
    per_pair_failures: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        assert 0 <= self.failures <= self.trials
        low, high = self.wilson_95
        assert low - 1e-12 <= self.estimate <= high + 1e-12


def wilson_interval(failures: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (well-behaved near 0)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = failures / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # the interval provably contains the point estimate; clamp float noise
    low = min(max(0.0, center - half), p)
    high = max(min(1.0, center + half), p)
    return (low, high)


# ---------------------------------------------------------------------------
# Scalar reference path
# ---------------------------------------------------------------------------


def trial_permutations(cfg: ExperimentConfig, trial: int):
    """The renaming of each agent in the given trial (pure in cfg.base_seed, trial)."""
    return tuple(
        sample_uniform_permutation(cfg.m, Stream(trial_agent_seed(cfg.base_seed, trial, a)))
        for a in range(cfg.n)
    )


def _run_trial_reference(cfg: ExperimentConfig, trial: int):
    """One trial through the plain library path; returns (failed, per_k_set, pair_set)."""
    perms = trial_permutations(cfg, trial)
    if cfg.algorithm == BEF2:
        result = balanced_ef_allocation(
            cfg.base_valuations[0], cfg.base_valuations[1], perms[0], perms[1]
        )
        return isinstance(result, NoBalancedEF), frozenset(), frozenset()
    from .core import permute_ordering

    renamed = tuple(permute_ordering(order, perm) for order, perm in zip(cfg.orders(), perms))
    run = round_robin if cfg.algorithm == RR else give_away_round_robin
    report = check_sdef(run(renamed, cfg.m).final, renamed)
    per_k = frozenset(k for (_, _, k) in report.per_k_flags)
    pairs = frozenset((i, j) for (i, j, _) in report.per_k_flags)
    return (not report.verdict), per_k, pairs


def run_experiment_reference(cfg: ExperimentConfig) -> TrialStats:
    """Trial-at-a-time engine; the behavioral reference for the vectorized path."""
    failures = 0
    per_k = [0] * (cfg.q_max + 1)
    per_pair = [[0] * cfg.n for _ in range(cfg.n)]
    for t in range(cfg.trials):
        failed, ks, pairs = _run_trial_reference(cfg, t)
        failures += failed
        for k in ks:
            per_k[k] += 1
        for i, j in pairs:
            per_pair[i][j] += 1
    return _assemble(cfg, failures, per_k, per_pair)


def _assemble(cfg: ExperimentConfig, failures: int, per_k, per_pair) -> TrialStats:
    return TrialStats(
        failures=failures,
        trials=cfg.trials,
        estimate=failures / cfg.trials,
        wilson_95=wilson_interval(failures, cfg.trials),
        per_k_failures=tuple(per_k) if TRACK_PER_K in cfg.track else None,
        per_pair_failures=tuple(tuple(row) for row in per_pair)
        if TRACK_PER_PAIR in cfg.track
        else None,
    )


# ---------------------------------------------------------------------------
# Vectorized chunk path for the picking algorithms
# ---------------------------------------------------------------------------


def _permutations_chunk(base_seed: int, trials: np.ndarray, agent: int, m: int) -> np.ndarray:
    """(T, m) int32 images arrays: row t is the renaming of `agent` in trial t.

    Matches sample_uniform_permutation draw for draw: descending positions,
    swap with a uniform index <= the position.
    """
    seeds = trial_agent_seeds_np(base_seed, trials, agent)
    draws = draws_np(seeds, max(m - 1, 0))
    T = len(trials)
    perm = np.tile(np.arange(m, dtype=np.int32), (T, 1))
    flat = perm.ravel()
    row_offsets = np.arange(T, dtype=np.int64) * m
    for col, j in enumerate(range(m - 1, 0, -1)):
        r_idx = (draws[:, col] % np.uint64(j + 1)).astype(np.int64) + row_offsets
        vj = perm[:, j].copy()
        vr = flat.take(r_idx)
        perm[:, j] = vr
        flat[r_idx] = vj
    return perm


def _advance(
    pref_flat: np.ndarray,
    taken_flat: np.ndarray,
    ptr: np.ndarray,
    row_offsets: np.ndarray,
    step: int,
) -> np.ndarray:
    """Move per-trial pointers (by `step`, +1 or -1) past taken items; return current items.

    All arrays are flat views addressed by trial_row * m + column.
    """
    cur = pref_flat.take(ptr + row_offsets)
    stuck_rows = np.nonzero(taken_flat.take(cur + row_offsets))[0]
    while stuck_rows.size:
        ptr[stuck_rows] += step
        fresh = pref_flat.take(ptr[stuck_rows] + row_offsets[stuck_rows])
        cur[stuck_rows] = fresh
        still = taken_flat.take(fresh + row_offsets[stuck_rows])
        stuck_rows = stuck_rows[still]
    return cur


def _give_plan(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(n) if j != i]


def _bundle_layout(cfg: ExperimentConfig) -> tuple[list[int], int]:
    """Final bundle size per agent and the number of give-away receipts."""
    n, m = cfg.n, cfg.m
    if cfg.algorithm == GARR:
        gives = n - 1
        rr_items = m - n * (n - 1)
    else:
        gives = 0
        rr_items = m
    sizes = [gives + rr_items // n + (1 if a < rr_items % n else 0) for a in range(n)]
    return sizes, gives


def _simulate_chunk(cfg: ExperimentConfig, start: int, count: int):
    """Vectorized trials [start, start+count): returns raw counters."""
    n, m = cfg.n, cfg.m
    trials = np.arange(start, start + count, dtype=np.uint64)
    base_inverses = [np.array(order.inverse, dtype=np.int64) for order in cfg.orders()]
    prefs = []
    for a in range(n):
        sigma = _permutations_chunk(cfg.base_seed, trials, a, m)
        prefs.append(np.ascontiguousarray(sigma[:, base_inverses[a]]).astype(np.int64))

    T = count
    row_offsets = np.arange(T, dtype=np.int64) * m
    pref_flats = [p.ravel() for p in prefs]
    taken_flat = np.zeros(T * m, dtype=bool)
    best_ptr = np.zeros((n, T), dtype=np.int64)
    worst_ptr = np.full((n, T), m - 1, dtype=np.int64)
    sizes, gives = _bundle_layout(cfg)
    bundles = [np.empty((T, sizes[a]), dtype=np.int64) for a in range(n)]
    fill = [0] * n

    if cfg.algorithm == GARR:
        for giver, receiver in _give_plan(n):
            item = _advance(pref_flats[giver], taken_flat, worst_ptr[giver], row_offsets, -1)
            taken_flat[item + row_offsets] = True
            bundles[receiver][:, fill[receiver]] = item
            fill[receiver] += 1
        rr_items = m - n * (n - 1)
    else:
        rr_items = m
    for t_step in range(rr_items):
        a = t_step % n
        item = _advance(pref_flats[a], taken_flat, best_ptr[a], row_offsets, +1)
        taken_flat[item + row_offsets] = True
        bundles[a][:, fill[a]] = item
        fill[a] += 1

    return _sdef_counters(cfg, prefs, bundles, sizes, T)


def _sdef_counters(cfg: ExperimentConfig, prefs, bundles, sizes, T: int):
    n, m = cfg.n, cfg.m
    row_offsets = np.arange(T, dtype=np.int64) * m
    track_k = TRACK_PER_K in cfg.track
    track_pair = TRACK_PER_PAIR in cfg.track
    failed = np.zeros(T, dtype=bool)
    per_k = np.zeros((cfg.q_max + 1, T), dtype=bool) if track_k else None
    per_pair = np.zeros((n, n), dtype=np.int64) if track_pair else None

    ranks_flat = []
    positions = np.tile(np.arange(m, dtype=np.int32), T)
    for a in range(n):
        rank = np.empty(T * m, dtype=np.int32)
        rank[prefs[a].ravel() + np.repeat(row_offsets, m)] = positions
        ranks_flat.append(rank)

    for i in range(n):
        own = np.sort(
            ranks_flat[i].take(bundles[i] + row_offsets[:, None]), axis=1
        )
        for j in range(n):
            if j == i:
                continue
            if sizes[i] != sizes[j]:
                failed[:] = True
                if track_k:
                    per_k[0][:] = True
                if track_pair:
                    per_pair[i, j] += T
                continue
            other = np.sort(
                ranks_flat[i].take(bundles[j] + row_offsets[:, None]), axis=1
            )
            viol = other < own
            pair_fail = viol.any(axis=1)
            failed |= pair_fail
            if track_k:
                per_k[1 : sizes[i] + 1] |= viol.T
            if track_pair:
                per_pair[i, j] += int(pair_fail.sum())

    return (
        int(failed.sum()),
        per_k.sum(axis=1).astype(np.int64) if track_k else np.zeros(cfg.q_max + 1, np.int64),
        per_pair if per_pair is not None else np.zeros((n, n), np.int64),
    )


def _bef2_chunk(cfg: ExperimentConfig, start: int, count: int):
    failures = 0
    for t in range(start, start + count):
        failed, _, _ = _run_trial_reference(cfg, t)
        failures += failed
    return failures, np.zeros(cfg.q_max + 1, np.int64), np.zeros((cfg.n, cfg.n), np.int64)


def _chunk_worker(args):
    cfg, start, count = args
    if cfg.algorithm == BEF2:
        return _bef2_chunk(cfg, start, count)
    return _simulate_chunk(cfg, start, count)


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
    return 1


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> TrialStats:
    """Run all trials and aggregate counters.

    The result is identical for every worker count: trials are seeded by
    index, chunk boundaries depend only on cfg, and aggregation is integer
    addition.
    """
    nworkers = resolve_workers(workers)
    chunk = _chunk_size(cfg.m)
    tasks = [
        (cfg, start, min(chunk, cfg.trials - start))
        for start in range(0, cfg.trials, chunk)
    ]
    if nworkers == 1 or len(tasks) == 1:
        results = [_chunk_worker(task) for task in tasks]
    else:
        import multiprocessing as mp

        with mp.Pool(processes=nworkers) as pool:
            results = pool.map(_chunk_worker, tasks)
    failures = sum(r[0] for r in results)
    per_k = np.sum([r[1] for r in results], axis=0)
    per_pair = np.sum([r[2] for r in results], axis=0)
    return _assemble(cfg, int(failures), [int(x) for x in per_k], [[int(x) for x in row] for row in per_pair])


def sweep(
    cfg_template: ExperimentConfig,
    m_values: Sequence[int] | None = None,
    n_values: Sequence[int] | None = None,
    workers: int | None = None,
) -> list[tuple[ExperimentConfig, TrialStats]]:
    """One run_experiment per grid cell, varying m (or n) on the template.

    Cells reset the base orderings to the identical-identity worst case,
    since stored orderings cannot carry across sizes; the balanced-EF
    algorithm needs per-size valuations and is run cell by cell instead.
    """
    if cfg_template.algorithm == BEF2:
        raise ConfigError("sweep supports the picking algorithms; run bef2 cells directly")
    if (m_values is None) == (n_values is None):
        raise ConfigError("provide exactly one of m_values or n_values")
    if m_values is not None:
        cells = [replace(cfg_template, m=m, base_orders=None) for m in m_values]
    else:
        cells = [replace(cfg_template, n=n, base_orders=None) for n in n_values]
    return [(cell, run_experiment(cell, workers=workers)) for cell in cells]


def sweep_to_csv(results: Iterable[tuple[ExperimentConfig, TrialStats]]) -> str:
    """CSV with one row per cell; per-k columns appear when tracked."""
    results = list(results)
    track_k = any(stats.per_k_failures is not None for _, stats in results)
    q_max = max((len(stats.per_k_failures) - 1 for _, stats in results if stats.per_k_failures), default=0)
    header = ["n", "m", "trials", "failures", "estimate", "wilson_low", "wilson_high"]
    if track_k:
        header += [f"k{k}" for k in range(q_max + 1)]
    lines = [",".join(header)]
    for cfg, stats in results:
        row = [
            str(cfg.n),
            str(cfg.m),
            str(stats.trials),
            str(stats.failures),
            repr(stats.estimate),
            repr(stats.wilson_95[0]),
            repr(stats.wilson_95[1]),
        ]
        if track_k:
            counts = list(stats.per_k_failures or [])
            counts += [0] * (q_max + 1 - len(counts))
            row += [str(c) for c in counts]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def rr_failure_upper_bound(n: int, m: int) -> float:
    """The explicit finite-m ceiling 33 n^2 / m + 16 n ln(m) / m^(1 - 1/n)."""
    return 33 * n * n / m + 16 * n * math.log(m) / (m ** (1 - 1 / n))


def rr_bound_side_conditions(n: int, m: int) -> bool:
    """The regime where the ceiling is actually guaranteed."""
    return m >= 2 * n and n * math.log(m) / (m ** (1 - 1 / n)) <= 1 / 16
