"""Relocation local search for (constrained) likelihood maximization.

The search repeatedly scans single-node relocations.  Each candidate is
first scored with the *unconstrained* profile objective, updated
incrementally in O(K + deg(i)); only candidates that would improve the
current value, yet whose closed-form block parameters violate the
requested assortativity constraints, pay for a constrained solve.  Since
the constrained optimum never exceeds the unconstrained one, this filter
never discards an improving constrained move.

Internally all comparisons happen on the full-likelihood scale: profile
values differ from it by the partition-independent constant
``profile_offset``, which makes unconstrained candidate scores directly
comparable with constrained incumbents.
"""

from __future__ import annotations

import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (BlockStats, EmptyBlockMoveError, Graph, Partition,
                   block_stats, edges_into_blocks)
from .likelihood import (log_likelihood, modularity, omega_mle,
                         profile_log_likelihood, profile_offset)
from .solver import AssortativityMode, OmegaSolution, SolverConfig, \
    is_feasible, solve_constrained

__all__ = [
    "FitConfig",
    "FitResult",
    "fit",
    "delta_relocation",
    "multi_start",
    "WORKERS_ENV_VAR",
]

WORKERS_ENV_VAR = "ACSBM_WORKERS"

OBJECTIVE_LIKELIHOOD = "likelihood"
OBJECTIVE_MODULARITY = "modularity"


@dataclass(frozen=True)
class FitConfig:
    """Inputs of a single search run.

    scan_order is "shuffled" (reshuffled every sweep, seeded) or "fixed"
    (ascending node ids).  objective "modularity" switches the search to the
    modularity score with the same relocation mechanics; the fixed block
    count is kept but blocks may become empty.
    """

    k: int
    mode: AssortativityMode = AssortativityMode.NONE
    seed: int = 0
    max_sweeps: int = 1000
    solver: SolverConfig = field(default_factory=SolverConfig)
    scan_order: str = "shuffled"
    objective: str = OBJECTIVE_LIKELIHOOD

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.scan_order not in ("shuffled", "fixed"):
            raise ValueError(f"unknown scan order {self.scan_order!r}")
        if self.objective not in (OBJECTIVE_LIKELIHOOD, OBJECTIVE_MODULARITY):
            raise ValueError(f"unknown objective {self.objective!r}")
        object.__setattr__(self, "mode", AssortativityMode(self.mode))


@dataclass
class FitResult:
    """Local optimum returned by :func:`fit`.

    trace holds the strictly increasing sequence of accepted objective
    values (full log-likelihood for likelihood runs, Q for modularity runs),
    starting from the initial solution.
    """

    partition: Partition
    omega: np.ndarray
    lam: float
    log_likelihood: float
    modularity: float
    trace: list[float]
    sweeps: int
    constrained_solves: int
    filtered_moves: int
    seed: int
    mode: AssortativityMode
    objective: str

    @property
    def objective_value(self) -> float:
        return self.modularity if self.objective == OBJECTIVE_MODULARITY \
            else self.log_likelihood

    def to_dict(self) -> dict:
        return {
            "partition": list(self.partition.assign),
            "k": self.partition.k,
            "omega": self.omega.tolist(),
            "lambda": self.lam,
            "log_likelihood": self.log_likelihood,
            "modularity": self.modularity,
            "trace": list(self.trace),
            "sweeps": self.sweeps,
            "constrained_solves": self.constrained_solves,
            "filtered_moves": self.filtered_moves,
            "seed": self.seed,
            "mode": self.mode.value,
            "objective": self.objective,
        }


def _h(v) -> float:
    return v * math.log(v) if v > 0 else 0.0


def _profile_from_caches(hm, hk) -> float:
    return 0.5 * sum(sum(row) for row in hm) - sum(hk)


def _delta_profile(m, kappa, hm, hk, d, ki, l2, a, b) -> float:
    """Profile change for moving a node from block a to b.  O(K)."""
    ma, mb = m[a], m[b]
    hma, hmb = hm[a], hm[b]
    da, db = d[a], d[b]
    s = 0.0
    for r in range(len(kappa)):
        if r == a or r == b:
            continue
        dr = d[r]
        if dr:
            s += (_h(ma[r] - dr) - hma[r]) + (_h(mb[r] + dr) - hmb[r])
    s += s  # off-block cells change in both the row and the column
    s += _h(ma[a] - 2 * da - l2) - hma[a]
    s += _h(mb[b] + 2 * db + l2) - hmb[b]
    s += 2.0 * (_h(ma[b] + da - db) - hma[b])
    return (0.5 * s
            - (_h(kappa[a] - ki) - hk[a])
            - (_h(kappa[b] + ki) - hk[b]))


def _apply_move(m, kappa, hm, hk, d, ki, l2, a, b) -> None:
    """Update integer stats and their x*log(x) caches for a move a -> b."""
    ma, mb = m[a], m[b]
    hma, hmb = hm[a], hm[b]
    for r in range(len(kappa)):
        if r == a or r == b:
            continue
        dr = d[r]
        if dr:
            v = ma[r] - dr
            ma[r] = m[r][a] = v
            hma[r] = hm[r][a] = _h(v)
            v = mb[r] + dr
            mb[r] = m[r][b] = v
            hmb[r] = hm[r][b] = _h(v)
    v = ma[a] - 2 * d[a] - l2
    ma[a] = v
    hma[a] = _h(v)
    v = mb[b] + 2 * d[b] + l2
    mb[b] = v
    hmb[b] = _h(v)
    v = ma[b] + d[a] - d[b]
    ma[b] = mb[a] = v
    hma[b] = hmb[a] = _h(v)
    kappa[a] -= ki
    kappa[b] += ki
    hk[a] = _h(kappa[a])
    hk[b] = _h(kappa[b])


def delta_relocation(stats: BlockStats, graph: Graph, partition: Partition,
                     i: int, b: int) -> float:
    """Unconstrained profile objective change of relocating node i to b.

    Exactly equals recomputing ``profile_log_likelihood`` on the moved
    partition minus its current value, at O(K + deg(i)) cost.

    Raises
    ------
    EmptyBlockMoveError
        If the move would empty the source block.
    """
    a = partition.assign[i]
    if b == a:
        raise ValueError(f"node {i} already in block {b}")
    if partition.block_sizes()[a] == 1:
        raise EmptyBlockMoveError(f"moving node {i} would empty block {a}")
    d = edges_into_blocks(graph, partition, i)
    hm = [[_h(v) for v in row] for row in stats.m_block]
    hk = [_h(v) for v in stats.kappa]
    return _delta_profile(stats.m_block, stats.kappa, hm, hk, d,
                          graph.degree[i], graph.self_adjacency(i), a, b)


def _random_partition(n: int, k: int, rng: random.Random) -> list[int]:
    """Uniform assignment, then random nodes reassigned into empty blocks."""
    assign = [rng.randrange(k) for _ in range(n)]
    sizes = [0] * k
    for b in assign:
        sizes[b] += 1
    for r in range(k):
        while sizes[r] == 0:
            i = rng.randrange(n)
            if sizes[assign[i]] > 1:
                sizes[assign[i]] -= 1
                assign[i] = r
                sizes[r] += 1
    return assign


def _lambda_certificate(omega: np.ndarray) -> float:
    """A threshold witnessing strong feasibility of a feasible omega."""
    k = omega.shape[0]
    if k == 1:
        return float(omega[0, 0])
    off = ~np.eye(k, dtype=bool)
    return 0.5 * (float(np.min(np.diag(omega))) + float(np.max(omega[off])))


def fit(graph: Graph, cfg: FitConfig) -> FitResult:
    """Run the relocation local search to a local optimum.

    Starts from a seeded random partition with all blocks populated, solves
    the constrained subproblem for the initial block parameters, then sweeps
    over all (node, block) candidates, applying first improvements, until a
    full sweep yields none.
    """
    n = graph.n
    if cfg.k > n:
        raise ValueError(f"k={cfg.k} exceeds node count {n}")
    if graph.total_weight <= 0:
        raise ValueError("graph has no edges")

    rng = random.Random(cfg.seed)
    assign = _random_partition(n, cfg.k, rng)
    if cfg.objective == OBJECTIVE_MODULARITY:
        return _fit_modularity(graph, cfg, rng, assign)
    return _fit_likelihood(graph, cfg, rng, assign)


def _fit_likelihood(graph: Graph, cfg: FitConfig, rng: random.Random,
                    assign: list[int]) -> FitResult:
    n, k = graph.n, cfg.k
    mode = cfg.mode
    stats = block_stats(graph, Partition(k, assign))
    m, kappa = stats.m_block, stats.kappa
    hm = [[_h(v) for v in row] for row in m]
    hk = [_h(v) for v in kappa]
    sizes = [0] * k
    for b in assign:
        sizes[b] += 1

    offset = profile_offset(stats.two_m)
    prof = _profile_from_caches(hm, hk)

    n_solves = 0
    current_sol: OmegaSolution | None = None  # None means omega_mle is optimal
    if mode is AssortativityMode.NONE or is_feasible(omega_mle(stats), mode, 0.0):
        best = prof + offset
    else:
        current_sol = solve_constrained(stats, mode, cfg.solver)
        n_solves += 1
        best = current_sol.objective
    trace = [best]

    degree = graph.degree
    filtered = 0
    sweeps = 0
    order = list(range(n))
    improved = True
    while improved and sweeps < cfg.max_sweeps:
        improved = False
        sweeps += 1
        if cfg.scan_order == "shuffled":
            rng.shuffle(order)
        for i in order:
            a = assign[i]
            if sizes[a] == 1:
                continue
            d = [0] * k
            for j, w in graph.neighbors(i):
                d[assign[j]] += w
            ki = degree[i]
            l2 = graph.self_adjacency(i)
            threshold = best - offset
            for b in range(k):
                if b == a:
                    continue
                delta = _delta_profile(m, kappa, hm, hk, d, ki, l2, a, b)
                if prof + delta <= threshold:
                    filtered += 1
                    continue
                _apply_move(m, kappa, hm, hk, d, ki, l2, a, b)
                prof_new = _profile_from_caches(hm, hk)
                cand = prof_new + offset
                accept_sol: OmegaSolution | None = None
                ok = cand > best
                if ok and mode is not AssortativityMode.NONE \
                        and not is_feasible(omega_mle(stats), mode, 0.0):
                    accept_sol = solve_constrained(stats, mode, cfg.solver)
                    n_solves += 1
                    cand = accept_sol.objective
                    ok = cand > best
                if ok:
                    assign[i] = b
                    sizes[a] -= 1
                    sizes[b] += 1
                    prof = prof_new
                    best = cand
                    current_sol = accept_sol
                    trace.append(best)
                    threshold = best - offset
                    improved = True
                    a = b
                else:
                    _apply_move(m, kappa, hm, hk, d, ki, l2, b, a)
                    if accept_sol is None:
                        filtered += 1

    if current_sol is None:
        omega = omega_mle(stats)
        lam = _lambda_certificate(omega) if mode is AssortativityMode.STRONG else 0.0
    else:
        omega, lam = current_sol.omega, current_sol.lam
    return FitResult(
        partition=Partition(k, assign),
        omega=omega,
        lam=lam,
        log_likelihood=best,
        modularity=modularity(stats),
        trace=trace,
        sweeps=sweeps,
        constrained_solves=n_solves,
        filtered_moves=filtered,
        seed=cfg.seed,
        mode=mode,
        objective=cfg.objective,
    )


def _fit_modularity(graph: Graph, cfg: FitConfig, rng: random.Random,
                    assign: list[int]) -> FitResult:
    n, k = graph.n, cfg.k
    stats = block_stats(graph, Partition(k, assign))
    m, kappa = stats.m_block, stats.kappa
    hm = [[_h(v) for v in row] for row in m]
    hk = [_h(v) for v in kappa]
    sizes = [0] * k
    for b in assign:
        sizes[b] += 1
    two_m = float(stats.two_m)

    def q_value() -> float:
        return sum(m[r][r] for r in range(k)) / two_m \
            - sum((kr / two_m) ** 2 for kr in kappa)

    best = q_value()
    trace = [best]
    degree = graph.degree
    filtered = 0
    sweeps = 0
    order = list(range(n))
    improved = True
    while improved and sweeps < cfg.max_sweeps:
        improved = False
        sweeps += 1
        if cfg.scan_order == "shuffled":
            rng.shuffle(order)
        for i in order:
            a = assign[i]
            d = [0] * k
            for j, w in graph.neighbors(i):
                d[assign[j]] += w
            ki = degree[i]
            l2 = graph.self_adjacency(i)
            for b in range(k):
                if b == a:
                    continue
                delta = (2.0 * (d[b] - d[a])) / two_m \
                    - (2.0 * ki * (kappa[b] - kappa[a]) + 2.0 * ki * ki) / (two_m * two_m)
                if delta <= 0.0:
                    filtered += 1
                    continue
                _apply_move(m, kappa, hm, hk, d, ki, l2, a, b)
                cand = q_value()
                if cand > best:
                    assign[i] = b
                    sizes[a] -= 1
                    sizes[b] += 1
                    best = cand
                    trace.append(best)
                    improved = True
                    a = b
                else:
                    _apply_move(m, kappa, hm, hk, d, ki, l2, b, a)
                    filtered += 1

    omega = omega_mle(stats)
    return FitResult(
        partition=Partition(k, assign),
        omega=omega,
        lam=0.0,
        log_likelihood=log_likelihood(stats, omega),
        modularity=best,
        trace=trace,
        sweeps=sweeps,
        constrained_solves=0,
        filtered_moves=filtered,
        seed=cfg.seed,
        mode=AssortativityMode.NONE,
        objective=cfg.objective,
    )


def _fit_task(args) -> FitResult:
    graph, cfg = args
    return fit(graph, cfg)


def default_workers() -> int:
    """Worker count from the environment (default 1, i.e. sequential)."""
    try:
        return max(1, int(os.environ.get(WORKERS_ENV_VAR, "1")))
    except ValueError:
        return 1


def multi_start(graph: Graph, cfg: FitConfig, runs: int,
                workers: int | None = None) -> list[FitResult]:
    """Independent fits with seeds cfg.seed .. cfg.seed + runs - 1.

    Results are sorted by the run objective (descending), ties broken by
    seed, so the ordering is deterministic regardless of worker scheduling.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    cfgs = [replace(cfg, seed=cfg.seed + r) for r in range(runs)]
    if workers is None:
        workers = default_workers()
    if workers <= 1 or runs == 1:
        results = [fit(graph, c) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, runs)) as pool:
            results = list(pool.map(_fit_task, [(graph, c) for c in cfgs]))
    results.sort(key=lambda r: (-r.objective_value, r.seed))
    return results
