"""PSO and GA search over constellation coordinates.

A candidate is a flat vector of 2M reals laid out as ``re0, im0, re1, im1, ...``.
Costs are evaluated on the unit-energy copy of each candidate, so the search
box only bounds shapes, not scale.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from constkit.constellation import Constellation, make_constellation, normalize_energy
from constkit.errors import InvalidInput
from constkit.metrics import SnrSpec, qfunc
from constkit.rng import derive_stream


@dataclass(frozen=True)
class FitnessWeights:
    """Barrier/penalty objective; lower cost is better.

    With ``lambda_papr`` set, the optimizers switch to the energy-aware cost
    (union bound at ``snr_db`` plus ``lambda_papr`` times linear PAPR).
    """

    tau: float = 0.3
    alpha: float = 1.0
    papr_cap_db: float = 3.0
    beta: float = 0.05
    gamma: float = 1.0
    barrier_threshold: float = 1e-4
    barrier_cost: float = 1e9
    lambda_papr: float | None = None
    snr_db: float = 10.0

    def __post_init__(self) -> None:
        if min(self.tau, self.alpha, self.beta, self.gamma) < 0:
            raise InvalidInput("tau, alpha, beta and gamma must be nonnegative")
        if self.lambda_papr is not None and self.lambda_papr < 0:
            raise InvalidInput("lambda_papr must be nonnegative")


def _as_population(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] < 4 or X.shape[1] % 2:
        raise InvalidInput("each candidate needs an even number >= 4 of coordinates")
    return X


def _normalized(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit-energy points, pairwise distances (upper triangle) and a validity mask."""
    z = X[:, 0::2] + 1j * X[:, 1::2]
    energy = np.mean(np.abs(z) ** 2, axis=1)
    ok = energy > 0
    z = z / np.sqrt(np.where(ok, energy, 1.0))[:, None]
    iu = np.triu_indices(z.shape[1], k=1)
    d = np.abs(z[:, iu[0]] - z[:, iu[1]])
    return z, d, ok


def fitness_batch(X: np.ndarray, w: FitnessWeights = FitnessWeights()) -> np.ndarray:
    """Cost of every row of ``X`` under the penalty objective (or energy-aware one)."""
    X = _as_population(X)
    z, d, ok = _normalized(X)
    dmin = d.min(axis=1)
    peak = np.max(np.abs(z) ** 2, axis=1)
    if w.lambda_papr is not None:
        n0 = SnrSpec(w.snr_db).n0
        # each unordered pair appears twice in the double sum
        ub = 2.0 * qfunc(d / math.sqrt(2.0 * n0)).sum(axis=1) / z.shape[1]
        cost = ub + w.lambda_papr * peak
    else:
        spacing = np.sum(np.maximum(0.0, w.tau - d) ** 2, axis=1)
        papr_db = 10.0 * np.log10(np.where(ok, peak, 1.0))
        cost = (-w.gamma * dmin + w.alpha * spacing
                + w.beta * np.maximum(0.0, papr_db - w.papr_cap_db) ** 2)
    bad = ~ok | (dmin < w.barrier_threshold)
    return np.where(bad, w.barrier_cost, cost)


def _points_to_vector(points: Sequence[complex]) -> np.ndarray:
    z = np.asarray(points, dtype=np.complex128).ravel()
    if z.size < 2:
        raise InvalidInput("need at least 2 points")
    v = np.empty(2 * z.size)
    v[0::2], v[1::2] = z.real, z.imag
    return v


def fitness(points: Sequence[complex], w: FitnessWeights = FitnessWeights()) -> float:
    return float(fitness_batch(_points_to_vector(points), w)[0])


def energy_aware_fitness(points: Sequence[complex], base: FitnessWeights = FitnessWeights(),
                         lambda_papr: float = 0.0, snr: SnrSpec | float = 10.0) -> float:
    snr_db = snr.snr_db if isinstance(snr, SnrSpec) else float(snr)
    w = FitnessWeights(**{**asdict(base), "lambda_papr": lambda_papr, "snr_db": snr_db})
    return fitness(points, w)


@dataclass(frozen=True)
class PsoConfig:
    particles: int = 100
    iterations: int = 1000
    inertia_start: float = 0.9
    inertia_end: float = 0.4
    c1: float = 1.6
    c2: float = 1.6
    bounds: tuple[float, float] = (-2.0, 2.0)
    velocity_init: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.particles < 1 or self.iterations < 1:
            raise InvalidInput("particles and iterations must be >= 1")
        if not self.bounds[0] < self.bounds[1]:
            raise InvalidInput("bounds must be ordered")


@dataclass(frozen=True)
class GaConfig:
    population: int = 100
    generations: int = 1000
    elite_fraction: float = 0.1
    crossover_prob: float = 1.0
    mutation_sigma: float = 0.08
    mutation_prob: float = 0.5
    jitter: float = 0.15
    jitter_prob: float = 0.2
    bounds: tuple[float, float] = (-2.0, 2.0)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population < 2 or self.generations < 1:
            raise InvalidInput("population must be >= 2 and generations >= 1")
        if not 0 < self.elite_fraction < 1:
            raise InvalidInput("elite_fraction must lie in (0, 1)")
        for p in (self.crossover_prob, self.mutation_prob, self.jitter_prob):
            if not 0 <= p <= 1:
                raise InvalidInput("probabilities must lie in [0, 1]")
        if not self.bounds[0] < self.bounds[1]:
            raise InvalidInput("bounds must be ordered")


@dataclass
class OptimizerTrace:
    method: str
    best_costs: np.ndarray
    raw_points: np.ndarray
    constellation: Constellation
    seed: int
    config: dict = field(default_factory=dict)

    @property
    def best_cost(self) -> float:
        return float(self.best_costs[-1])


def _finish(method: str, M: int, best: np.ndarray, costs: list[float], seed: int,
            cfg, w: FitnessWeights, label: str | None) -> OptimizerTrace:
    raw = best[0::2] + 1j * best[1::2]
    c = normalize_energy(make_constellation(raw, label=label or f"{method.upper()}-{M}"))
    echo = {"method": method, "M": M, **asdict(cfg), "fitness": asdict(w)}
    return OptimizerTrace(method, np.array(costs), raw, c, seed, echo)


def pso_optimize(M: int, cfg: PsoConfig = PsoConfig(), w: FitnessWeights = FitnessWeights(),
                 label: str | None = None) -> OptimizerTrace:
    """Global-best particle swarm with linearly decaying inertia."""
    if M < 2:
        raise InvalidInput("M must be >= 2")
    lo, hi = cfg.bounds
    P, D = cfg.particles, 2 * M
    s = derive_stream(cfg.seed, ("pso", M))
    X = s.uniform((P, D), lo, hi)
    V = s.uniform((P, D), -cfg.velocity_init, cfg.velocity_init)
    cost = fitness_batch(X, w)
    pbest, pcost = X.copy(), cost.copy()
    g = int(np.argmin(pcost))
    gbest, gcost = pbest[g].copy(), float(pcost[g])
    history = []
    T = cfg.iterations
    for t in range(T):
        omega = cfg.inertia_start - (cfg.inertia_start - cfg.inertia_end) * (t / max(T - 1, 1))
        r1 = s.uniform((P, D))
        r2 = s.uniform((P, D))
        V = omega * V + cfg.c1 * r1 * (pbest - X) + cfg.c2 * r2 * (gbest - X)
        X = np.clip(X + V, lo, hi)
        cost = fitness_batch(X, w)
        improved = cost < pcost
        pbest[improved] = X[improved]
        pcost[improved] = cost[improved]
        g = int(np.argmin(pcost))
        if pcost[g] < gcost:
            gbest, gcost = pbest[g].copy(), float(pcost[g])
        history.append(gcost)
    return _finish("pso", M, gbest, history, cfg.seed, cfg, w, label)


def ga_optimize(M: int, cfg: GaConfig = GaConfig(), w: FitnessWeights = FitnessWeights(),
                label: str | None = None) -> OptimizerTrace:
    """Generational GA: linear rank selection, one-point crossover, elitism."""
    if M < 2:
        raise InvalidInput("M must be >= 2")
    lo, hi = cfg.bounds
    P, D = cfg.population, 2 * M
    n_elite = max(1, int(round(cfg.elite_fraction * P)))
    n_child = P - n_elite
    s = derive_stream(cfg.seed, ("ga", M))
    pop = s.uniform((P, D), lo, hi)
    cost = fitness_batch(pop, w)
    # rank r (1 = best) of P gets weight P - r + 1
    rank_w = np.arange(P, 0, -1, dtype=np.float64)
    rank_p = rank_w / rank_w.sum()
    history = []
    for _ in range(cfg.generations):
        order = np.argsort(cost, kind="stable")
        pop, cost = pop[order], cost[order]
        pa = pop[s.choice(rank_p, n_child)]
        pb = pop[s.choice(rank_p, n_child)]
        do_cross = s.uniform(n_child) < cfg.crossover_prob
        cut = s.integers(1, D, n_child)
        take_b = do_cross[:, None] & (np.arange(D)[None, :] >= cut[:, None])
        child = np.where(take_b, pb, pa)
        mut = s.uniform((n_child, D)) < cfg.mutation_prob
        child = child + mut * (cfg.mutation_sigma * s.normal(n_child * D).reshape(n_child, D))
        jit = s.uniform((n_child, D)) < cfg.jitter_prob
        child = child + jit * s.uniform((n_child, D), -cfg.jitter, cfg.jitter)
        child = np.clip(child, lo, hi)
        pop = np.concatenate([pop[:n_elite], child])
        cost = np.concatenate([cost[:n_elite], fitness_batch(child, w)])
        history.append(float(cost.min()))
    best = pop[int(np.argmin(cost))]
    return _finish("ga", M, best, history, cfg.seed, cfg, w, label)


def write_trace_csv(trace: OptimizerTrace, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["iteration", "best_cost"])
        for i, c in enumerate(trace.best_costs, start=1):
            wr.writerow([i, f"{c:.9g}"])
