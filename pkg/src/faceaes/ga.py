"""Mixed-integer genetic search over feature masks and linear weights.

An individual carries a binary feature-selection mask, one real weight per
feature and a bias; its prediction for a row x is sum_j x_j*(mask_j*w_j) + b.
Fitness is the mean hinge loss (classification) or mean smooth-L1 loss
(regression) of those predictions on the training fold, so the search
jointly prunes features and refits the linear map. The population is seeded
with a previously trained linear model and its perturbed copies.

Every random draw comes from a stream derived statelessly from
(master seed, generation, slot), so results are bit-identical no matter how
fitness evaluation is parallelized.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimMismatchError, NonFiniteError
from .linear import LinearModel, hinge_loss, smooth_l1_loss

_EVAL_CHUNK = 16  # fixed so chunking never depends on the worker count


@dataclass(frozen=True)
class Chromosome:
    """Selection mask + weights + bias; immutable value object."""

    mask: np.ndarray
    weights: np.ndarray
    bias: float

    def __post_init__(self):
        mask = np.ascontiguousarray(self.mask, dtype=bool)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if mask.ndim != 1 or weights.shape != mask.shape:
            raise DimMismatchError(
                f"mask and weights must be equal-length vectors, got {mask.shape} vs {weights.shape}"
            )
        if not (np.isfinite(weights).all() and math.isfinite(self.bias)):
            raise NonFiniteError("chromosome weights/bias must be finite")
        mask.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def n_features(self) -> int:
        return self.mask.shape[0]


def selected_feature_count(c: Chromosome) -> int:
    """Popcount of the selection mask (the reported #features)."""
    return int(np.count_nonzero(c.mask))


def chromosome_predict(c: Chromosome, row) -> float:
    """Prediction sum_j row_j*(mask_j*w_j) + b for one feature vector."""
    row = np.asarray(row, dtype=np.float64)
    if row.shape != c.mask.shape:
        raise DimMismatchError(f"row has shape {row.shape}, chromosome expects {c.mask.shape}")
    return float(row @ (c.weights * c.mask) + c.bias)


def chromosome_predict_many(c: Chromosome, rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != c.n_features:
        raise DimMismatchError(f"rows have shape {rows.shape}, chromosome expects (*, {c.n_features})")
    return rows @ (c.weights * c.mask) + c.bias


@dataclass(frozen=True)
class GaConfig:
    """Search hyperparameters.

    ``bit_mutation_prob`` and ``weight_mutation_sigma`` default to None and
    are resolved against the problem at hand: 1/N_f bit flips, and
    0.01 * std(seed weights) (floored at 1e-3) weight noise.
    """

    generations: int
    crossover_prob: float
    elitism_fraction: float
    task: str  # "classification" | "regression"
    population_size: int = 100
    tournament_size: int = 3
    bit_mutation_prob: float | None = None
    weight_mutation_sigma: float | None = None
    init_perturb_sigma: float = 0.05
    init_mask_density: float = 0.8
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 1 or self.generations < 0 or self.tournament_size < 1:
            raise ValueError("population_size/tournament_size must be >= 1, generations >= 0")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover_prob must lie in [0, 1]")
        if not 0.0 <= self.elitism_fraction < 1.0:
            raise ValueError("elitism_fraction must lie in [0, 1)")
        if self.bit_mutation_prob is not None and not 0.0 <= self.bit_mutation_prob <= 1.0:
            raise ValueError("bit_mutation_prob must lie in [0, 1]")
        if self.weight_mutation_sigma is not None and self.weight_mutation_sigma < 0:
            raise ValueError("weight_mutation_sigma must be non-negative")
        if not 0.0 < self.init_mask_density <= 1.0:
            raise ValueError("init_mask_density must lie in (0, 1]")
        if self.init_perturb_sigma < 0:
            raise ValueError("init_perturb_sigma must be non-negative")
        if self.task not in ("classification", "regression"):
            raise ValueError(f"unknown task {self.task!r}")

    @property
    def elite_count(self) -> int:
        # round-half-up, minimum 1
        return max(1, math.floor(self.elitism_fraction * self.population_size + 0.5))

    @classmethod
    def classification(cls, rng_seed: int = 0, **overrides) -> "GaConfig":
        base = dict(generations=200, crossover_prob=0.80, elitism_fraction=0.07,
                    task="classification", rng_seed=rng_seed)
        base.update(overrides)
        return cls(**base)

    @classmethod
    def regression(cls, rng_seed: int = 0, **overrides) -> "GaConfig":
        base = dict(generations=250, crossover_prob=0.85, elitism_fraction=0.10,
                    task="regression", rng_seed=rng_seed)
        base.update(overrides)
        return cls(**base)


@dataclass
class GaTrace:
    """Per-generation observability: index 0 is the initial population."""

    best_fitness: np.ndarray
    mean_fitness: np.ndarray
    best_selected: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("generation,best_fitness,mean_fitness,best_selected_count\n")
            for g in range(len(self.best_fitness)):
                fh.write(
                    f"{g},{float(self.best_fitness[g])!r},{float(self.mean_fitness[g])!r},"
                    f"{int(self.best_selected[g])}\n"
                )


def fitness(c: Chromosome, features, targets, task: str) -> float:
    """Training loss of a chromosome: hinge for classification, smooth-L1
    for regression. Lower is better."""
    preds = chromosome_predict_many(c, features)
    if task == "classification":
        return hinge_loss(preds, targets)
    if task == "regression":
        return smooth_l1_loss(preds, targets)
    raise ValueError(f"unknown task {task!r}")


def population_fitness(population, features, targets, task: str, threads: int = 1) -> np.ndarray:
    """Evaluate every individual. Individuals are always evaluated one at a
    time (same code path as :func:`fitness`), so values are bit-identical
    for any thread count."""
    idx = range(len(population))
    if threads <= 1 or len(population) <= _EVAL_CHUNK:
        return np.array([fitness(population[i], features, targets, task) for i in idx])
    chunks = [list(idx)[k : k + _EVAL_CHUNK] for k in range(0, len(population), _EVAL_CHUNK)]

    def run_chunk(chunk):
        return [fitness(population[i], features, targets, task) for i in chunk]

    out = np.empty(len(population))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for chunk, values in zip(chunks, pool.map(run_chunk, chunks)):
            out[chunk] = values
    return out


def _stream(seed: int, generation: int, slot: int) -> np.random.Generator:
    # Stateless derivation: one independent stream per (generation, slot).
    return np.random.default_rng([int(seed), int(generation), int(slot)])


def init_population(seed_model: LinearModel, config: GaConfig, n_features: int | None = None):
    """Population of size ``population_size``: individual 0 is the exact
    seed model (all-ones mask); the rest are Gaussian-perturbed copies with
    masks sampled at ``init_mask_density``."""
    n_f = seed_model.dim if n_features is None else n_features
    if seed_model.dim != n_f:
        raise DimMismatchError(f"seed model dim {seed_model.dim} != n_features {n_f}")
    std_w = float(np.std(seed_model.weights))
    sigma = config.init_perturb_sigma * std_w
    population = [
        Chromosome(mask=np.ones(n_f, dtype=bool), weights=seed_model.weights.copy(),
                   bias=seed_model.bias)
    ]
    for slot in range(1, config.population_size):
        rng = _stream(config.rng_seed, 0, slot)
        weights = seed_model.weights + rng.standard_normal(n_f) * sigma
        bias = seed_model.bias + float(rng.standard_normal()) * sigma
        mask = rng.random(n_f) < config.init_mask_density
        population.append(Chromosome(mask=mask, weights=weights, bias=bias))
    return population


def select_tournament(population, fitnesses, config: GaConfig, rng: np.random.Generator) -> int:
    """Uniform tournament with replacement; lowest fitness wins, ties go to
    the lowest index."""
    if len(population) == 0:
        raise ValueError("population is empty")
    entrants = rng.integers(0, len(population), size=config.tournament_size)
    best = entrants[0]
    for i in entrants[1:]:
        if fitnesses[i] < fitnesses[best] or (fitnesses[i] == fitnesses[best] and i < best):
            best = i
    return int(best)


def crossover(a: Chromosome, b: Chromosome, config: GaConfig, rng: np.random.Generator):
    """With probability ``crossover_prob``: uniform mask crossover plus a
    single-alpha arithmetic blend of weights and bias. Otherwise the parents
    come back unchanged."""
    if a.n_features != b.n_features:
        raise DimMismatchError("parents must have equal length")
    if rng.random() >= config.crossover_prob:
        return a, b
    alpha = rng.random()
    coins = rng.random(a.n_features) < 0.5
    mask1 = np.where(coins, a.mask, b.mask)
    mask2 = np.where(coins, b.mask, a.mask)
    w1 = alpha * a.weights + (1.0 - alpha) * b.weights
    w2 = (1.0 - alpha) * a.weights + alpha * b.weights
    b1 = alpha * a.bias + (1.0 - alpha) * b.bias
    b2 = (1.0 - alpha) * a.bias + alpha * b.bias
    return Chromosome(mask1, w1, b1), Chromosome(mask2, w2, b2)


def mutate(c: Chromosome, config: GaConfig, rng: np.random.Generator) -> Chromosome:
    """Independent bit flips on the mask; Gaussian noise on every weight and
    the bias. Requires a config with resolved mutation rates."""
    p_bit = config.bit_mutation_prob
    sigma = config.weight_mutation_sigma
    if p_bit is None or sigma is None:
        raise ValueError("mutate needs resolved bit_mutation_prob/weight_mutation_sigma "
                         "(see resolve_operator_params)")
    flips = rng.random(c.n_features) < p_bit
    mask = c.mask ^ flips
    weights = c.weights + rng.standard_normal(c.n_features) * sigma
    bias = c.bias + float(rng.standard_normal()) * sigma
    return Chromosome(mask=mask, weights=weights, bias=bias)


def resolve_operator_params(config: GaConfig, n_features: int, seed_model: LinearModel) -> GaConfig:
    """Fill in data-dependent defaults for the mutation operators."""
    p_bit = config.bit_mutation_prob
    if p_bit is None:
        p_bit = 1.0 / n_features
    sigma = config.weight_mutation_sigma
    if sigma is None:
        sigma = max(0.01 * float(np.std(seed_model.weights)), 1e-3)
    return replace(config, bit_mutation_prob=p_bit, weight_mutation_sigma=sigma)


def evolve(features, targets, seed_model: LinearModel, config: GaConfig, threads: int = 1):
    """Run the genetic search and return ``(best_chromosome, trace)``.

    Each generation keeps the ``elite_count`` lowest-fitness individuals
    unchanged and fills the rest with tournament -> crossover -> mutation,
    so the per-generation best fitness never increases. The returned best is
    the lowest-fitness individual ever evaluated (first seen wins ties).
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimMismatchError(f"features {X.shape} inconsistent with targets {y.shape}")
    n_f = X.shape[1]
    if seed_model.dim != n_f:
        raise DimMismatchError(f"seed model dim {seed_model.dim} != feature dim {n_f}")
    config = resolve_operator_params(config, n_f, seed_model)

    population = init_population(seed_model, config)
    fitnesses = population_fitness(population, X, y, config.task, threads)

    best_trace, mean_trace, sel_trace = [], [], []
    best_chrom = None
    best_fit = math.inf

    def record(population, fitnesses):
        nonlocal best_chrom, best_fit
        order = np.argsort(fitnesses, kind="stable")
        top = int(order[0])
        best_trace.append(float(fitnesses[top]))
        mean_trace.append(float(np.mean(fitnesses)))
        sel_trace.append(selected_feature_count(population[top]))
        if fitnesses[top] < best_fit:
            best_fit = float(fitnesses[top])
            best_chrom = population[top]
        return order

    order = record(population, fitnesses)
    for gen in range(1, config.generations + 1):
        elites = [population[i] for i in order[: config.elite_count]]
        children = []
        pair = 0
        while len(children) < config.population_size - config.elite_count:
            rng = _stream(config.rng_seed, gen, pair)
            ia = select_tournament(population, fitnesses, config, rng)
            ib = select_tournament(population, fitnesses, config, rng)
            c1, c2 = crossover(population[ia], population[ib], config, rng)
            children.append(mutate(c1, config, rng))
            if len(children) < config.population_size - config.elite_count:
                children.append(mutate(c2, config, rng))
            pair += 1
        population = elites + children
        fitnesses = population_fitness(population, X, y, config.task, threads)
        order = record(population, fitnesses)

    trace = GaTrace(
        best_fitness=np.array(best_trace),
        mean_fitness=np.array(mean_trace),
        best_selected=np.array(sel_trace, dtype=np.int64),
    )
    return best_chrom, trace


def chromosome_as_model(c: Chromosome, task: str) -> LinearModel:
    """Dense view of a chromosome: weights zeroed where the mask is off."""
    return LinearModel(weights=c.weights * c.mask, bias=c.bias, task=task)
