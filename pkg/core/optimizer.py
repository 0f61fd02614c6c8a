"""
Совместная оптимизация геометрии, управления и раскладки.

Вектор проекта: [R, D, K_1..K_N, B_1..B_N, x_2, y_2, ..., x_N, y_N], тело 1
закреплено в начале координат. Цель: -p_v + penalty * sum(max(0, r)^2);
у допустимого проекта штраф нулевой. Поиск ведет дифференциальная эволюция
rand/1/bin, генератор каждого поколения получает свое зерно.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from core.exceptions import DomainError, InfeasibleDesignError, SingularityError
from core.farm_dynamics import (
    CONDITION_LIMIT, Efficiencies, evaluate_farm_power, spectral_weight_matrix,
)
from core.models import SAFE_DISTANCE_FACTOR, FarmDesign, PtoParams, WecGeometry, minimum_spacing
from core.surrogate import SurrogateBundle
from core.wave_climate import FrequencyGrid, WaveClimate

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9


def box_half_width(n_wec: int) -> float:
    """0.5 * sqrt(2 N 10^4) м, то есть 0.5 * sqrt(20000 N)"""
    return 0.5 * float(np.sqrt(20000.0 * n_wec))


@dataclass(frozen=True)
class Bounds:
    radius: Tuple[float, float] = (0.5, 10.0)
    draft: Tuple[float, float] = (0.5, 10.0)
    stiffness: Tuple[float, float] = (-3e8, 3e8)
    damping: Tuple[float, float] = (0.0, 3e8)
    half_width: float = box_half_width(3)

    @classmethod
    def for_farm(cls, n_wec: int, **overrides) -> "Bounds":
        overrides.setdefault("half_width", box_half_width(n_wec))
        return cls(**overrides)

    def check(self) -> None:
        for name in ("radius", "draft", "stiffness", "damping"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise DomainError(f"{name} bounds reversed: [{lo}, {hi}]")
        if self.radius[0] <= 0 or self.draft[0] <= 0:
            raise DomainError("radius and draft lower bounds must be positive")
        if self.damping[0] < 0:
            raise DomainError("PTO damping lower bound must be non-negative")
        if self.half_width <= 0:
            raise DomainError(f"farm box half-width must be positive, got {self.half_width}")

    def vectors(self, n_wec: int) -> Tuple[np.ndarray, np.ndarray]:
        lower = np.concatenate([[self.radius[0], self.draft[0]],
                                np.full(n_wec, self.stiffness[0]), np.full(n_wec, self.damping[0]),
                                np.full(2 * (n_wec - 1), -self.half_width)])
        upper = np.concatenate([[self.radius[1], self.draft[1]],
                                np.full(n_wec, self.stiffness[1]), np.full(n_wec, self.damping[1]),
                                np.full(2 * (n_wec - 1), self.half_width)])
        return lower, upper


def design_dimension(n_wec: int) -> int:
    return 2 + 2 * n_wec + 2 * (n_wec - 1)


def encode_design(design: FarmDesign) -> np.ndarray:
    if np.any(design.layout[0] != 0.0):
        raise DomainError(f"body 1 must sit at the origin, found {design.layout[0].tolist()}")
    return np.concatenate([[design.geometry.radius, design.geometry.draft],
                           design.pto.stiffness, design.pto.damping, design.layout[1:].ravel()])


def decode_design(x, n_wec: int) -> FarmDesign:
    x = np.asarray(x, dtype=float)
    if x.shape != (design_dimension(n_wec),):
        raise DomainError(f"design vector of shape {x.shape}, expected ({design_dimension(n_wec)},) for N={n_wec}")
    layout = np.vstack([np.zeros((1, 2)), x[2 + 2 * n_wec:].reshape(n_wec - 1, 2)])
    pto = PtoParams(x[2:2 + n_wec], x[2 + n_wec:2 + 2 * n_wec])
    return FarmDesign(WecGeometry(float(x[0]), float(x[1])), pto, layout)


def distance_constraints(layout, radius: float, factor: float = SAFE_DISTANCE_FACTOR) -> np.ndarray:
    """2R + s_d - L_pq для каждой пары p < q; допустимо, когда все <= 0"""
    layout = np.atleast_2d(np.asarray(layout, dtype=float))
    idx_p, idx_q = np.triu_indices(layout.shape[0], k=1)
    delta = layout[idx_q] - layout[idx_p]
    return minimum_spacing(radius, factor) - np.hypot(delta[:, 0], delta[:, 1])


def box_residuals(x, bounds: Bounds, n_wec: int) -> np.ndarray:
    """max(lower - x, x - upper) по компонентам; допустимо, когда все <= 0"""
    lower, upper = bounds.vectors(n_wec)
    x = np.asarray(x, dtype=float)
    return np.maximum(lower - x, x - upper)


@dataclass(frozen=True)
class OptimizerConfig:
    population_size: Optional[int] = None
    mutation: float = 0.7
    crossover: float = 0.9
    threads: int = 1
    max_feasible_tries: int = 100
    condition_limit: float = CONDITION_LIMIT
    year_average: bool = True
    efficiencies: Efficiencies = field(default_factory=Efficiencies)
    safe_factor: float = SAFE_DISTANCE_FACTOR

    def population(self, n_wec: int) -> int:
        return self.population_size or 15 + n_wec


@dataclass(frozen=True)
class Outcome:
    """Сырая оценка одного вектора проекта"""
    p_v: float
    violation: float
    singular: bool

    @property
    def feasible(self) -> bool:
        return self.violation == 0.0 and not self.singular


class Evaluator:
    """Штрафная целевая функция для одного бандла и климата"""

    def __init__(self, bundle: SurrogateBundle, climate: WaveClimate, n_wec: int, bounds: Bounds,
                 cfg: Optional[OptimizerConfig] = None, grid: Optional[FrequencyGrid] = None):
        self.bundle = bundle
        self.climate = climate
        self.n_wec = n_wec
        self.bounds = bounds
        self.cfg = cfg or OptimizerConfig()
        self.grid = grid or bundle.grid
        self.weights = spectral_weight_matrix(climate, self.grid)
        self.penalty = 1.0

    def residuals(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        layout = np.vstack([np.zeros((1, 2)), x[2 + 2 * self.n_wec:].reshape(self.n_wec - 1, 2)])
        return np.concatenate([distance_constraints(layout, float(x[0]), self.cfg.safe_factor),
                               box_residuals(x, self.bounds, self.n_wec)])

    def violation(self, x) -> float:
        r = self.residuals(x)
        r = r[r > FEASIBILITY_TOL]
        return float(np.sum(r ** 2))

    def outcome(self, x) -> Outcome:
        violation = self.violation(x)
        try:
            design = decode_design(x, self.n_wec)
            result = evaluate_farm_power(design, self.bundle, self.climate, self.grid,
                                         self.cfg.efficiencies, self.weights, self.cfg.year_average,
                                         self.cfg.condition_limit)
        except SingularityError as e:
            logger.debug(f"[OPT][EVAL] singular design penalized: {e}")
            return Outcome(float("nan"), violation, True)
        except (InfeasibleDesignError, DomainError) as e:
            # перекрытие тел или R, D вне диапазона суррогата: мощность не определена
            if violation == 0.0:
                raise
            logger.debug(f"[OPT][EVAL] power undefined for an infeasible design: {e}")
            return Outcome(float("nan"), violation, False)
        return Outcome(result.p_v, violation, False)

    def objective(self, outcome: Outcome) -> float:
        """
        -p_v + penalty * sum(max(0, r)^2). Где p_v не определена (перекрытие,
        сингулярность), вместо нее берется 0.
        """
        p_v = outcome.p_v if np.isfinite(outcome.p_v) else 0.0
        if outcome.violation > 0.0:
            return -p_v + self.penalty * outcome.violation
        if outcome.singular:
            return self.penalty
        return -p_v

    def __call__(self, x) -> float:
        return self.objective(self.outcome(x))


def evaluate(design: FarmDesign, bundle: SurrogateBundle, climate: WaveClimate,
             bounds: Optional[Bounds] = None, cfg: Optional[OptimizerConfig] = None,
             penalty: float = 1.0) -> float:
    """Штрафная цель одного проекта"""
    bounds = bounds or Bounds.for_farm(design.n_wec)
    evaluator = Evaluator(bundle, climate, design.n_wec, bounds, cfg)
    evaluator.penalty = penalty
    return evaluator(encode_design(design))


def _generator(seed: Union[int, np.random.Generator]) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_feasible(n_wec: int, bounds: Bounds, seed: Union[int, np.random.Generator] = 0,
                    max_tries: int = 100, factor: float = SAFE_DISTANCE_FACTOR) -> np.ndarray:
    """
    Геометрия и управление равномерно; тела ставятся по одному, каждое
    перевыбирается, пока не отстоит на 2R + s_d от уже поставленных.
    """
    bounds.check()
    rng = _generator(seed)
    radius = rng.uniform(*bounds.radius)
    draft = rng.uniform(*bounds.draft)
    stiffness = rng.uniform(*bounds.stiffness, size=n_wec)
    damping = rng.uniform(*bounds.damping, size=n_wec)
    spacing = minimum_spacing(radius, factor)
    placed = [np.zeros(2)]
    for body in range(2, n_wec + 1):
        for _ in range(max_tries):
            candidate = rng.uniform(-bounds.half_width, bounds.half_width, size=2)
            if all(np.hypot(*(candidate - other)) >= spacing for other in placed):
                placed.append(candidate)
                break
        else:
            raise InfeasibleDesignError(
                f"could not place body {body} of {n_wec} at {spacing:.4g} m spacing (R={radius:.4g}) "
                f"inside +-{bounds.half_width:.4g} m after {max_tries} tries; "
                f"use a smaller radius bound or a larger farm box")
    layout = np.vstack(placed)
    return np.concatenate([[radius, draft], stiffness, damping, layout[1:].ravel()])


def random_baseline(n_wec: int, bounds: Bounds, evaluator: Evaluator, count: int = 20,
                    seed: int = 0) -> Tuple[np.ndarray, float]:
    """Лучший из `count` случайных допустимых проектов"""
    rng = np.random.default_rng([seed, 7919])
    best_x, best_f = None, np.inf
    for _ in range(count):
        x = random_feasible(n_wec, bounds, rng, evaluator.cfg.max_feasible_tries, evaluator.cfg.safe_factor)
        f = evaluator(x)
        if f < best_f:
            best_x, best_f = x, f
    return best_x, float(best_f)


@dataclass
class TracePoint:
    evaluation: int
    objective: float
    best: float


@dataclass
class OptimResult:
    n_wec: int
    best_vector: np.ndarray
    best_objective: float
    p_v: float
    feasible: bool
    residuals: np.ndarray
    trace: List[TracePoint]
    evaluations: int
    generations: int
    penalty: float
    seed: int
    wall_time: float = 0.0

    @property
    def design(self) -> FarmDesign:
        return decode_design(self.best_vector, self.n_wec)

    def to_dict(self, record_wall_time: bool = True) -> dict:
        design = self.design
        document = {
            "kind": "optimization",
            "n_wec": self.n_wec,
            "seed": self.seed,
            "feasible": self.feasible,
            "best_objective": self.best_objective,
            "p_v": self.p_v if self.feasible else None,
            "radius": design.geometry.radius,
            "draft": design.geometry.draft,
            "stiffness": design.pto.stiffness.tolist(),
            "damping": design.pto.damping.tolist(),
            "layout": design.layout.tolist(),
            "max_residual": float(np.max(self.residuals)) if self.residuals.size else 0.0,
            "residuals": self.residuals.tolist(),
            "evaluations": self.evaluations,
            "generations": self.generations,
            "penalty": self.penalty,
        }
        if record_wall_time:
            document["wall_time"] = self.wall_time
        return document


def _initial_population(n_wec: int, size: int, bounds: Bounds, cfg: OptimizerConfig, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 0])
    lower, upper = bounds.vectors(n_wec)
    members = []
    for _ in range(size):
        try:
            members.append(random_feasible(n_wec, bounds, rng, cfg.max_feasible_tries, cfg.safe_factor))
        except InfeasibleDesignError as e:
            logger.warning(f"[OPT][INIT] {e}; seeding this member uniformly in the box")
            members.append(rng.uniform(lower, upper))
    return np.vstack(members)


def optimize(n_wec: int, bounds: Bounds, bundle: SurrogateBundle, climate: WaveClimate,
             budget: int = 300, seed: int = 0, cfg: Optional[OptimizerConfig] = None,
             grid: Optional[FrequencyGrid] = None) -> OptimResult:
    """
    Дифференциальная эволюция с точным бюджетом вычислений.

    Первое поколение это случайная допустимая популяция; по ней же вес
    штрафа фиксируется как 10^6 медиан |p_v| допустимых членов. Каждое
    следующее поколение берет default_rng([seed, generation]), поэтому
    вычисляемые точки не зависят от числа потоков.
    """
    cfg = cfg or OptimizerConfig()
    bounds.check()
    if n_wec < 1:
        raise DomainError(f"N_wec must be >= 1, got {n_wec}")
    size = cfg.population(n_wec)
    if size < 4:
        raise DomainError(f"population of {size} is too small for rand/1 mutation")
    if budget < size:
        raise DomainError(f"budget {budget} is below the population size {size}")

    started = time.perf_counter()
    evaluator = Evaluator(bundle, climate, n_wec, bounds, cfg, grid)
    lower, upper = bounds.vectors(n_wec)
    pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
    run = pool.map if pool else map

    trace: List[TracePoint] = []
    best = {"f": np.inf, "x": None, "feasible": False, "p_v": float("nan")}

    def record(xs, outcomes) -> np.ndarray:
        values = []
        for x, out in zip(xs, outcomes):
            f = evaluator.objective(out)
            values.append(f)
            better_feasible = out.feasible and (not best["feasible"] or f < best["f"])
            if better_feasible or (not best["feasible"] and not out.feasible and f < best["f"]):
                best.update(f=f, x=np.array(x), feasible=out.feasible, p_v=out.p_v)
            previous = trace[-1].best if trace else np.inf
            trace.append(TracePoint(len(trace) + 1, f, min(previous, f)))
        return np.asarray(values)

    try:
        population = _initial_population(n_wec, size, bounds, cfg, seed)
        outcomes = list(run(evaluator.outcome, population))
        feasible_pv = [abs(o.p_v) for o in outcomes if o.feasible]
        scale = float(np.median(feasible_pv)) if feasible_pv else 0.0
        evaluator.penalty = 1e6 * scale if scale > 0 else 1.0
        fitness = record(population, outcomes)
        generation = 1
        logger.info(f"[OPT][INIT] N={n_wec}, population {size}, {len(feasible_pv)} feasible, "
                    f"penalty {evaluator.penalty:.4g}")

        while len(trace) < budget:
            rng = np.random.default_rng([seed, generation])
            count = min(size, budget - len(trace))
            dim = population.shape[1]
            trials = []
            for i in range(count):
                choices = [j for j in range(size) if j != i]
                r1, r2, r3 = rng.choice(choices, size=3, replace=False)
                mutant = population[r1] + cfg.mutation * (population[r2] - population[r3])
                cross = rng.random(dim) < cfg.crossover
                cross[rng.integers(dim)] = True
                trials.append(np.clip(np.where(cross, mutant, population[i]), lower, upper))
            trial_fitness = record(trials, list(run(evaluator.outcome, trials)))
            for i, trial in enumerate(trials):
                if trial_fitness[i] <= fitness[i]:
                    population[i] = trial
                    fitness[i] = trial_fitness[i]
            logger.debug(f"[OPT][GEN] {generation}: best {trace[-1].best:.6g} after {len(trace)} evaluations")
            generation += 1
    finally:
        if pool:
            pool.shutdown()

    residuals = evaluator.residuals(best["x"])
    result = OptimResult(
        n_wec=n_wec, best_vector=best["x"], best_objective=float(best["f"]),
        p_v=float(best["p_v"]) if best["feasible"] else float("nan"),
        feasible=bool(best["feasible"]), residuals=residuals, trace=trace,
        evaluations=len(trace), generations=generation, penalty=evaluator.penalty, seed=seed,
        wall_time=time.perf_counter() - started,
    )
    if result.feasible:
        logger.info(f"[OPT][DONE] N={n_wec}: p_v={result.p_v:.6g} W/m3 after {result.evaluations} evaluations")
    else:
        logger.warning(f"[OPT][DONE] N={n_wec}: no feasible design in {result.evaluations} evaluations")
    return result
