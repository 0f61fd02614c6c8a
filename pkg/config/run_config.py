"""
Конфигурация запуска: схема pydantic, пресеты и переопределения.

Приоритет: пресет < --config JSON < --set key=value < явные флаги CLI.
"""
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.exceptions import ConfigError
from core.farm_dynamics import Efficiencies
from core.hydro_oracle import SamplingRanges
from core.neural import TrainConfig
from core.optimizer import Bounds, OptimizerConfig, box_half_width
from core.surrogate import ReferenceMaxima, SurrogateConfig
from core.wave_climate import FrequencyGrid

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


def _ordered(name: str, interval: Interval) -> Interval:
    if interval[0] > interval[1]:
        raise ValueError(f"{name} interval reversed: {interval}")
    return interval


class PhysicsConfig(Section):
    rho: float = Field(1025.0, gt=0)
    g: float = Field(9.81, gt=0)
    depth: float = Field(50.0, gt=0)


class GridConfig(Section):
    omega_min: float = Field(0.1, gt=0)
    omega_max: float = Field(7.0, gt=0)
    n_w: int = Field(25, ge=2)

    @model_validator(mode="after")
    def _check(self):
        if self.omega_min >= self.omega_max:
            raise ValueError(f"omega_min {self.omega_min} must be below omega_max {self.omega_max}")
        return self

    def to_grid(self) -> FrequencyGrid:
        return FrequencyGrid.uniform(self.omega_min, self.omega_max, self.n_w)


class TrainingDataConfig(Section):
    radius: Interval = (0.5, 20.0)
    draft: Interval = (0.5, 20.0)
    aspect: Interval = (0.1, 10.0)
    distance_max: float = Field(1000.0, gt=0)
    theta_max: float = Field(math.pi, gt=0, le=math.pi)
    n_one: int = Field(60, ge=1)
    n_two: int = Field(200, ge=1)
    safe_factor: float = Field(10.0, ge=0)

    @model_validator(mode="after")
    def _check(self):
        for name in ("radius", "draft", "aspect"):
            _ordered(name, getattr(self, name))
        return self

    def to_ranges(self) -> SamplingRanges:
        return SamplingRanges(self.radius, self.draft, self.aspect, self.distance_max,
                              self.theta_max, self.safe_factor)


class NetworkConfig(Section):
    hidden_one: int = Field(32, ge=1)
    hidden_two: int = Field(64, ge=1)
    hidden_aux: int = Field(16, ge=1)
    method: Literal["lm", "gd"] = "lm"
    max_epochs: int = Field(3000, ge=1)
    patience: int = Field(1000, ge=0)
    learning_rate: float = Field(0.01, gt=0)
    lr_growth: float = Field(1.05, ge=1)
    lr_shrink: float = Field(0.5, gt=0, lt=1)
    split: Tuple[float, float, float] = (0.70, 0.15, 0.15)
    spike_threshold: float = Field(5.0, ge=0)

    @model_validator(mode="after")
    def _check(self):
        if self.patience > self.max_epochs:
            raise ValueError(f"patience {self.patience} exceeds max_epochs {self.max_epochs}")
        if abs(sum(self.split) - 1.0) > 1e-9 or min(self.split) < 0:
            raise ValueError(f"split fractions must be non-negative and sum to 1, got {self.split}")
        return self

    def to_train(self, seed: int) -> TrainConfig:
        return TrainConfig(max_epochs=self.max_epochs, patience=self.patience, method=self.method,
                           learning_rate=self.learning_rate, lr_growth=self.lr_growth,
                           lr_shrink=self.lr_shrink, split=self.split, seed=seed)


class SurrogateSection(Section):
    mode: Literal["ann", "oracle"] = "ann"
    strict: bool = True


class ClimateConfig(Section):
    samples_path: Optional[str] = None
    n_gq: int = Field(6, ge=1)
    n_yr: int = Field(30, ge=1)
    per_year: int = Field(240, ge=2)
    hs_box: Interval = (0.25, 8.0)
    tp_box: Interval = (2.0, 20.0)
    hs_bandwidth: Optional[float] = Field(None, gt=0)
    tp_bandwidth: Optional[float] = Field(None, gt=0)
    year_average: bool = True

    @model_validator(mode="after")
    def _check(self):
        _ordered("hs_box", self.hs_box)
        _ordered("tp_box", self.tp_box)
        if (self.hs_bandwidth is None) != (self.tp_bandwidth is None):
            raise ValueError("set both hs_bandwidth and tp_bandwidth or neither")
        return self

    def bandwidth(self) -> Optional[Dict[str, float]]:
        if self.hs_bandwidth is None:
            return None
        return {"hs": self.hs_bandwidth, "tp": self.tp_bandwidth}


class EfficiencyConfig(Section):
    pcc: float = Field(0.8, ge=0, le=1)
    oa: float = Field(0.95, ge=0, le=1)
    t: float = Field(0.98, ge=0, le=1)

    def to_efficiencies(self) -> Efficiencies:
        return Efficiencies(self.pcc, self.oa, self.t)


class OptimizerSection(Section):
    n_wec: int = Field(3, ge=1)
    budget: int = Field(300, ge=1)
    population_size: Optional[int] = Field(None, ge=4)
    mutation: float = Field(0.7, gt=0, le=2)
    crossover: float = Field(0.9, ge=0, le=1)
    radius: Interval = (0.5, 10.0)
    draft: Interval = (0.5, 10.0)
    stiffness: Interval = (-3e8, 3e8)
    damping: Interval = (0.0, 3e8)
    half_width: Optional[float] = Field(None, gt=0)
    condition_limit: float = Field(1e12, gt=1)
    max_feasible_tries: int = Field(100, ge=1)
    baseline_count: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check(self):
        for name in ("radius", "draft", "stiffness", "damping"):
            _ordered(name, getattr(self, name))
        if self.radius[0] <= 0 or self.draft[0] <= 0 or self.damping[0] < 0:
            raise ValueError("radius/draft lower bounds must be positive and damping non-negative")
        return self

    def to_bounds(self) -> Bounds:
        return Bounds(self.radius, self.draft, self.stiffness, self.damping,
                      self.half_width or box_half_width(self.n_wec))


class ValidateConfig(Section):
    radius: float = Field(8.0, gt=0)
    draft: float = Field(4.0, gt=0)
    pair_radius: float = Field(15.0, gt=0)
    pair_draft: float = Field(8.0, gt=0)
    distance: float = Field(200.0, gt=0)
    theta: float = Field(0.078, ge=0, le=math.pi)


class PathsConfig(Section):
    one_body: str = "hydro_one.csv"
    two_body: str = "hydro_two.csv"
    bundle: str = "bundle.json"
    metrics: str = "metrics.json"
    climate: str = "climate.json"
    wave_samples: str = "wave_samples.csv"
    bem_one: Optional[str] = None
    bem_two: Optional[str] = None


class ReportConfig(Section):
    record_wall_time: bool = True


class RunConfig(Section):
    preset: Literal["desk", "paper"] = "desk"
    seed: int = Field(0, ge=0)
    threads: int = Field(1, ge=1)
    physics: PhysicsConfig = Field(default_factory=PhysicsConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    training_data: TrainingDataConfig = Field(default_factory=TrainingDataConfig)
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    surrogate: SurrogateSection = Field(default_factory=SurrogateSection)
    climate: ClimateConfig = Field(default_factory=ClimateConfig)
    efficiencies: EfficiencyConfig = Field(default_factory=EfficiencyConfig)
    optimizer: OptimizerSection = Field(default_factory=OptimizerSection)
    validate_: ValidateConfig = Field(default_factory=ValidateConfig, alias="validate")
    paths: PathsConfig = Field(default_factory=PathsConfig)
    report: ReportConfig = Field(default_factory=ReportConfig)

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    def canonical(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)

    def config_hash(self) -> str:
        payload = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def surrogate_config(self) -> SurrogateConfig:
        maxima = ReferenceMaxima(radius=self.training_data.radius[1], draft=self.training_data.draft[1],
                                 omega=self.grid.omega_max, distance=self.training_data.distance_max,
                                 theta=self.training_data.theta_max)
        net = self.network
        return SurrogateConfig(mode=self.surrogate.mode, hidden_one=net.hidden_one, hidden_two=net.hidden_two,
                               hidden_aux=net.hidden_aux, spike_threshold=net.spike_threshold,
                               strict=self.surrogate.strict, train=net.to_train(self.seed), maxima=maxima,
                               aspect=self.training_data.aspect)

    def optimizer_config(self) -> OptimizerConfig:
        opt = self.optimizer
        return OptimizerConfig(population_size=opt.population_size, mutation=opt.mutation,
                               crossover=opt.crossover, threads=self.threads,
                               max_feasible_tries=opt.max_feasible_tries, condition_limit=opt.condition_limit,
                               year_average=self.climate.year_average,
                               efficiencies=self.efficiencies.to_efficiencies(),
                               safe_factor=self.training_data.safe_factor)


PRESETS: Dict[str, Dict[str, Any]] = {
    "desk": {
        "grid": {"n_w": 25},
        "climate": {"n_gq": 6},
        "training_data": {"n_one": 60, "n_two": 200},
        "network": {"max_epochs": 3000, "patience": 1000},
    },
    "paper": {
        "grid": {"n_w": 50},
        "climate": {"n_gq": 20, "n_yr": 30},
        "training_data": {"n_one": 225, "n_two": 1000},
        "network": {"max_epochs": 30000, "patience": 10000},
    },
}


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def parse_override(item: str) -> Tuple[List[str], Any]:
    """'network.max_epochs=500' -> (['network', 'max_epochs'], 500); значение JSON или просто строка"""
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override {item!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def _apply_override(document: Dict[str, Any], path: List[str], value: Any) -> None:
    node = document
    for part in path[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"cannot override {'.'.join(path)}: {part} is not a section")
        node = child
    node[path[-1]] = value


def load_run_config(preset: Optional[str] = None, config_path: Optional[Union[str, Path]] = None,
                    overrides: Sequence[str] = (), **flags: Any) -> RunConfig:
    """Собирает проверенный RunConfig из всех источников; при ошибке ConfigError"""
    document: Dict[str, Any] = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}")
        if not isinstance(document, dict):
            raise ConfigError(f"{path}: top level must be an object")

    name = preset or document.get("preset") or "desk"
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    merged = _merge(PRESETS[name], document)
    merged["preset"] = name
    for item in overrides:
        path, value = parse_override(item)
        _apply_override(merged, path, value)
    for key, value in flags.items():
        if value is not None:
            merged[key] = value

    try:
        cfg = RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration:\n{e}")
    logger.debug(f"[CONFIG] preset={cfg.preset} seed={cfg.seed} hash={cfg.config_hash()[:12]}")
    return cfg
