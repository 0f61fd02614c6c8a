"""
Гидродинамический суррогат: нормировка входов и выходов, удаление выбросов,
масштабирование выходов по записям и бандл из 30 сетей (10 сетей формы,
у каждой сеть логарифма размаха и сеть смещения), заменяющий оракул.

Бандл в режиме "oracle" сетей не содержит и отвечает напрямую через
core.hydro_oracle.
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from core.artifact_store import ArtifactStore
from core.exceptions import DataError, DomainError
from core.hydro_oracle import (
    ONE_BODY_TARGETS, TWO_BODY_TARGETS, HydroDataset, pair_body, single_body,
)
from core.models import GRAVITY, RHO, SAFE_DISTANCE_FACTOR, PairConfig, WecGeometry
from core.neural import MlpModel, TrainConfig, mlp_forward, mlp_init, mlp_train
from core.wave_climate import FrequencyGrid

logger = logging.getLogger(__name__)

BUNDLE_KIND = "surrogate_bundle"
RANGE_FLOOR = 1e-30
RADIATION_TARGETS = ("a11", "a12", "b11", "b12")


@dataclass(frozen=True)
class ReferenceMaxima:
    """Максимумы нормировки входов сетей"""
    radius: float = 20.0
    draft: float = 20.0
    omega: float = 7.0
    distance: float = 1000.0
    theta: float = float(np.pi)

    def to_dict(self) -> Dict[str, float]:
        return {"radius": self.radius, "draft": self.draft, "omega": self.omega,
                "distance": self.distance, "theta": self.theta}


# ==================== NORMALIZATION ====================

def _scaled(name: str, values, limit: float, strict: bool) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    bad = (arr < 0) | (arr > limit)
    if np.any(bad):
        worst = float(arr[bad].flat[0])
        if strict:
            raise DomainError(f"{name}={worst:.6g} outside the reference range [0, {limit:.6g}]")
        logger.warning(f"[SURROGATE][NORMALIZE] {name}={worst:.6g} clamped into [0, {limit:.6g}]")
        arr = np.clip(arr, 0.0, limit)
    return arr / limit


def normalize_inputs(maxima: ReferenceMaxima, radius, draft, omega=None, distance=None, theta=None,
                     strict: bool = True) -> np.ndarray:
    """
    Столбцы R~, D~ [, d~, theta~] [, omega~]; скаляры растягиваются до массивов.
    """
    columns = [_scaled("R", radius, maxima.radius, strict), _scaled("D", draft, maxima.draft, strict)]
    if distance is not None:
        columns.append(_scaled("d", distance, maxima.distance, strict))
    if theta is not None:
        columns.append(_scaled("theta", theta, maxima.theta, strict))
    if omega is not None:
        columns.append(_scaled("omega", omega, maxima.omega, strict))
    columns = np.broadcast_arrays(*[np.atleast_1d(c) for c in columns])
    return np.stack(columns, axis=-1)


def denormalize_inputs(maxima: ReferenceMaxima, v, names: Sequence[str] = ("R", "D", "omega")) -> Dict[str, np.ndarray]:
    """Обратное к normalize_inputs для перечисленных столбцов"""
    limits = {"R": maxima.radius, "D": maxima.draft, "d": maxima.distance,
              "theta": maxima.theta, "omega": maxima.omega}
    v = np.atleast_2d(np.asarray(v, dtype=float))
    return {name: v[:, i] * limits[name] for i, name in enumerate(names)}


def output_scale(name: str, radius: float, draft: float, omega, rho: float = RHO, g: float = GRAVITY):
    """Делитель, обезразмеривающий коэффициент"""
    displaced = rho * np.pi * radius ** 2 * draft
    if name.startswith("a"):
        return displaced
    if name.startswith("b"):
        return np.asarray(omega, dtype=float) * displaced
    return g * displaced


def normalize_outputs(values: Dict[str, np.ndarray], radius: float, draft: float, omega,
                      rho: float = RHO, g: float = GRAVITY) -> Dict[str, np.ndarray]:
    if radius <= 0 or draft <= 0:
        raise DomainError(f"normalization needs R, D > 0, got R={radius}, D={draft}")
    return {name: np.asarray(v) / output_scale(name, radius, draft, omega, rho, g)
            for name, v in values.items()}


def denormalize_outputs(values: Dict[str, np.ndarray], radius: float, draft: float, omega,
                        rho: float = RHO, g: float = GRAVITY) -> Dict[str, np.ndarray]:
    return {name: np.asarray(v) * output_scale(name, radius, draft, omega, rho, g)
            for name, v in values.items()}


# ==================== CLEANING AND SCALING ====================

def _local_scale(x: np.ndarray, i: int) -> float:
    """Медиана шагов вокруг i без двух шагов, касающихся самой точки"""
    n = x.size
    steps = np.abs(np.diff(x))
    if i == 0:
        nearby = steps[1:3]
    elif i == n - 1:
        nearby = steps[-3:-1]
    else:
        nearby = [abs(x[i + 1] - x[i - 1]) / 2.0]
        if i >= 2:
            nearby.append(steps[i - 2])
        if i + 1 < n - 1:
            nearby.append(steps[i + 1])
    return float(np.median(nearby))


def _spike_flags(x: np.ndarray, threshold: float) -> np.ndarray:
    n = x.size
    floor = 1e-8 * float(np.max(np.abs(x)))
    flags = np.zeros(n, dtype=bool)
    for i in range(n):
        if i == 0:
            r = x[0] - (2.0 * x[1] - x[2])
        elif i == n - 1:
            r = x[-1] - (2.0 * x[-2] - x[-3])
        else:
            # внутренний выброс обязан быть строгим локальным экстремумом
            if not ((x[i] > x[i - 1] and x[i] > x[i + 1]) or (x[i] < x[i - 1] and x[i] < x[i + 1])):
                continue
            r = x[i] - 0.5 * (x[i - 1] + x[i + 1])
        flags[i] = abs(r) > threshold * max(_local_scale(x, i), floor)
    # считаются только одиночные точки
    neighbour = np.zeros(n, dtype=bool)
    neighbour[1:] |= flags[:-1]
    neighbour[:-1] |= flags[1:]
    return flags & ~neighbour


def clean_spikes(series, threshold: float = 5.0) -> np.ndarray:
    """
    Один проход по omega: точка считается выбросом, если ее отскок от
    среднего соседей (на краю от линейной экстраполяции) больше `threshold`
    медианных шагов вокруг нее. Выброс заменяется средним соседей, на краю
    значением единственного соседа.
    """
    x = np.array(series, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise DomainError(f"spike cleaning needs a 1-D series of length >= 3, got shape {x.shape}")
    flags = _spike_flags(x, threshold)
    cleaned = x.copy()
    for i in np.nonzero(flags)[0]:
        if i == 0:
            cleaned[0] = x[1]
        elif i == x.size - 1:
            cleaned[-1] = x[-2]
        else:
            cleaned[i] = 0.5 * (x[i - 1] + x[i + 1])
    return cleaned


@dataclass
class ScalingNetworks:
    """Предсказывает (размах, смещение) записи по ее входам без частоты"""
    log_range: MlpModel
    offset: MlpModel
    log_range_mean: float
    log_range_std: float
    offset_mean: float
    offset_std: float

    def predict(self, features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        features = np.atleast_2d(features)
        log_range = mlp_forward(self.log_range, features)[:, 0] * self.log_range_std + self.log_range_mean
        offset = mlp_forward(self.offset, features)[:, 0] * self.offset_std + self.offset_mean
        return 10.0 ** log_range, offset

    def to_dict(self) -> dict:
        return {"log_range": self.log_range.to_dict(), "offset": self.offset.to_dict(),
                "log_range_mean": self.log_range_mean, "log_range_std": self.log_range_std,
                "offset_mean": self.offset_mean, "offset_std": self.offset_std}

    @classmethod
    def from_dict(cls, data: dict) -> "ScalingNetworks":
        return cls(MlpModel.from_dict(data["log_range"]), MlpModel.from_dict(data["offset"]),
                   float(data["log_range_mean"]), float(data["log_range_std"]),
                   float(data["offset_mean"]), float(data["offset_std"]))


@dataclass
class OutputScaling:
    """Линейное отображение частотного профиля каждой записи на [-1, 1]"""
    ranges: np.ndarray
    offsets: np.ndarray
    constant: np.ndarray
    shapes: np.ndarray
    networks: Optional[ScalingNetworks] = None
    metrics: Dict[str, float] = field(default_factory=dict)

    def reconstruct(self) -> np.ndarray:
        return self.offsets[:, None] + self.ranges[:, None] * self.shapes


def _standardize(values: np.ndarray) -> Tuple[np.ndarray, float, float]:
    mean = float(np.mean(values))
    std = float(np.std(values))
    if std == 0.0:
        std = 1.0
    return (values - mean) / std, mean, std


def fit_scaling(profiles, features=None, hidden: int = 16, train: Optional[TrainConfig] = None,
                target: Optional[str] = None) -> OutputScaling:
    """
    profiles: (n_records, n_w). Постоянный профиль получает размах 0,
    нулевую форму и флаг constant. Если переданы features
    (n_records, n_features), обучаются и сети размаха и смещения.
    """
    p = np.atleast_2d(np.asarray(profiles, dtype=float))
    hi = p.max(axis=1)
    lo = p.min(axis=1)
    ranges = 0.5 * (hi - lo)
    offsets = 0.5 * (hi + lo)
    constant = ranges == 0.0
    safe = np.where(constant, 1.0, ranges)
    shapes = np.where(constant[:, None], 0.0, (p - offsets[:, None]) / safe[:, None])
    scaling = OutputScaling(ranges, offsets, constant, shapes)
    if constant.any():
        logger.debug(f"[SURROGATE][SCALING] {target or 'profile'}: {int(constant.sum())} constant records")

    if features is not None:
        train = train or TrainConfig()
        x = np.atleast_2d(np.asarray(features, dtype=float))
        log_range, lr_mean, lr_std = _standardize(np.log10(np.maximum(ranges, RANGE_FLOOR)))
        offset, off_mean, off_std = _standardize(offsets)
        sizes = (x.shape[1], hidden, 1)
        range_net, range_report = mlp_train(mlp_init(sizes, train.seed), x, log_range[:, None],
                                            train, target=f"{target}.range")
        offset_net, offset_report = mlp_train(mlp_init(sizes, train.seed + 1), x, offset[:, None],
                                              replace(train, seed=train.seed + 1), target=f"{target}.offset")
        scaling.networks = ScalingNetworks(range_net, offset_net, lr_mean, lr_std, off_mean, off_std)
        scaling.metrics = {"range": range_report.test_rmse, "offset": offset_report.test_rmse}
    return scaling


# ==================== BUNDLE ====================

@dataclass
class TargetSurrogate:
    """Сеть формы и ее масштабные сети для одного коэффициента"""
    name: str
    features: Tuple[str, ...]
    shape: MlpModel
    scaling: ScalingNetworks

    def predict(self, features: np.ndarray, omega_tilde: np.ndarray) -> np.ndarray:
        """Нормированный коэффициент, форма (n_records, n_w)"""
        features = np.atleast_2d(features)
        n_rec, n_w = features.shape[0], omega_tilde.size
        rows = np.hstack([np.repeat(features, n_w, axis=0), np.tile(omega_tilde, n_rec)[:, None]])
        shape = mlp_forward(self.shape, rows)[:, 0].reshape(n_rec, n_w)
        ranges, offsets = self.scaling.predict(features)
        return offsets[:, None] + ranges[:, None] * shape

    def to_dict(self) -> dict:
        return {"name": self.name, "features": list(self.features), "shape": self.shape.to_dict(),
                "scaling": self.scaling.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "TargetSurrogate":
        return cls(data["name"], tuple(data["features"]), MlpModel.from_dict(data["shape"]),
                   ScalingNetworks.from_dict(data["scaling"]))


@dataclass(frozen=True)
class SurrogateConfig:
    mode: str = "ann"
    hidden_one: int = 32
    hidden_two: int = 64
    hidden_aux: int = 16
    spike_threshold: float = 5.0
    strict: bool = True
    train: TrainConfig = field(default_factory=TrainConfig)
    maxima: ReferenceMaxima = field(default_factory=ReferenceMaxima)
    aspect: Tuple[float, float] = (0.1, 10.0)


@dataclass
class SurrogateBundle:
    mode: str
    maxima: ReferenceMaxima
    grid: FrequencyGrid
    depth: float
    rho: float = RHO
    g: float = GRAVITY
    safe_factor: float = SAFE_DISTANCE_FACTOR
    strict: bool = True
    one: Dict[str, TargetSurrogate] = field(default_factory=dict)
    two: Dict[str, TargetSurrogate] = field(default_factory=dict)
    metrics: Dict[str, float] = field(default_factory=dict)
    aspect: Tuple[float, float] = (0.1, 10.0)
    extrapolations: int = field(default=0, repr=False, compare=False)

    @property
    def model_count(self) -> int:
        return 3 * (len(self.one) + len(self.two))

    def to_dict(self) -> dict:
        return {
            "kind": BUNDLE_KIND,
            "mode": self.mode,
            "maxima": self.maxima.to_dict(),
            "grid": self.grid.to_dict(),
            "depth": self.depth,
            "rho": self.rho,
            "g": self.g,
            "safe_factor": self.safe_factor,
            "strict": self.strict,
            "model_count": self.model_count,
            "one": {name: t.to_dict() for name, t in self.one.items()},
            "two": {name: t.to_dict() for name, t in self.two.items()},
            "metrics": dict(self.metrics),
            "aspect": list(self.aspect),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SurrogateBundle":
        try:
            bundle = cls(
                mode=data["mode"],
                maxima=ReferenceMaxima(**data["maxima"]),
                grid=FrequencyGrid(np.asarray(data["grid"]["omegas"], dtype=float)),
                depth=float(data["depth"]), rho=float(data["rho"]), g=float(data["g"]),
                safe_factor=float(data["safe_factor"]), strict=bool(data["strict"]),
                one={name: TargetSurrogate.from_dict(t) for name, t in data["one"].items()},
                two={name: TargetSurrogate.from_dict(t) for name, t in data["two"].items()},
                metrics={k: float(v) for k, v in data.get("metrics", {}).items()},
                aspect=tuple(float(v) for v in data.get("aspect", (0.1, 10.0))),
            )
        except (KeyError, TypeError) as e:
            raise DataError(f"incomplete surrogate bundle: {e}")
        if bundle.mode == "ann" and bundle.model_count != 30:
            raise DataError(f"bundle holds {bundle.model_count} models, expected 30")
        return bundle


def oracle_bundle(grid: FrequencyGrid, depth: float = 50.0, rho: float = RHO, g: float = GRAVITY,
                  safe_factor: float = SAFE_DISTANCE_FACTOR,
                  maxima: Optional[ReferenceMaxima] = None,
                  aspect: Tuple[float, float] = (0.1, 10.0)) -> SurrogateBundle:
    """Бандл обхода, отвечающий аналитическим оракулом"""
    return SurrogateBundle("oracle", maxima or ReferenceMaxima(), grid, depth, rho, g, safe_factor, aspect=aspect)


def _record_profiles(ds: HydroDataset, rho: float, g: float) -> Dict[str, np.ndarray]:
    omegas = ds.grid.omegas
    rows = {name: [] for name in ds.targets}
    for rec in ds.records:
        scaled = normalize_outputs(rec.values, rec.radius, rec.draft, omegas, rho, g)
        for name in ds.targets:
            rows[name].append(scaled[name])
    return {name: np.vstack(v) for name, v in rows.items()}


def _record_features(ds: HydroDataset, maxima: ReferenceMaxima, with_theta: bool) -> np.ndarray:
    radius = np.array([r.radius for r in ds.records])
    draft = np.array([r.draft for r in ds.records])
    if ds.kind == "one":
        return normalize_inputs(maxima, radius, draft)
    distance = np.array([r.distance for r in ds.records])
    theta = np.array([r.theta for r in ds.records]) if with_theta else None
    return normalize_inputs(maxima, radius, draft, distance=distance, theta=theta)


def _feature_names(kind: str, with_theta: bool) -> Tuple[str, ...]:
    if kind == "one":
        return ("R", "D")
    return ("R", "D", "d", "theta") if with_theta else ("R", "D", "d")


def _train_group(ds: HydroDataset, cfg: SurrogateConfig, hidden: int, seed_base: int,
                 rho: float, g: float, metrics: Dict[str, float]) -> Dict[str, TargetSurrogate]:
    profiles = _record_profiles(ds, rho, g)
    omega_tilde = ds.grid.omegas / cfg.maxima.omega
    group = {}
    for k, name in enumerate(ds.targets):
        with_theta = ds.kind == "two" and name not in RADIATION_TARGETS
        features = _record_features(ds, cfg.maxima, with_theta)
        prof = profiles[name]
        if cfg.spike_threshold > 0:
            prof = np.vstack([clean_spikes(row, cfg.spike_threshold) for row in prof])
        label = f"{ds.kind}.{name}"
        seed = cfg.train.seed + seed_base + 10 * k
        scaling = fit_scaling(prof, features, cfg.hidden_aux, replace(cfg.train, seed=seed + 1), target=label)

        n_rec, n_w = prof.shape
        rows = np.hstack([np.repeat(features, n_w, axis=0), np.tile(omega_tilde, n_rec)[:, None]])
        sizes = (rows.shape[1], hidden, 1)
        shape_net, report = mlp_train(mlp_init(sizes, seed), rows, scaling.shapes.reshape(-1, 1),
                                      replace(cfg.train, seed=seed), target=label)
        metrics[f"{label}.shape"] = report.test_rmse
        metrics[f"{label}.range"] = scaling.metrics["range"]
        metrics[f"{label}.offset"] = scaling.metrics["offset"]
        logger.info(f"[SURROGATE][TRAIN] {label}: shape RMSE {report.test_rmse:.4f} "
                    f"({report.stop_reason} at epoch {report.stop_epoch})")
        group[name] = TargetSurrogate(name, _feature_names(ds.kind, with_theta), shape_net, scaling.networks)
    return group


def train_bundle(one: HydroDataset, two: HydroDataset, cfg: Optional[SurrogateConfig] = None,
                 rho: float = RHO, g: float = GRAVITY,
                 safe_factor: float = SAFE_DISTANCE_FACTOR) -> SurrogateBundle:
    """Обучает 30 сетей или при cfg.mode == 'oracle' возвращает бандл обхода"""
    cfg = cfg or SurrogateConfig()
    if one.kind != "one" or two.kind != "two":
        raise DataError(f"expected one-body and two-body datasets, got {one.kind!r} and {two.kind!r}")
    if not one.grid.matches(two.grid):
        raise DataError("one-body and two-body datasets use different frequency grids")
    if one.depth != two.depth:
        raise DataError(f"datasets disagree on water depth: {one.depth} vs {two.depth}")
    if cfg.mode == "oracle":
        logger.info("[SURROGATE][TRAIN] oracle mode: bypass bundle without networks")
        return oracle_bundle(one.grid, one.depth, rho, g, safe_factor, cfg.maxima, cfg.aspect)
    if cfg.mode != "ann":
        raise DomainError(f"unknown surrogate mode {cfg.mode!r}")

    metrics: Dict[str, float] = {}
    logger.info(f"[SURROGATE][TRAIN] {len(one)} one-body and {len(two)} two-body records, "
                f"method={cfg.train.method}, max_epochs={cfg.train.max_epochs}")
    bundle = SurrogateBundle("ann", cfg.maxima, one.grid, one.depth, rho, g, safe_factor, cfg.strict,
                             aspect=cfg.aspect)
    bundle.one = _train_group(one, cfg, cfg.hidden_one, 0, rho, g, metrics)
    bundle.two = _train_group(two, cfg, cfg.hidden_two, 1000, rho, g, metrics)
    bundle.metrics = metrics
    return bundle


def save_bundle(bundle: SurrogateBundle, path: Union[str, Path]) -> Path:
    path = Path(path)
    return ArtifactStore(path.parent).save_json(path.name, bundle.to_dict())


def load_bundle(path: Union[str, Path]) -> SurrogateBundle:
    path = Path(path)
    document = ArtifactStore(path.parent).load_json(path.name, kind=BUNDLE_KIND)
    bundle = SurrogateBundle.from_dict(document)
    logger.info(f"[SURROGATE][LOAD] {bundle.mode} bundle with {bundle.model_count} models from {path}")
    return bundle


# ==================== PREDICTION ====================

def _omegas(bundle: SurrogateBundle, omega) -> np.ndarray:
    w = bundle.grid.omegas if omega is None else np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(w <= 0):
        raise DomainError("prediction frequencies must be positive")
    return w


def _check_geometry(bundle: SurrogateBundle, geom: WecGeometry) -> None:
    if geom.radius <= 0 or geom.draft <= 0:
        raise DomainError(f"prediction needs R, D > 0, got R={geom.radius}, D={geom.draft}")
    lo, hi = bundle.aspect
    if bundle.mode == "ann" and not lo <= geom.aspect <= hi:
        bundle.extrapolations += 1
        message = (f"[SURROGATE][PREDICT] D/R={geom.aspect:.4g} (R={geom.radius:.4g}, D={geom.draft:.4g}) "
                   f"outside the trained range [{lo:.4g}, {hi:.4g}]; extrapolating")
        # первое предупреждение на бандл, дальше только debug
        if bundle.extrapolations == 1:
            logger.warning(message)
        else:
            logger.debug(message)


def predict_1body(bundle: SurrogateBundle, geom: WecGeometry, omega=None):
    """(a, b, fe) одиночного тела в физических единицах; fe комплексное"""
    _check_geometry(bundle, geom)
    w = _omegas(bundle, omega)
    if bundle.mode == "oracle":
        normalize_inputs(bundle.maxima, geom.radius, geom.draft, w, strict=bundle.strict)
        return single_body(geom, w, bundle.depth, bundle.g, bundle.rho)
    features = normalize_inputs(bundle.maxima, geom.radius, geom.draft, strict=bundle.strict)
    omega_tilde = normalize_inputs(bundle.maxima, geom.radius, geom.draft, w, strict=bundle.strict)[:, -1]
    scaled = {name: t.predict(features, omega_tilde)[0] for name, t in bundle.one.items()}
    raw = denormalize_outputs(scaled, geom.radius, geom.draft, w, bundle.rho, bundle.g)
    return raw["a"], raw["b"], raw["fe_re"] + 1j * raw["fe_im"]


def predict_pairs(bundle: SurrogateBundle, geom: WecGeometry, distances, thetas, omega=None) -> Dict[str, np.ndarray]:
    """
    Коэффициенты тела 1 сразу для многих партнеров.

    Возвращает массивы формы (n_pairs, n_w) для a11, a12, b11, b12 и
    комплексного возбуждения fe.
    """
    _check_geometry(bundle, geom)
    w = _omegas(bundle, omega)
    distances = np.atleast_1d(np.asarray(distances, dtype=float))
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    for d, t in zip(distances, thetas):
        PairConfig(geom, float(d), float(t)).check(bundle.safe_factor)
    if distances.size == 0:
        empty = np.zeros((0, w.size))
        return {"a11": empty, "a12": empty, "b11": empty, "b12": empty, "fe": empty.astype(complex)}

    if bundle.mode == "oracle":
        normalize_inputs(bundle.maxima, geom.radius, geom.draft, w, distances[:, None], thetas[:, None],
                         strict=bundle.strict)
        columns = {"a11": [], "a12": [], "b11": [], "b12": [], "fe": []}
        for d, t in zip(distances, thetas):
            values = pair_body(PairConfig(geom, float(d), float(t)), w, bundle.depth, bundle.g,
                               bundle.rho, bundle.safe_factor)
            for name, v in zip(("a11", "a12", "b11", "b12", "fe"), values):
                columns[name].append(v)
        return {name: np.vstack(v) for name, v in columns.items()}

    radius = np.full(distances.size, geom.radius)
    draft = np.full(distances.size, geom.draft)
    omega_tilde = normalize_inputs(bundle.maxima, geom.radius, geom.draft, w, strict=bundle.strict)[:, -1]
    scaled = {}
    for name, t in bundle.two.items():
        with_theta = "theta" in t.features
        features = normalize_inputs(bundle.maxima, radius, draft, distance=distances,
                                    theta=thetas if with_theta else None, strict=bundle.strict)
        scaled[name] = t.predict(features, omega_tilde)
    raw = denormalize_outputs(scaled, geom.radius, geom.draft, w, bundle.rho, bundle.g)
    return {"a11": raw["a11"], "a12": raw["a12"], "b11": raw["b11"], "b12": raw["b12"],
            "fe": raw["fe_re"] + 1j * raw["fe_im"]}


def predict_2body(bundle: SurrogateBundle, pair: PairConfig, omega=None):
    """(a11, a12, b11, b12, fe1) тела 1 в паре"""
    values = predict_pairs(bundle, pair.geometry, [pair.distance], [pair.theta], omega)
    return tuple(values[name][0] for name in ("a11", "a12", "b11", "b12", "fe"))


def evaluate_against_oracle(bundle: SurrogateBundle, query: Union[WecGeometry, PairConfig],
                            grid: Optional[FrequencyGrid] = None) -> dict:
    """
    Кривые суррогата и оракула для одной конфигурации с максимальной и
    средней относительной ошибкой по каждой величине (относительно
    наибольшего модуля кривой оракула).
    """
    grid = grid or bundle.grid
    w = grid.omegas
    if isinstance(query, PairConfig):
        names = ("a11", "a12", "b11", "b12", "fe")
        predicted = predict_2body(bundle, query, w)
        reference = pair_body(query, w, bundle.depth, bundle.g, bundle.rho, bundle.safe_factor)
    else:
        names = ("a", "b", "fe")
        predicted = predict_1body(bundle, query, w)
        reference = single_body(query, w, bundle.depth, bundle.g, bundle.rho)

    curves = {"omega": w}
    errors = {}
    for name, pred, ref in zip(names, predicted, reference):
        pred = np.broadcast_to(pred, w.shape)
        ref = np.broadcast_to(ref, w.shape)
        scale = float(np.max(np.abs(ref)))
        diff = np.abs(pred - ref)
        rel = diff / scale if scale > 0 else diff
        errors[name] = {"max_rel": float(np.max(rel)), "mean_rel": float(np.mean(rel))}
        if np.iscomplexobj(pred) or np.iscomplexobj(ref):
            curves[f"{name}_re_pred"], curves[f"{name}_re_oracle"] = np.real(pred), np.real(ref)
            curves[f"{name}_im_pred"], curves[f"{name}_im_oracle"] = np.imag(pred), np.imag(ref)
        else:
            curves[f"{name}_pred"], curves[f"{name}_oracle"] = pred, ref
    return {"curves": curves, "errors": errors}
