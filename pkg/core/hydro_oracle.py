"""
Аналитический оракул гидродинамики вертикальной качки точечного поглотителя.

Заменяет расчет методом граничных элементов: замкнутые формулы для одного
тела (возбуждение Фруда-Крылова, демпфирование по Хаскинду, гладкая
присоединенная масса) и члены взаимодействия двух тел на ядрах Бесселя.
Здесь же строятся обучающие проекты: равномерная сетка для одного тела,
латинский гиперкуб для пар.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import j0, y0
from scipy.stats import qmc

from core.exceptions import DomainError
from core.models import (
    GRAVITY, RHO, SAFE_DISTANCE_FACTOR, PairConfig, WecGeometry, minimum_spacing,
)
from core.wave_climate import FrequencyGrid, wavenumbers

logger = logging.getLogger(__name__)

ONE_BODY_TARGETS = ("a", "b", "fe_re", "fe_im")
TWO_BODY_TARGETS = ("a11", "a12", "b11", "b12", "fe_re", "fe_im")


@dataclass(frozen=True)
class SamplingRanges:
    """Область проектов обучающей выборки"""
    radius: Tuple[float, float] = (0.5, 20.0)
    draft: Tuple[float, float] = (0.5, 20.0)
    aspect: Tuple[float, float] = (0.1, 10.0)
    distance_max: float = 1000.0
    theta_max: float = np.pi
    safe_factor: float = SAFE_DISTANCE_FACTOR

    def draft_interval(self, radius: float) -> Tuple[float, float]:
        lo = max(self.draft[0], self.aspect[0] * radius)
        hi = min(self.draft[1], self.aspect[1] * radius)
        return lo, hi

    def check(self) -> None:
        if not (0 < self.radius[0] <= self.radius[1] and 0 < self.draft[0] <= self.draft[1]):
            raise DomainError(f"invalid radius/draft ranges {self.radius}, {self.draft}")
        if not 0 < self.aspect[0] <= self.aspect[1]:
            raise DomainError(f"invalid aspect range {self.aspect}")
        for radius in self.radius:
            lo, hi = self.draft_interval(radius)
            if lo > hi:
                raise DomainError(f"no draft satisfies the aspect filter at R={radius}")
        if minimum_spacing(self.radius[1], self.safe_factor) >= self.distance_max:
            raise DomainError(
                f"largest radius needs {minimum_spacing(self.radius[1], self.safe_factor):.4g} m "
                f"spacing, above distance_max={self.distance_max}"
            )


@dataclass
class HydroRecord:
    """Коэффициенты одной конфигурации на сетке частот"""
    radius: float
    draft: float
    values: Dict[str, np.ndarray]
    distance: Optional[float] = None
    theta: Optional[float] = None

    @property
    def kind(self) -> str:
        return "one" if self.distance is None else "two"

    @property
    def geometry(self) -> WecGeometry:
        return WecGeometry(self.radius, self.draft)

    def inputs(self) -> Tuple[float, ...]:
        if self.kind == "one":
            return (self.radius, self.draft)
        return (self.radius, self.draft, self.distance, self.theta)


@dataclass
class HydroDataset:
    """Однородный набор записей на одной сетке частот"""
    kind: str
    records: List[HydroRecord]
    grid: FrequencyGrid
    depth: float

    @property
    def targets(self) -> Tuple[str, ...]:
        return ONE_BODY_TARGETS if self.kind == "one" else TWO_BODY_TARGETS

    def __len__(self) -> int:
        return len(self.records)


# ==================== ORACLE ====================

def interaction_envelope(distance, radius):
    """Пространственное затухание всех членов взаимодействия"""
    return np.exp(-np.asarray(distance) / (50.0 * radius))


def single_body(geom: WecGeometry, omega, h: float = 50.0, g: float = GRAVITY, rho: float = RHO):
    """
    Коэффициенты качки одиночного цилиндра в начале координат.

    Возвращает (a, b, fe) по omega: присоединенная масса (кг), радиационное
    демпфирование (кг/с), комплексная сила возбуждения на единицу амплитуды (Н/м).
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(w <= 0):
        raise DomainError("oracle frequencies must be positive")
    k = wavenumbers(w, h, g)
    radius, draft = geom.radius, geom.draft
    fe = (rho * g * np.pi * radius ** 2 * np.exp(-k * draft)).astype(complex)
    b = w ** 3 * np.abs(fe) ** 2 / (2.0 * rho * g ** 3)
    a = rho * np.pi * radius ** 2 * draft * (0.35 + 0.5 * np.exp(-k * radius))
    return a, b, fe


def pair_body(pair: PairConfig, omega, h: float = 50.0, g: float = GRAVITY, rho: float = RHO,
              safe_factor: float = SAFE_DISTANCE_FACTOR):
    """
    Коэффициенты качки тела 1 в паре.

    Возвращает (a11, a12, b11, b12, fe1) по omega. Радиационные члены зависят
    только от расстояния; возбуждение тела 1 несет поправку на рассеяние и
    зависит от отраженного угла.
    """
    pair.check(safe_factor)
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    a, b, fe = single_body(pair.geometry, w, h, g, rho)
    k = wavenumbers(w, h, g)
    d = pair.distance
    kd = k * d
    env = interaction_envelope(d, pair.geometry.radius)

    b12 = b * j0(kd) * env
    a12 = -(b / w) * y0(kd) * env
    correction = 1.0 + 0.1 * j0(kd) * env
    a11 = a * correction
    b11 = b * correction
    fe1 = fe * (1.0 + 0.15 * env * np.exp(1j * kd) / np.sqrt(np.maximum(kd, 1.0)) * np.cos(pair.theta))
    return a11, a12, b11, b12, fe1


def single_body_record(geom: WecGeometry, grid: FrequencyGrid, h: float, g: float, rho: float) -> HydroRecord:
    a, b, fe = single_body(geom, grid.omegas, h, g, rho)
    return HydroRecord(
        radius=geom.radius, draft=geom.draft,
        values={"a": a, "b": b, "fe_re": fe.real.copy(), "fe_im": fe.imag.copy()},
    )


def pair_body_record(pair: PairConfig, grid: FrequencyGrid, h: float, g: float, rho: float,
                     safe_factor: float = SAFE_DISTANCE_FACTOR) -> HydroRecord:
    a11, a12, b11, b12, fe1 = pair_body(pair, grid.omegas, h, g, rho, safe_factor)
    return HydroRecord(
        radius=pair.geometry.radius, draft=pair.geometry.draft,
        distance=pair.distance, theta=pair.theta,
        values={"a11": a11, "a12": a12, "b11": b11, "b12": b12,
                "fe_re": fe1.real.copy(), "fe_im": fe1.imag.copy()},
    )


# ==================== TRAINING DESIGNS ====================

def _row_count(n: int) -> int:
    """Наибольший делитель n, не превосходящий sqrt(n)"""
    best = 1
    for rows in range(1, int(np.sqrt(n)) + 1):
        if n % rows == 0:
            best = rows
    return best


def one_body_design(ranges: SamplingRanges, n_samples: int) -> List[WecGeometry]:
    """
    Равномерная сетка: строки по радиусу, в каждой строке осадки равномерно
    по допустимому по удлинению интервалу.
    """
    rows = _row_count(n_samples)
    cols = n_samples // rows
    designs = []
    for radius in np.linspace(ranges.radius[0], ranges.radius[1], rows):
        lo, hi = ranges.draft_interval(float(radius))
        for draft in np.linspace(lo, hi, cols):
            designs.append(WecGeometry(float(radius), float(draft)))
    return designs


def two_body_design(ranges: SamplingRanges, n_samples: int, seed: int) -> List[PairConfig]:
    """
    Латинский гиперкуб по (R, D, d, theta). Осадка отображается в допустимый
    по удлинению интервал выбранного радиуса; расстояние логарифмически на
    [2R + s_d, d_max].
    """
    unit = qmc.LatinHypercube(d=4, seed=seed).random(n_samples)
    designs = []
    r_lo, r_hi = ranges.radius
    for u_r, u_d, u_l, u_t in unit:
        radius = r_lo + u_r * (r_hi - r_lo)
        d_lo, d_hi = ranges.draft_interval(radius)
        draft = d_lo + u_d * (d_hi - d_lo)
        l_lo = minimum_spacing(radius, ranges.safe_factor)
        distance = float(np.exp(np.log(l_lo) + u_l * (np.log(ranges.distance_max) - np.log(l_lo))))
        distance = min(max(distance, l_lo), ranges.distance_max)
        theta = float(u_t * ranges.theta_max)
        designs.append(PairConfig(WecGeometry(float(radius), float(draft)), distance, theta))
    return designs


def generate_training_data(grid: FrequencyGrid, ranges: Optional[SamplingRanges] = None,
                           n_one: int = 225, n_two: int = 1000, seed: int = 0,
                           depth: float = 50.0, g: float = GRAVITY, rho: float = RHO,
                           threads: int = 1) -> Tuple[HydroDataset, HydroDataset]:
    """
    Коэффициенты оракула для сетки одного тела и гиперкуба пар.

    Порядок записей совпадает с порядком проектов при любом числе потоков.
    """
    ranges = ranges or SamplingRanges()
    ranges.check()
    if n_one < 1 or n_two < 1:
        raise DomainError(f"sample counts must be >= 1, got n_one={n_one}, n_two={n_two}")

    singles = one_body_design(ranges, n_one)
    pairs = two_body_design(ranges, n_two, seed)
    logger.info(f"[ORACLE][GENERATE] {len(singles)} one-body and {len(pairs)} two-body designs "
                f"(seed={seed}, threads={threads})")

    def run_single(geom: WecGeometry) -> HydroRecord:
        return single_body_record(geom, grid, depth, g, rho)

    def run_pair(pair: PairConfig) -> HydroRecord:
        return pair_body_record(pair, grid, depth, g, rho, ranges.safe_factor)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            one_records = list(pool.map(run_single, singles))
            two_records = list(pool.map(run_pair, pairs))
    else:
        one_records = [run_single(geom) for geom in singles]
        two_records = [run_pair(pair) for pair in pairs]

    return (HydroDataset("one", one_records, grid, depth),
            HydroDataset("two", two_records, grid, depth))


# ==================== DIRECT FARM CONSTRUCTION ====================

def fold_angle(theta: float) -> float:
    """Отражает любой угол на [0, pi] относительно направления волны"""
    t = float(np.mod(theta, 2.0 * np.pi))
    return t if t <= np.pi else 2.0 * np.pi - t


def farm_matrices_direct(geom: WecGeometry, layout: np.ndarray, grid: FrequencyGrid,
                         h: float = 50.0, g: float = GRAVITY, rho: float = RHO,
                         safe_factor: float = SAFE_DISTANCE_FACTOR,
                         distance_max: Optional[float] = None):
    """
    Матрицы фермы с попарным усечением, построенные прямо по оракулу.

    Возвращает (A, B, Fe) форм (n_w, N, N), (n_w, N, N), (n_w, N).
    """
    layout = np.atleast_2d(np.asarray(layout, dtype=float))
    n = layout.shape[0]
    w = grid.omegas
    a, b, fe = single_body(geom, w, h, g, rho)
    k = wavenumbers(w, h, g)

    A = np.zeros((w.size, n, n))
    B = np.zeros((w.size, n, n))
    F = np.zeros((w.size, n), dtype=complex)
    for p in range(n):
        A[:, p, p] = a
        B[:, p, p] = b
        F[:, p] = fe * np.exp(-1j * k * layout[p, 0])

    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            dx, dy = layout[q] - layout[p]
            distance = float(np.hypot(dx, dy))
            if distance_max is not None and distance > distance_max:
                continue
            pair = PairConfig(geom, distance, fold_angle(np.arctan2(dy, dx)))
            a11, a12, b11, b12, fe1 = pair_body(pair, w, h, g, rho, safe_factor)
            A[:, p, p] += a11 - a
            B[:, p, p] += b11 - b
            A[:, p, q] = a12
            B[:, p, q] = b12
            F[:, p] += (fe1 - fe) * np.exp(-1j * k * layout[p, 0])
    return A, B, F
