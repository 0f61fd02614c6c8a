"""
Общие доменные записи: геометрия устройства, конфигурации двух тел,
настройки PTO и проекты ферм целиком.
"""
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from core.exceptions import DomainError, InfeasibleDesignError

RHO = 1025.0
GRAVITY = 9.81
DEPTH = 50.0

# s_d = (R / 5) * 50 m
SAFE_DISTANCE_FACTOR = 10.0


def safe_distance(radius: float, factor: float = SAFE_DISTANCE_FACTOR) -> float:
    """Зазор для обслуживания между устройствами"""
    return factor * radius


def minimum_spacing(radius: float, factor: float = SAFE_DISTANCE_FACTOR) -> float:
    """Минимальное расстояние между центрами: диаметр плюс безопасный зазор"""
    return 2.0 * radius + safe_distance(radius, factor)


@dataclass(frozen=True)
class WecGeometry:
    """Цилиндр в вертикальной качке: радиус R и осадка D (м)"""
    radius: float
    draft: float

    def __post_init__(self):
        if not (np.isfinite(self.radius) and np.isfinite(self.draft)):
            raise DomainError(f"geometry must be finite, got R={self.radius}, D={self.draft}")
        if self.radius < 0 or self.draft < 0:
            raise DomainError(f"geometry must be non-negative, got R={self.radius}, D={self.draft}")

    @property
    def area(self) -> float:
        return float(np.pi * self.radius ** 2)

    @property
    def volume(self) -> float:
        return self.area * self.draft

    @property
    def aspect(self) -> float:
        return self.draft / self.radius

    def check_range(self, radius_range: Tuple[float, float], draft_range: Tuple[float, float],
                    aspect_range: Tuple[float, float] = (0.1, 10.0)) -> None:
        """DomainError вне области, покрытой обучающей выборкой"""
        if not radius_range[0] <= self.radius <= radius_range[1]:
            raise DomainError(f"R={self.radius} outside {radius_range}")
        if not draft_range[0] <= self.draft <= draft_range[1]:
            raise DomainError(f"D={self.draft} outside {draft_range}")
        if not aspect_range[0] <= self.aspect <= aspect_range[1]:
            raise DomainError(f"D/R={self.aspect:.4g} outside {aspect_range}")


@dataclass(frozen=True)
class PairConfig:
    """Два одинаковых тела: тело 1 в начале координат, тело 2 на расстоянии d под углом theta"""
    geometry: WecGeometry
    distance: float
    theta: float

    def check(self, factor: float = SAFE_DISTANCE_FACTOR) -> None:
        limit = minimum_spacing(self.geometry.radius, factor)
        if self.distance < limit:
            raise DomainError(
                f"pair distance {self.distance:.4g} m below 2R + s_d = {limit:.4g} m"
            )
        if not 0.0 <= self.theta <= np.pi:
            raise DomainError(f"pair angle {self.theta:.4g} rad outside [0, pi]")


@dataclass(frozen=True)
class PtoParams:
    """Жесткость (Н/м) и демпфирование (Н с/м) PTO каждого устройства"""
    stiffness: np.ndarray
    damping: np.ndarray

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.stiffness, dtype=float))
        b = np.atleast_1d(np.asarray(self.damping, dtype=float))
        if k.shape != b.shape or k.ndim != 1:
            raise DomainError(f"PTO vectors must share one dimension, got {k.shape} and {b.shape}")
        if np.any(b < 0):
            raise DomainError("PTO damping must be non-negative")
        object.__setattr__(self, "stiffness", k)
        object.__setattr__(self, "damping", b)

    @property
    def n_wec(self) -> int:
        return int(self.stiffness.size)

    def stiffness_matrix(self) -> np.ndarray:
        return np.diag(self.stiffness)

    def damping_matrix(self) -> np.ndarray:
        return np.diag(self.damping)


@dataclass(frozen=True)
class FarmDesign:
    """Общая геометрия, управление по устройствам и раскладка (тело 1 закреплено в начале координат)"""
    geometry: WecGeometry
    pto: PtoParams
    layout: np.ndarray = field(default_factory=lambda: np.zeros((1, 2)))

    def __post_init__(self):
        layout = np.atleast_2d(np.asarray(self.layout, dtype=float))
        if layout.ndim != 2 or layout.shape[1] != 2:
            raise DomainError(f"layout must be N x 2, got shape {layout.shape}")
        if layout.shape[0] != self.pto.n_wec:
            raise DomainError(
                f"layout has {layout.shape[0]} bodies but PTO has {self.pto.n_wec}"
            )
        object.__setattr__(self, "layout", layout)

    @property
    def n_wec(self) -> int:
        return int(self.layout.shape[0])

    def pair_distances(self) -> np.ndarray:
        """Расстояния L_pq для p < q, пары по строкам"""
        n = self.n_wec
        idx_p, idx_q = np.triu_indices(n, k=1)
        delta = self.layout[idx_q] - self.layout[idx_p]
        return np.hypot(delta[:, 0], delta[:, 1])

    def check_spacing(self, factor: float = SAFE_DISTANCE_FACTOR, tol: float = 1e-9) -> None:
        limit = minimum_spacing(self.geometry.radius, factor)
        distances = self.pair_distances()
        if distances.size and distances.min() < limit - tol:
            raise InfeasibleDesignError(
                f"bodies closer than 2R + s_d = {limit:.4g} m (closest pair {distances.min():.4g} m)"
            )
