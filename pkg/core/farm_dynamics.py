"""
Отклик фермы в частотной области и цепочка мощности:
регулярная волна -> состояние моря -> среднее по климату -> мощность на объем.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from core.artifact_store import ArtifactStore
from core.assembly import FarmMatrices, assemble_farm
from core.exceptions import DomainError, SingularityError
from core.models import GRAVITY, RHO, FarmDesign, PtoParams, WecGeometry
from core.surrogate import SurrogateBundle
from core.wave_climate import FrequencyGrid, SeaState, WaveClimate, jonswap_spectrum

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class Efficiencies:
    """КПД преобразования, доступность и передача"""
    pcc: float = 0.8
    oa: float = 0.95
    t: float = 0.98

    @property
    def total(self) -> float:
        return self.pcc * self.oa * self.t


def hydrostatics(geom: WecGeometry, rho: float = RHO, g: float = GRAVITY) -> Tuple[float, float]:
    """(M, G): вытесненная масса в равновесии и жесткость ватерлинии"""
    area = np.pi * geom.radius ** 2
    return float(rho * area * geom.draft), float(rho * g * area)


def _impedance(omegas: np.ndarray, mass: float, added: np.ndarray, damping: np.ndarray,
               stiffness: float, pto: PtoParams) -> np.ndarray:
    n = added.shape[-1]
    eye = np.eye(n)
    w = omegas[:, None, None]
    return (-w ** 2 * (mass * eye + added) + stiffness * eye + pto.stiffness_matrix()
            + 1j * w * (damping + pto.damping_matrix()))


def _checked_inverse(z: np.ndarray, omegas: np.ndarray, limit: float) -> np.ndarray:
    s = np.linalg.svd(z, compute_uv=False)
    s_max, s_min = s[..., 0], s[..., -1]
    with np.errstate(divide="ignore"):
        condition = np.where(s_min > 0, s_max / np.where(s_min > 0, s_min, 1.0), np.inf)
    bad = np.nonzero(~(condition <= limit))[0]
    if bad.size:
        i = int(bad[0])
        raise SingularityError(float(omegas[i]), float(condition[i]))
    return np.linalg.inv(z)


def transfer_matrix(omega: float, mass: float, added, damping, stiffness: float, pto: PtoParams,
                    condition_limit: float = CONDITION_LIMIT) -> np.ndarray:
    """H(w) = [-w^2 (M + A) + G + K_pto + i w (B + B_pto)]^-1 на одной частоте"""
    w = np.array([float(omega)])
    added = np.atleast_2d(np.asarray(added, dtype=float))[None]
    damping = np.atleast_2d(np.asarray(damping, dtype=float))[None]
    z = _impedance(w, mass, added, damping, stiffness, pto)
    return _checked_inverse(z, w, condition_limit)[0]


def transfer_matrices(matrices: FarmMatrices, geom: WecGeometry, pto: PtoParams,
                      rho: float = RHO, g: float = GRAVITY,
                      condition_limit: float = CONDITION_LIMIT) -> np.ndarray:
    """H по всей сетке, форма (n_w, N, N)"""
    if pto.n_wec != matrices.n_wec:
        raise DomainError(f"PTO has {pto.n_wec} devices, matrices {matrices.n_wec}")
    mass, stiffness = hydrostatics(geom, rho, g)
    w = matrices.grid.omegas
    z = _impedance(w, mass, matrices.added_mass, matrices.damping, stiffness, pto)
    return _checked_inverse(z, w, condition_limit)


def response(h: np.ndarray, fe: np.ndarray, omega) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Смещение H F, скорость i w xi и ускорение -w^2 xi (пакетно по первой оси)"""
    h = np.asarray(h)
    fe = np.asarray(fe)
    w = np.asarray(omega, dtype=float)
    if h.shape[-1] != fe.shape[-1]:
        raise DomainError(f"transfer matrix {h.shape} does not match excitation {fe.shape}")
    xi = np.einsum("...ij,...j->...i", h, fe)
    w = w[..., None] if w.ndim else w
    return xi, 1j * w * xi, -(w ** 2) * xi


@dataclass
class ResponseAmplitudes:
    omegas: np.ndarray
    displacement: np.ndarray  # (n_w, N) complex

    @property
    def velocity(self) -> np.ndarray:
        return 1j * self.omegas[:, None] * self.displacement

    @property
    def acceleration(self) -> np.ndarray:
        return -(self.omegas[:, None] ** 2) * self.displacement

    def time_series(self, t) -> np.ndarray:
        """Re{xi exp(i w t)} для каждой частоты и тела, форма (n_w, N, n_t)"""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        rotation = np.exp(1j * self.omegas[:, None, None] * t[None, None, :])
        return np.real(self.displacement[:, :, None] * rotation)


def farm_response(matrices: FarmMatrices, geom: WecGeometry, pto: PtoParams,
                  rho: float = RHO, g: float = GRAVITY,
                  condition_limit: float = CONDITION_LIMIT) -> ResponseAmplitudes:
    h = transfer_matrices(matrices, geom, pto, rho, g, condition_limit)
    xi, _, _ = response(h, matrices.excitation, matrices.grid.omegas)
    return ResponseAmplitudes(matrices.grid.omegas, xi)


def power_per_device(omega, xi, pto_damping) -> np.ndarray:
    """0.5 w^2 B_pto,p |xi_p|^2, форма (..., N)"""
    w = np.asarray(omega, dtype=float)
    xi = np.asarray(xi)
    b = np.asarray(pto_damping, dtype=float)
    if np.any(b < 0):
        raise DomainError("PTO damping must be non-negative")
    w = w[..., None] if w.ndim else w
    return 0.5 * w ** 2 * b * np.abs(xi) ** 2


def power_regular(omega, xi, pto_damping) -> np.ndarray:
    """Средняя по времени поглощенная мощность 0.5 w^2 xi^H B_pto xi (единичная амплитуда)"""
    return power_per_device(omega, np.atleast_1d(xi), pto_damping).sum(axis=-1)


def power_sea_state(sea_state: SeaState, grid: FrequencyGrid, p_m,
                    spectrum: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> float:
    """sum_k 2 dw_k S(w_k) p_m(w_k)"""
    s = (spectrum or sea_state.spectrum)(grid.omegas)
    return float(np.sum(2.0 * grid.bin_widths() * s * np.asarray(p_m, dtype=float)))


def spectral_weight_matrix(climate: WaveClimate, grid: FrequencyGrid) -> np.ndarray:
    """
    Строки 2 dw_k S(Hs_i, Tp_j, w_k) для каждого узла (i, j) по строкам,
    форма (n_gq_hs * n_gq_tp, n_w); p_i по всем узлам считается одним произведением.
    """
    widths = 2.0 * grid.bin_widths()
    rows = [widths * jonswap_spectrum(float(hs), float(tp), grid.omegas)
            for hs in climate.hs_nodes for tp in climate.tp_nodes]
    return np.vstack(rows)


def average_power(climate: WaveClimate, p_i, efficiencies: Efficiencies = Efficiencies(),
                  year_average: bool = True) -> float:
    """
    eta * сумма по годам и узлам w_i w_j p_r p_i, деленная на число лет,
    если year_average не выключен.
    """
    p_i = np.asarray(p_i, dtype=float)
    expected = (climate.hs_nodes.size, climate.tp_nodes.size)
    if p_i.shape != expected:
        raise DomainError(f"sea-state powers {p_i.shape} do not match climate nodes {expected}")
    weighted = climate.weight_matrix() * p_i
    totals = [float(np.sum(weighted * climate.prob[y])) for y in range(climate.n_yr)]
    total = math.fsum(totals)
    if year_average:
        total /= climate.n_yr
    return efficiencies.total * total


def power_per_volume(p_a: float, geom: WecGeometry) -> float:
    if geom.radius <= 0 or geom.draft <= 0:
        raise DomainError(f"power per volume needs R, D > 0, got R={geom.radius}, D={geom.draft}")
    return float(p_a / geom.volume)


@dataclass
class PowerResult:
    omegas: np.ndarray
    p_m: np.ndarray            # (n_w,) farm power per unit wave amplitude
    p_m_device: np.ndarray     # (n_w, N)
    p_i: np.ndarray            # (n_gq_hs, n_gq_tp)
    p_a: float
    p_v: float
    p_a_device: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict:
        return {
            "kind": "power_result",
            "p_a": self.p_a,
            "p_v": self.p_v,
            "p_a_device": self.p_a_device.tolist(),
            "omegas": self.omegas.tolist(),
            "p_m": self.p_m.tolist(),
            "p_i": self.p_i.tolist(),
        }


def evaluate_farm_power(design: FarmDesign, bundle: SurrogateBundle, climate: WaveClimate,
                        grid: Optional[FrequencyGrid] = None,
                        efficiencies: Efficiencies = Efficiencies(),
                        weights: Optional[np.ndarray] = None, year_average: bool = True,
                        condition_limit: float = CONDITION_LIMIT,
                        matrices: Optional[FarmMatrices] = None) -> PowerResult:
    """Сборка, отклик и вся цепочка мощности для одного проекта"""
    grid = grid or bundle.grid
    if weights is None:
        weights = spectral_weight_matrix(climate, grid)
    if weights.shape[1] != grid.n_w:
        raise DomainError(f"spectral weights cover {weights.shape[1]} frequencies, grid has {grid.n_w}")
    matrices = matrices or assemble_farm(bundle, design, grid)
    amplitudes = farm_response(matrices, design.geometry, design.pto, bundle.rho, bundle.g, condition_limit)
    device = power_per_device(grid.omegas, amplitudes.displacement, design.pto.damping)
    p_m = device.sum(axis=1)
    shape = (climate.hs_nodes.size, climate.tp_nodes.size)
    p_i = (weights @ p_m).reshape(shape)
    p_a = average_power(climate, p_i, efficiencies, year_average)
    p_a_device = np.array([average_power(climate, (weights @ device[:, i]).reshape(shape), efficiencies,
                                         year_average) for i in range(design.n_wec)])
    return PowerResult(grid.omegas, p_m, device, p_i, p_a, power_per_volume(p_a, design.geometry), p_a_device)


def interaction_factor(design: FarmDesign, bundle: SurrogateBundle, climate: WaveClimate,
                       grid: Optional[FrequencyGrid] = None,
                       efficiencies: Efficiencies = Efficiencies(),
                       weights: Optional[np.ndarray] = None, year_average: bool = True,
                       farm: Optional[PowerResult] = None) -> float:
    """p_a фермы, деленная на сумму p_a устройств, работающих поодиночке со своим PTO"""
    grid = grid or bundle.grid
    if weights is None:
        weights = spectral_weight_matrix(climate, grid)
    farm = farm or evaluate_farm_power(design, bundle, climate, grid, efficiencies, weights, year_average)
    isolated = 0.0
    for p in range(design.n_wec):
        alone = FarmDesign(design.geometry,
                           PtoParams(design.pto.stiffness[p:p + 1], design.pto.damping[p:p + 1]),
                           np.zeros((1, 2)))
        isolated += evaluate_farm_power(alone, bundle, climate, grid, efficiencies, weights, year_average).p_a
    if isolated == 0.0:
        return float("nan")
    return farm.p_a / isolated


def save_power_result(result: PowerResult, climate: WaveClimate, store: ArtifactStore,
                      prefix: str = "power") -> Dict[str, str]:
    """JSON-сводка и по строке CSV на каждый узел климата"""
    json_path = store.save_json(f"{prefix}.json", result.to_dict())
    mean_prob = climate.prob.mean(axis=0)
    rows = []
    for i, hs in enumerate(climate.hs_nodes):
        for j, tp in enumerate(climate.tp_nodes):
            rows.append([float(hs), float(tp), float(result.p_i[i, j]), float(mean_prob[i, j])])
    csv_path = store.save_csv(f"{prefix}_nodes.csv", "power-nodes", ["hs", "tp", "p_i", "mean_prob"], rows)
    return {"json": str(json_path), "csv": str(csv_path)}
