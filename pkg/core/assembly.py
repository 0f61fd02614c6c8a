"""
Гидродинамические матрицы фермы из предсказаний для одного и двух тел,
с отбрасыванием всего, что старше попарных членов.

Соглашения:
- падающая волна идет вдоль +x; тело в x_p видит фазу exp(-i k x_p)
- аддитивный вклад пары в возбуждение равен (fe - fe11) exp(i k L), для
  тела p фермы он берется с L = -x_p
- углы пар отражаются на [0, pi]; радиационные члены зависят только от расстояния
- пары дальше опорного максимального расстояния не связываются
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from core.hydro_oracle import fold_angle
from core.models import FarmDesign, PairConfig, WecGeometry
from core.surrogate import SurrogateBundle, output_scale, predict_1body, predict_pairs
from core.wave_climate import FrequencyGrid, wavenumbers

logger = logging.getLogger(__name__)


@dataclass
class FarmMatrices:
    """A(w), B(w) формы (n_w, N, N) и комплексное возбуждение F(w) формы (n_w, N)"""
    grid: FrequencyGrid
    added_mass: np.ndarray
    damping: np.ndarray
    excitation: np.ndarray

    @property
    def n_wec(self) -> int:
        return int(self.excitation.shape[1])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.added_mass)) and np.all(np.isfinite(self.damping))
                    and np.all(np.isfinite(self.excitation)))


def _normalized_single(bundle: SurrogateBundle, geom: WecGeometry, w: np.ndarray):
    a, b, fe = predict_1body(bundle, geom, w)
    return (a / output_scale("a", geom.radius, geom.draft, w, bundle.rho, bundle.g),
            b / output_scale("b", geom.radius, geom.draft, w, bundle.rho, bundle.g),
            fe / output_scale("fe", geom.radius, geom.draft, w, bundle.rho, bundle.g))


def pair_effects(bundle: SurrogateBundle, geom: WecGeometry, distances, thetas, offsets,
                 omega=None) -> Dict[str, np.ndarray]:
    """
    Нормированные аддитивные вклады сразу для многих пар: массивы
    (n_pairs, n_w) с ключами a11, a12, b11, b12 и комплексным fe.
    """
    w = bundle.grid.omegas if omega is None else np.atleast_1d(np.asarray(omega, dtype=float))
    a1, b1, fe1 = _normalized_single(bundle, geom, w)
    pairs = predict_pairs(bundle, geom, distances, thetas, w)
    m = output_scale("a", geom.radius, geom.draft, w, bundle.rho, bundle.g)
    mb = output_scale("b", geom.radius, geom.draft, w, bundle.rho, bundle.g)
    mf = output_scale("fe", geom.radius, geom.draft, w, bundle.rho, bundle.g)
    k = wavenumbers(w, bundle.depth, bundle.g)
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    phase = np.exp(1j * k[None, :] * offsets[:, None])
    return {
        "a11": pairs["a11"] / m - a1,
        "a12": pairs["a12"] / m,
        "b11": pairs["b11"] / mb - b1,
        "b12": pairs["b12"] / mb,
        "fe": (fe1 - pairs["fe"] / mf) * phase,
    }


def additive_effects(bundle: SurrogateBundle, pair: PairConfig, omega=None, offset: float = 0.0):
    """(d_a11, d_a12, d_b11, d_b12, d_fe11) одной пары в нормированном виде, со сдвигом L по x"""
    effects = pair_effects(bundle, pair.geometry, [pair.distance], [pair.theta], [offset], omega)
    return tuple(effects[name][0] for name in ("a11", "a12", "b11", "b12", "fe"))


def assemble_farm(bundle: SurrogateBundle, design: FarmDesign,
                  grid: Optional[FrequencyGrid] = None) -> FarmMatrices:
    """
    Диагональ: значение одного тела плюс диагональный вклад каждого
    партнера. Внедиагональный элемент (p, q) берется из попарной связи.
    Возбуждение: одиночное тело с фазой своей позиции плюс попарное рассеяние.
    """
    design.check_spacing(bundle.safe_factor)
    grid = grid or bundle.grid
    w = grid.omegas
    geom = design.geometry
    layout = design.layout
    n = design.n_wec

    a, b, fe = predict_1body(bundle, geom, w)
    k = wavenumbers(w, bundle.depth, bundle.g)

    added = np.zeros((w.size, n, n))
    damping = np.zeros((w.size, n, n))
    excitation = np.zeros((w.size, n), dtype=complex)
    for p in range(n):
        added[:, p, p] = a
        damping[:, p, p] = b
        excitation[:, p] = fe * np.exp(-1j * k * layout[p, 0])

    idx_p, idx_q = np.nonzero(~np.eye(n, dtype=bool))
    delta = layout[idx_q] - layout[idx_p]
    distances = np.hypot(delta[:, 0], delta[:, 1])
    keep = distances <= bundle.maxima.distance
    if not keep.all():
        logger.debug(f"[ASSEMBLY][CUTOFF] {int((~keep).sum())} ordered pairs beyond "
                     f"{bundle.maxima.distance:g} m left uncoupled")
    idx_p, idx_q, distances, delta = idx_p[keep], idx_q[keep], distances[keep], delta[keep]
    if idx_p.size == 0:
        return FarmMatrices(grid, added, damping, excitation)

    thetas = np.array([fold_angle(t) for t in np.arctan2(delta[:, 1], delta[:, 0])])
    effects = pair_effects(bundle, geom, distances, thetas, -layout[idx_p, 0], w)
    m = output_scale("a", geom.radius, geom.draft, w, bundle.rho, bundle.g)
    mb = output_scale("b", geom.radius, geom.draft, w, bundle.rho, bundle.g)
    mf = output_scale("fe", geom.radius, geom.draft, w, bundle.rho, bundle.g)
    for i, (p, q) in enumerate(zip(idx_p, idx_q)):
        added[:, p, p] += effects["a11"][i] * m
        damping[:, p, p] += effects["b11"][i] * mb
        added[:, p, q] = effects["a12"][i] * m
        damping[:, p, q] = effects["b12"][i] * mb
        excitation[:, p] -= effects["fe"][i] * mf
    return FarmMatrices(grid, added, damping, excitation)
