"""
Моделирование волнового климата.

- спектр JONSWAP и линейное дисперсионное соотношение
- синтез нерегулярного волнения суперпозицией регулярных компонент
- квадратура Гаусса-Лежандра и ядерная оценка климата в ее узлах
- чтение записей волн и сохранение климата
"""
import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, optimize
from scipy.special import logsumexp

from core.exceptions import DataError, DomainError
from core.models import GRAVITY

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_HS_BOX = (0.25, 8.0)
DEFAULT_TP_BOX = (2.0, 20.0)

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class SeaState:
    """Стационарное море: значимая высота Hs (м), период пика Tp (с), курс 0"""
    hs: float
    tp: float
    beta_w: float = 0.0

    def __post_init__(self):
        if not (self.hs > 0 and self.tp > 0):
            raise DomainError(f"sea state needs Hs > 0 and Tp > 0, got Hs={self.hs}, Tp={self.tp}")
        if self.beta_w != 0.0:
            raise DomainError("only head seas (beta_w = 0) are modeled")

    @property
    def peak_frequency(self) -> float:
        return 2.0 * np.pi / self.tp

    def spectrum(self, omega: ArrayLike) -> np.ndarray:
        return jonswap_spectrum(self.hs, self.tp, omega)


@dataclass(frozen=True)
class FrequencyGrid:
    """Строго возрастающие круговые частоты (рад/с)"""
    omegas: np.ndarray

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float).ravel()
        if omegas.size == 0:
            raise DomainError("frequency grid is empty")
        if np.any(omegas <= 0):
            raise DomainError("frequencies must be positive")
        if omegas.size > 1 and np.any(np.diff(omegas) <= 0):
            raise DomainError("frequencies must be strictly increasing")
        omegas.setflags(write=False)
        object.__setattr__(self, "omegas", omegas)

    @classmethod
    def uniform(cls, omega_min: float = 0.1, omega_max: float = 7.0, n_w: int = 50) -> "FrequencyGrid":
        if n_w < 1:
            raise DomainError(f"n_w must be >= 1, got {n_w}")
        return cls(np.linspace(omega_min, omega_max, n_w))

    @property
    def n_w(self) -> int:
        return int(self.omegas.size)

    def bin_widths(self) -> np.ndarray:
        """Веса трапеций: на краях половина интервала"""
        w = self.omegas
        if w.size == 1:
            return np.ones(1)
        widths = np.empty_like(w)
        widths[1:-1] = 0.5 * (w[2:] - w[:-2])
        widths[0] = 0.5 * (w[1] - w[0])
        widths[-1] = 0.5 * (w[-1] - w[-2])
        return widths

    def to_dict(self) -> Dict[str, list]:
        return {"omegas": self.omegas.tolist()}

    def matches(self, other: "FrequencyGrid", rtol: float = 1e-12) -> bool:
        return self.n_w == other.n_w and np.allclose(self.omegas, other.omegas, rtol=rtol, atol=0.0)


# ==================== SPECTRUM ====================

def peak_enhancement(hs: float, tp: float) -> float:
    """Коэффициент усиления пика JONSWAP по отношению Tp / sqrt(Hs)"""
    if hs <= 0 or tp <= 0:
        raise DomainError(f"Hs and Tp must be positive, got Hs={hs}, Tp={tp}")
    ratio = tp / np.sqrt(hs)
    if ratio <= 3.6:
        return 5.0
    if ratio <= 5.0:
        return float(np.exp(5.75 - 1.15 * ratio))
    return 1.0


def jonswap_spectrum(hs: float, tp: float, omega: ArrayLike) -> np.ndarray:
    """
    Спектральная плотность JONSWAP S(omega) в м^2 с.

    Args:
        hs: значимая высота волны (м)
        tp: период пика (с); omega_p = 2 pi / Tp
        omega: круговая частота или массив частот (рад/с)
    """
    gamma = peak_enhancement(hs, tp)
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("spectrum frequencies must be positive")

    wp = 2.0 * np.pi / tp
    sigma = np.where(w <= wp, 0.07, 0.09)
    r = np.exp(-((w / wp - 1.0) ** 2) / (2.0 * sigma ** 2))
    beta_s = 1.25 * wp ** 4
    alpha_s = beta_s / 4.0 * hs ** 2 * (1.0 - 0.287 * np.log(gamma)) * gamma ** r
    return alpha_s * w ** -5 * np.exp(-beta_s * w ** -4)


def spectral_moment(hs: float, tp: float, order: int = 0,
                    omega_min: float = 0.1, omega_max: float = 7.0) -> float:
    """Адаптивный интеграл omega^order * S(omega) по [omega_min, omega_max]"""
    wp = 2.0 * np.pi / tp
    points = [wp] if omega_min < wp < omega_max else None
    value, _ = integrate.quad(
        lambda w: w ** order * float(jonswap_spectrum(hs, tp, w)),
        omega_min, omega_max, points=points, limit=400, epsabs=0.0, epsrel=1e-10,
    )
    return float(value)


# ==================== DISPERSION ====================

def solve_dispersion(omega: float, h: float, g: float = GRAVITY) -> float:
    """
    Волновое число k (1/м), omega^2 = g k tanh(k h).

    Корень зажат снизу max(omega^2/g, omega/sqrt(g h)), сверху суммой обоих
    пределов; невязка монотонна по k.
    """
    if omega <= 0 or h <= 0 or g <= 0:
        raise DomainError(f"dispersion needs positive inputs, got omega={omega}, h={h}, g={g}")
    deep = omega ** 2 / g
    shallow = omega / np.sqrt(g * h)
    lower = max(deep, shallow)
    upper = deep + shallow

    def residual(k: float) -> float:
        return g * k * np.tanh(k * h) - omega ** 2

    if residual(lower) >= 0.0:
        return float(lower)
    return float(optimize.brentq(residual, lower, upper, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                                 maxiter=500))


def wavenumbers(omegas: ArrayLike, h: float, g: float = GRAVITY) -> np.ndarray:
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    return np.array([solve_dispersion(float(x), h, g) for x in w])


# ==================== IRREGULAR WAVES ====================

@dataclass(frozen=True)
class WaveSignal:
    """Суперпозиция n_r регулярных компонент"""
    amplitudes: np.ndarray
    wavenumbers: np.ndarray
    frequencies: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        sizes = {np.size(self.amplitudes), np.size(self.wavenumbers),
                 np.size(self.frequencies), np.size(self.phases)}
        if len(sizes) != 1:
            raise DomainError("wave signal component arrays must have equal length")

    @property
    def n_r(self) -> int:
        return int(np.size(self.amplitudes))

    def elevation(self, x: ArrayLike, t: ArrayLike) -> np.ndarray:
        """eta(x, t); x и t растягиваются друг относительно друга"""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        xx, tt = np.broadcast_arrays(x, t)
        arg = (np.multiply.outer(xx, self.wavenumbers)
               - np.multiply.outer(tt, self.frequencies)
               + self.phases)
        return np.sum(self.amplitudes * np.cos(arg), axis=-1)

    def variance(self) -> float:
        """Дисперсия по ансамблю: сумма a_i^2 / 2"""
        return float(0.5 * np.sum(self.amplitudes ** 2))


def build_wave_signal(spectrum: Callable[[np.ndarray], np.ndarray], n_r: int = 200, seed: int = 0,
                      omega_min: float = 0.1, omega_max: float = 7.0,
                      depth: float = 50.0, g: float = GRAVITY) -> WaveSignal:
    """
    Разбиение на равные интервалы: компонента i в центре интервала i,
    H_i = 2 sqrt(2 S(omega_i) d_omega), фазы равномерно на [0, 2 pi).
    """
    if n_r < 1:
        raise DomainError(f"n_r must be >= 1, got {n_r}")
    d_omega = (omega_max - omega_min) / n_r
    omegas = omega_min + (np.arange(n_r) + 0.5) * d_omega
    heights = 2.0 * np.sqrt(2.0 * np.asarray(spectrum(omegas), dtype=float) * d_omega)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_r)
    return WaveSignal(
        amplitudes=heights / 2.0,
        wavenumbers=wavenumbers(omegas, depth, g),
        frequencies=omegas,
        phases=phases,
    )


def synthesize_wave(spectrum: Callable[[np.ndarray], np.ndarray], n_r: int, seed: int,
                    x: ArrayLike, t: ArrayLike, **kwargs) -> np.ndarray:
    """Возвышение поверхности eta(x, t) нерегулярного моря с заданным зерном"""
    return build_wave_signal(spectrum, n_r=n_r, seed=seed, **kwargs).elevation(x, t)


# ==================== QUADRATURE AND CLIMATE ====================

def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Узлы и веса Гаусса-Лежандра, отображенные на [a, b]"""
    if n < 1:
        raise DomainError(f"quadrature order must be >= 1, got {n}")
    if not a < b:
        raise DomainError(f"quadrature interval needs a < b, got [{a}, {b}]")
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


@dataclass
class WaveClimate:
    """Совместные плотности (Hs, Tp) по годам на тензорной сетке Гаусса-Лежандра"""
    hs_nodes: np.ndarray
    tp_nodes: np.ndarray
    hs_weights: np.ndarray
    tp_weights: np.ndarray
    prob: np.ndarray  # (n_yr, n_gq_hs, n_gq_tp)
    years: List[int] = field(default_factory=list)
    bandwidths: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.prob = np.asarray(self.prob, dtype=float)
        if self.prob.ndim == 2:
            self.prob = self.prob[np.newaxis]
        expected = (self.hs_nodes.size, self.tp_nodes.size)
        if self.prob.shape[1:] != expected:
            raise DataError(f"probability matrices {self.prob.shape[1:]} do not match nodes {expected}")
        if np.any(self.prob < 0):
            raise DataError("climate probabilities must be non-negative")
        if not self.years:
            self.years = list(range(1, self.prob.shape[0] + 1))

    @property
    def n_yr(self) -> int:
        return int(self.prob.shape[0])

    @property
    def n_gq(self) -> int:
        return int(self.hs_nodes.size)

    def weight_matrix(self) -> np.ndarray:
        return np.outer(self.hs_weights, self.tp_weights)

    def total_probability(self, year_index: int) -> float:
        return float(np.sum(self.weight_matrix() * self.prob[year_index]))

    def sea_states(self) -> Iterator[Tuple[int, int, SeaState]]:
        for i, hs in enumerate(self.hs_nodes):
            for j, tp in enumerate(self.tp_nodes):
                yield i, j, SeaState(float(hs), float(tp))

    def same_nodes(self, other: "WaveClimate") -> bool:
        return (np.array_equal(self.hs_nodes, other.hs_nodes)
                and np.array_equal(self.tp_nodes, other.tp_nodes))

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": "climate",
            "hs_nodes": self.hs_nodes.tolist(),
            "tp_nodes": self.tp_nodes.tolist(),
            "hs_weights": self.hs_weights.tolist(),
            "tp_weights": self.tp_weights.tolist(),
            "years": list(self.years),
            "prob": self.prob.tolist(),
            "bandwidths": dict(self.bandwidths),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WaveClimate":
        if data.get("format_version") != FORMAT_VERSION or data.get("kind") != "climate":
            raise DataError(f"unsupported climate document (format_version={data.get('format_version')})")
        return cls(
            hs_nodes=np.asarray(data["hs_nodes"], dtype=float),
            tp_nodes=np.asarray(data["tp_nodes"], dtype=float),
            hs_weights=np.asarray(data["hs_weights"], dtype=float),
            tp_weights=np.asarray(data["tp_weights"], dtype=float),
            prob=np.asarray(data["prob"], dtype=float),
            years=[int(y) for y in data["years"]],
            bandwidths={k: float(v) for k, v in data.get("bandwidths", {}).items()},
        )


def silverman_bandwidth(values: np.ndarray, dims: int = 2) -> float:
    """Ширина ядра по нормальному правилу для одной координаты d-мерной выборки"""
    n = values.size
    sigma = float(np.std(values, ddof=1)) if n > 1 else 0.0
    return sigma * (4.0 / ((dims + 2.0) * n)) ** (1.0 / (dims + 4.0))


def _log_kde(samples: np.ndarray, hs_nodes: np.ndarray, tp_nodes: np.ndarray,
             bw_hs: float, bw_tp: float) -> np.ndarray:
    """Логарифм ядерной плотности (произведение гауссиан) в каждой паре узлов"""
    z_hs = (hs_nodes[:, None] - samples[None, :, 0]) / bw_hs  # (n_hs, n_s)
    z_tp = (tp_nodes[:, None] - samples[None, :, 1]) / bw_tp  # (n_tp, n_s)
    log_k = -0.5 * (z_hs[:, None, :] ** 2 + z_tp[None, :, :] ** 2)
    norm = np.log(2.0 * np.pi * bw_hs * bw_tp * samples.shape[0])
    return logsumexp(log_k, axis=-1) - norm


def estimate_climate(samples: Dict[int, np.ndarray], n_gq: int = 20,
                     hs_box: Tuple[float, float] = DEFAULT_HS_BOX,
                     tp_box: Tuple[float, float] = DEFAULT_TP_BOX,
                     bandwidth: Optional[Dict[str, float]] = None) -> WaveClimate:
    """
    Ядерная оценка волнового климата по годам в узлах Гаусса-Лежандра.

    Args:
        samples: год -> массив строк (Hs, Tp)
        n_gq: число узлов квадратуры по каждой оси
        hs_box, tp_box: прямоугольник интегрирования
        bandwidth: {"hs": .., "tp": ..}; если не задано, правило Сильвермана

    Матрица каждого года перенормируется так, что sum_ij w_i w_j p_ij = 1 на прямоугольнике.
    """
    if not samples:
        raise DataError("no wave samples supplied")
    hs_nodes, hs_weights = gauss_legendre(n_gq, *hs_box)
    tp_nodes, tp_weights = gauss_legendre(n_gq, *tp_box)
    weights = np.outer(hs_weights, tp_weights)

    years = sorted(samples)
    matrices = []
    used_bw: Dict[str, float] = {}
    for year in years:
        data = np.asarray(samples[year], dtype=float).reshape(-1, 2)
        if data.shape[0] == 0:
            raise DataError(f"year {year} has no wave samples")
        if data.shape[0] < 2:
            raise DataError(f"year {year} needs at least 2 samples, got {data.shape[0]}")
        if bandwidth:
            bw_hs, bw_tp = float(bandwidth["hs"]), float(bandwidth["tp"])
        else:
            bw_hs = silverman_bandwidth(data[:, 0])
            bw_tp = silverman_bandwidth(data[:, 1])
            if bw_hs <= 0 or bw_tp <= 0:
                raise DataError(
                    f"year {year}: samples have no spread in "
                    f"{'Hs' if bw_hs <= 0 else 'Tp'}; provide at least two distinct values "
                    "or set explicit climate bandwidths"
                )
        if bw_hs <= 0 or bw_tp <= 0:
            raise DomainError(f"bandwidths must be positive, got hs={bw_hs}, tp={bw_tp}")

        log_density = _log_kde(data, hs_nodes, tp_nodes, bw_hs, bw_tp)
        # сдвиг перед exp: узкое ядро сохраняет массу в ближайшем узле
        density = np.exp(log_density - log_density.max())
        total = float(np.sum(weights * density))
        matrices.append(density / total)
        used_bw = {"hs": bw_hs, "tp": bw_tp}
        logger.debug(f"[CLIMATE][ESTIMATE] year {year}: {data.shape[0]} samples, "
                     f"bw_hs={bw_hs:.4g}, bw_tp={bw_tp:.4g}")

    logger.info(f"[CLIMATE][ESTIMATE] {len(years)} years on a {n_gq}x{n_gq} Gauss-Legendre grid")
    return WaveClimate(hs_nodes=hs_nodes, tp_nodes=tp_nodes, hs_weights=hs_weights,
                       tp_weights=tp_weights, prob=np.stack(matrices), years=list(years),
                       bandwidths=used_bw)


# ==================== INGESTION AND PERSISTENCE ====================

def synthetic_wave_samples(n_yr: int = 30, per_year: int = 240, seed: int = 0,
                           hs_box: Tuple[float, float] = DEFAULT_HS_BOX,
                           tp_box: Tuple[float, float] = DEFAULT_TP_BOX) -> Dict[int, np.ndarray]:
    """
    Детерминированная замена многолетней записи буя.

    Hs логнормальна около 2 м с медленным межгодовым дрейфом; Tp следует за
    Hs через соотношение вроде крутизны плюс разброс. Все обрезается по
    прямоугольнику интегрирования.
    """
    rng = np.random.default_rng(seed)
    samples: Dict[int, np.ndarray] = {}
    for year in range(1, n_yr + 1):
        drift = 0.08 * np.sin(2.0 * np.pi * year / 11.0)
        hs = rng.lognormal(mean=np.log(2.0) + drift, sigma=0.35, size=per_year)
        tp = 4.2 * np.sqrt(hs) + rng.normal(3.5, 1.6, size=per_year)
        hs = np.clip(hs, hs_box[0] * 1.01, hs_box[1] * 0.99)
        tp = np.clip(tp, tp_box[0] * 1.01, tp_box[1] * 0.99)
        samples[1975 + year] = np.column_stack([hs, tp])
    return samples


def load_wave_samples(path: Union[str, Path]) -> Dict[int, np.ndarray]:
    """Читает записи `year,hs,tp` (строка заголовка обязательна)"""
    path = Path(path)
    if not path.exists():
        raise DataError("wave sample file not found", path=str(path))
    grouped: Dict[int, List[Tuple[float, float]]] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        rows = [(n, r) for n, r in enumerate(csv.reader(handle), start=1)
                if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DataError("wave sample file is empty", path=str(path))
    header_line, header = rows[0]
    columns = [c.strip().lower() for c in header]
    if columns[:3] != ["year", "hs", "tp"]:
        raise DataError(f"expected header 'year,hs,tp', got {','.join(header)}",
                        path=str(path), line=header_line)
    for line_no, row in rows[1:]:
        try:
            year, hs, tp = int(row[0]), float(row[1]), float(row[2])
        except (ValueError, IndexError):
            raise DataError(f"malformed wave record {row!r}", path=str(path), line=line_no)
        if hs <= 0 or tp <= 0:
            raise DataError(f"non-positive Hs/Tp in record {row!r}", path=str(path), line=line_no)
        grouped.setdefault(year, []).append((hs, tp))
    if not grouped:
        raise DataError("wave sample file has a header but no records", path=str(path))
    logger.info(f"[CLIMATE][LOAD] {sum(len(v) for v in grouped.values())} records, "
                f"{len(grouped)} years from {path}")
    return {year: np.asarray(values) for year, values in sorted(grouped.items())}


def save_wave_samples(samples: Dict[int, np.ndarray], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        handle.write(f"# wavefarm-wave-samples v{FORMAT_VERSION}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["year", "hs", "tp"])
        for year in sorted(samples):
            for hs, tp in np.asarray(samples[year]).reshape(-1, 2):
                writer.writerow([year, repr(float(hs)), repr(float(tp))])
    return path


def save_climate(climate: WaveClimate, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(climate.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
    return path


def load_climate(path: Union[str, Path]) -> WaveClimate:
    path = Path(path)
    if not path.exists():
        raise DataError("climate file not found", path=str(path))
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"invalid JSON: {e}", path=str(path))
    return WaveClimate.from_dict(data)
