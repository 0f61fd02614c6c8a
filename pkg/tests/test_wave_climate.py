"""
Тесты спектра, дисперсии, синтеза волн и климата
"""
from pathlib import Path

import numpy as np
import pytest

from core.exceptions import DataError, DomainError
from core.wave_climate import (
    FrequencyGrid, SeaState, WaveClimate, build_wave_signal, estimate_climate, gauss_legendre,
    jonswap_spectrum, load_climate, load_wave_samples, peak_enhancement, save_climate, save_wave_samples,
    solve_dispersion, spectral_moment, synthesize_wave, synthetic_wave_samples,
)


# ==================== SPECTRUM ====================

@pytest.mark.parametrize("hs, tp, gamma", [
    (2.0, 10.0, 1.0),
    (1.0, 3.6, 5.0),
    (1.0, 4.5, float(np.exp(5.75 - 1.15 * 4.5))),
    (4.0, 7.0, 5.0),
])
def test_peak_enhancement_branches(hs, tp, gamma):
    assert peak_enhancement(hs, tp) == pytest.approx(gamma, rel=1e-12)


@pytest.mark.parametrize("hs, tp", [(2.0, 10.0), (1.0, 3.6), (1.0, 4.5), (3.0, 9.0)])
def test_zeroth_moment_matches_significant_height(hs, tp):
    m0 = spectral_moment(hs, tp, 0, 0.1, 7.0)
    assert abs(16.0 * m0 / hs ** 2 - 1.0) < 0.1


def test_spectrum_non_negative_and_vanishes_at_ends():
    w = np.linspace(0.05, 40.0, 4000)
    s = jonswap_spectrum(2.0, 8.0, w)
    assert np.all(s >= 0)
    assert s[0] < 1e-12 * s.max()
    assert s[-1] < 1e-4 * s.max()


def test_spectrum_peak_near_peak_frequency():
    w = np.linspace(0.1, 7.0, 20001)
    step = w[1] - w[0]
    for hs, tp in [(2.0, 10.0), (1.0, 3.6), (1.0, 4.5)]:
        s = jonswap_spectrum(hs, tp, w)
        assert abs(w[np.argmax(s)] - 2.0 * np.pi / tp) <= step


@pytest.mark.parametrize("hs, tp, omega", [(0.0, 8.0, 1.0), (2.0, -1.0, 1.0), (2.0, 8.0, 0.0)])
def test_spectrum_rejects_non_positive_inputs(hs, tp, omega):
    with pytest.raises(DomainError):
        jonswap_spectrum(hs, tp, omega)


def test_sea_state_validation():
    assert SeaState(2.0, 8.0).peak_frequency == pytest.approx(2.0 * np.pi / 8.0)
    with pytest.raises(DomainError):
        SeaState(-1.0, 8.0)
    with pytest.raises(DomainError):
        SeaState(2.0, 8.0, beta_w=0.3)


# ==================== DISPERSION ====================

def test_dispersion_deep_water_limit():
    k = solve_dispersion(1.0, 1e6, 9.81)
    assert k == pytest.approx(1.0 / 9.81, rel=1e-6)


def test_dispersion_shallow_water_limit():
    k = solve_dispersion(0.05, 1.0, 9.81)
    assert k == pytest.approx(0.05 / np.sqrt(9.81), rel=1e-3)


def test_dispersion_intermediate_depth():
    omega, h, g = 0.5, 50.0, 9.81
    k = solve_dispersion(omega, h, g)
    assert 0.025484 < k < 0.0316
    assert abs(omega ** 2 - g * k * np.tanh(k * h)) < 1e-10 * omega ** 2


def test_dispersion_residual_and_monotonicity_on_grid():
    omegas = np.linspace(0.05, 7.0, 80)
    ks = np.array([solve_dispersion(w, 50.0) for w in omegas])
    residual = np.abs(omegas ** 2 - 9.81 * ks * np.tanh(ks * 50.0))
    assert np.all(residual < 1e-10 * omegas ** 2)
    assert np.all(np.diff(ks) > 0)


def test_dispersion_rejects_bad_inputs():
    with pytest.raises(DomainError):
        solve_dispersion(0.0, 50.0)
    with pytest.raises(DomainError):
        solve_dispersion(1.0, -5.0)


# ==================== SYNTHESIS ====================

def test_single_component_is_one_harmonic():
    signal = build_wave_signal(lambda w: np.full_like(w, 0.3), n_r=1, seed=5)
    x = np.linspace(0.0, 200.0, 7)
    t = np.linspace(0.0, 30.0, 7)
    expected = signal.amplitudes[0] * np.cos(signal.wavenumbers[0] * x - signal.frequencies[0] * t
                                             + signal.phases[0])
    assert np.allclose(signal.elevation(x, t), expected, rtol=0, atol=1e-14)
    assert 0.0 <= signal.phases[0] < 2.0 * np.pi


def test_synthesis_is_reproducible():
    spectrum = SeaState(2.0, 8.0).spectrum
    t = np.linspace(0.0, 100.0, 50)
    first = synthesize_wave(spectrum, 64, 9, 0.0, t)
    second = synthesize_wave(spectrum, 64, 9, 0.0, t)
    assert np.array_equal(first, second)
    assert not np.array_equal(first, synthesize_wave(spectrum, 64, 10, 0.0, t))


def test_time_series_variance_matches_zeroth_moment():
    sea = SeaState(2.0, 8.0)
    n_r = 200
    signal = build_wave_signal(sea.spectrum, n_r=n_r, seed=3)
    period = 2.0 * np.pi / ((7.0 - 0.1) / n_r)
    t = np.linspace(0.0, period, 20000, endpoint=False)
    eta = signal.elevation(0.0, t)
    m0 = spectral_moment(sea.hs, sea.tp)
    assert np.var(eta) == pytest.approx(m0, rel=0.05)
    assert signal.variance() == pytest.approx(m0, rel=0.05)


def test_wave_signal_rejects_zero_components():
    with pytest.raises(DomainError):
        build_wave_signal(lambda w: w, n_r=0)


# ==================== QUADRATURE ====================

def test_gauss_legendre_midpoint():
    nodes, weights = gauss_legendre(1, -1.0, 1.0)
    assert nodes[0] == pytest.approx(0.0, abs=1e-15)
    assert weights[0] == pytest.approx(2.0)


def test_gauss_legendre_exact_polynomial():
    nodes, weights = gauss_legendre(20, 0.0, 1.0)
    assert abs(np.sum(weights * nodes ** 19) - 1.0 / 20.0) < 1e-13
    assert np.all((nodes > 0.0) & (nodes < 1.0))


def test_gauss_legendre_weight_sum():
    _, weights = gauss_legendre(7, 2.0, 14.0)
    assert abs(weights.sum() - 12.0) < 1e-12


def test_gauss_legendre_rejects_zero_order():
    with pytest.raises(DomainError):
        gauss_legendre(0)
    with pytest.raises(DomainError):
        gauss_legendre(3, 1.0, 1.0)


def test_frequency_grid_validation():
    grid = FrequencyGrid.uniform()
    assert grid.n_w == 50
    assert grid.bin_widths().sum() == pytest.approx(6.9)
    with pytest.raises(DomainError):
        FrequencyGrid(np.array([1.0, 0.5]))
    with pytest.raises(DomainError):
        FrequencyGrid(np.array([0.0, 0.5]))


# ==================== CLIMATE ====================

def test_climate_is_normalized_per_year(climate):
    assert climate.n_yr == 3
    for y in range(climate.n_yr):
        assert abs(climate.total_probability(y) - 1.0) < 1e-6
    assert np.all(climate.prob >= 0)


def test_sea_states_walk_every_node(climate):
    states = list(climate.sea_states())
    assert len(states) == climate.n_gq ** 2
    i, j, state = states[climate.n_gq + 2]
    assert (i, j) == (1, 2)
    assert state.hs == pytest.approx(climate.hs_nodes[1])
    assert state.tp == pytest.approx(climate.tp_nodes[2])


def test_tiny_bandwidth_concentrates_on_nearest_node():
    nodes, weights = gauss_legendre(6, 0.25, 8.0)
    tp_nodes, tp_weights = gauss_legendre(6, 2.0, 20.0)
    point = (nodes[2] + 1e-4, tp_nodes[4] - 1e-4)
    climate = estimate_climate({2001: np.array([point, point, point])}, n_gq=6,
                               bandwidth={"hs": 1e-3, "tp": 1e-3})
    prob = climate.prob[0]
    assert np.unravel_index(np.argmax(prob), prob.shape) == (2, 4)
    assert prob[2, 4] * weights[2] * tp_weights[4] == pytest.approx(1.0, rel=1e-9)
    assert climate.total_probability(0) == pytest.approx(1.0, abs=1e-6)


def test_uniform_samples_give_near_uniform_density():
    rng = np.random.default_rng(0)
    data = np.column_stack([rng.uniform(0.25, 8.0, 20000), rng.uniform(2.0, 20.0, 20000)])
    climate = estimate_climate({1: data}, n_gq=5, bandwidth={"hs": 0.5, "tp": 1.2})
    prob = climate.prob[0]
    assert climate.total_probability(0) == pytest.approx(1.0, abs=1e-6)
    # центральный узел против среднего по боксу
    box_mean = 1.0 / (7.75 * 18.0)
    assert prob[2, 2] == pytest.approx(box_mean, rel=0.3)


def test_thirty_years_give_thirty_matrices():
    samples = synthetic_wave_samples(n_yr=30, per_year=40, seed=2)
    climate = estimate_climate(samples, n_gq=4)
    assert climate.n_yr == 30
    assert climate.prob.shape == (30, 4, 4)
    assert climate.years[0] == 1976


def test_degenerate_samples_are_rejected():
    with pytest.raises(DataError, match="spread"):
        estimate_climate({1: np.array([[2.0, 8.0], [2.0, 8.0]])}, n_gq=4)


def test_empty_and_single_sample_years_are_rejected():
    with pytest.raises(DataError):
        estimate_climate({}, n_gq=4)
    with pytest.raises(DataError):
        estimate_climate({1: np.empty((0, 2))}, n_gq=4)
    with pytest.raises(DataError):
        estimate_climate({1: np.array([[2.0, 8.0]])}, n_gq=4)


def test_explicit_bandwidth_must_be_positive():
    with pytest.raises(DomainError):
        estimate_climate({1: np.array([[1.0, 6.0], [2.0, 8.0]])}, n_gq=4,
                         bandwidth={"hs": 0.0, "tp": 1.0})


def test_climate_json_round_trip(climate, tmp_path):
    path = save_climate(climate, tmp_path / "climate.json")
    loaded = load_climate(path)
    assert loaded.same_nodes(climate)
    assert np.array_equal(loaded.prob, climate.prob)
    assert loaded.years == climate.years


def test_climate_rejects_foreign_document():
    with pytest.raises(DataError):
        WaveClimate.from_dict({"format_version": 99, "kind": "climate"})


# ==================== SAMPLE FILES ====================

def test_wave_samples_round_trip(samples, tmp_path):
    path = save_wave_samples(samples, tmp_path / "waves.csv")
    loaded = load_wave_samples(path)
    assert sorted(loaded) == sorted(samples)
    for year in samples:
        assert np.array_equal(loaded[year], samples[year])


def test_wave_samples_require_header(tmp_path):
    path = tmp_path / "waves.csv"
    path.write_text("2001,1.5,7.0\n2001,2.0,8.0\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        load_wave_samples(path)
    assert info.value.line == 1


def test_wave_samples_report_malformed_line(tmp_path):
    path = tmp_path / "waves.csv"
    path.write_text("year,hs,tp\n2001,1.5,7.0\n2001,oops,8.0\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        load_wave_samples(path)
    assert info.value.line == 3
    assert ":3:" in str(info.value)


def test_bundled_sample_file_loads():
    samples = load_wave_samples(Path(__file__).parent.parent / "data" / "sample_wave_records.csv")
    assert sorted(samples) == [2001, 2002, 2003]
    climate = estimate_climate(samples, n_gq=5)
    assert climate.n_yr == 3
