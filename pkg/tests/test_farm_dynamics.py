"""
Тесты динамики фермы и цепочки расчета мощности
"""
import json

import numpy as np
import pytest

from core.assembly import assemble_farm
from core.exceptions import DomainError, SingularityError
from core.farm_dynamics import (
    Efficiencies, average_power, evaluate_farm_power, farm_response, hydrostatics, interaction_factor,
    power_per_device, power_per_volume, power_regular, power_sea_state, response, save_power_result,
    spectral_weight_matrix, transfer_matrices, transfer_matrix,
)
from core.models import FarmDesign, PtoParams, WecGeometry
from core.optimizer import Bounds, decode_design, random_feasible
from core.surrogate import oracle_bundle
from core.wave_climate import FrequencyGrid, SeaState, WaveClimate, spectral_moment


def _one_pto(k=0.0, b=0.0):
    return PtoParams(np.array([k]), np.array([b]))


def test_hydrostatics_of_unit_cylinder():
    mass, stiffness = hydrostatics(WecGeometry(1.0, 2.0))
    assert stiffness == pytest.approx(31590.0, abs=1.0)
    assert mass == pytest.approx(1025.0 * np.pi * 2.0)


def test_transfer_at_resonance_is_pure_damping():
    h = transfer_matrix(2.0, 1000.0, 0.0, 10.0, 4000.0, _one_pto())
    assert abs(h[0, 0]) == pytest.approx(1.0 / (2.0 * 10.0))
    assert h[0, 0].real == pytest.approx(0.0, abs=1e-15)


def test_pto_shifts_resonance():
    h = transfer_matrix(2.0, 1000.0, 0.0, 10.0, 3000.0, _one_pto(k=1000.0, b=30.0))
    assert abs(h[0, 0]) == pytest.approx(1.0 / (2.0 * 40.0))


def test_singular_impedance_raises():
    with pytest.raises(SingularityError) as info:
        transfer_matrix(2.0, 1000.0, 0.0, 0.0, 4000.0, _one_pto())
    assert info.value.omega == pytest.approx(2.0)


def test_condition_limit_is_configurable():
    pto = _one_pto(b=1e-6)
    with pytest.raises(SingularityError):
        transfer_matrix(2.0, 1000.0, 0.0, 0.0, 4000.0, pto, condition_limit=1.0 - 1e-9)
    assert np.isfinite(transfer_matrix(2.0, 1000.0, 0.0, 0.0, 4000.0, pto)).all()


def test_farm_transfer_matrices_are_symmetric(bundle):
    layout = np.array([[0.0, 0.0], [150.0, 40.0], [-60.0, 200.0]])
    design = FarmDesign(WecGeometry(4.0, 3.0), PtoParams(np.full(3, 1e4), np.full(3, 2e5)), layout)
    matrices = assemble_farm(bundle, design)
    h = transfer_matrices(matrices, design.geometry, design.pto)
    assert h.shape == (bundle.grid.n_w, 3, 3)
    assert np.allclose(h, np.swapaxes(h, 1, 2), rtol=1e-10, atol=1e-14 * np.abs(h).max())
    with pytest.raises(DomainError):
        transfer_matrices(matrices, design.geometry, _one_pto())


def test_response_identities(rng):
    omegas = np.array([0.5, 1.0, 2.0])
    h = rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2))
    fe = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    xi, vel, acc = response(h, fe, omegas)
    assert np.allclose(xi[1], h[1] @ fe[1])
    assert np.allclose(vel, 1j * omegas[:, None] * xi)
    assert np.allclose(acc, -(omegas[:, None] ** 2) * xi)
    with pytest.raises(DomainError):
        response(h, fe[:, :1], omegas)


def test_response_amplitudes_time_series(bundle):
    design = FarmDesign(WecGeometry(4.0, 3.0), _one_pto(0.0, 1e5))
    amplitudes = farm_response(assemble_farm(bundle, design), design.geometry, design.pto)
    series = amplitudes.time_series([0.0, 1.0])
    assert series.shape == (bundle.grid.n_w, 1, 2)
    assert np.allclose(series[:, 0, 0], amplitudes.displacement[:, 0].real)
    assert np.allclose(amplitudes.velocity, 1j * bundle.grid.omegas[:, None] * amplitudes.displacement)


def test_regular_wave_power_formula():
    xi = np.array([0.5 + 0.5j, 2.0])
    p = power_regular(1.5, xi, np.array([100.0, 10.0]))
    assert p == pytest.approx(0.5 * 1.5 ** 2 * (100.0 * 0.5 + 10.0 * 4.0))
    assert power_regular(1.5, xi, np.zeros(2)) == 0.0
    with pytest.raises(DomainError):
        power_per_device(1.0, xi, np.array([-1.0, 1.0]))


def test_optimal_damping_absorbs_haskind_limit():
    omega, mass, added, b = 1.2, 5e5, 2e5, 3e4
    g_stiff = omega ** 2 * (mass + added)
    fe = 8e4
    h = transfer_matrix(omega, mass, added, b, g_stiff, _one_pto(b=b))
    xi = h @ np.array([fe])
    assert power_regular(omega, xi, np.array([b])) == pytest.approx(fe ** 2 / (8.0 * b), rel=1e-10)


def test_sea_state_power():
    grid = FrequencyGrid.uniform(0.1, 7.0, 400)
    sea = SeaState(2.0, 8.0)
    assert power_sea_state(sea, grid, np.ones(grid.n_w), spectrum=lambda w: np.zeros_like(w)) == 0.0
    unit = power_sea_state(sea, grid, np.ones(grid.n_w))
    assert unit == pytest.approx(2.0 * spectral_moment(2.0, 8.0), rel=1e-3)


def test_spectral_weight_rows_follow_nodes(climate, grid):
    weights = spectral_weight_matrix(climate, grid)
    assert weights.shape == (climate.n_gq ** 2, grid.n_w)
    sea = SeaState(float(climate.hs_nodes[1]), float(climate.tp_nodes[2]))
    p_m = np.linspace(1.0, 2.0, grid.n_w)
    assert weights[1 * climate.n_gq + 2] @ p_m == pytest.approx(power_sea_state(sea, grid, p_m))


def test_uniform_sea_state_power_averages_to_itself(climate):
    p_i = np.full((climate.n_gq, climate.n_gq), 1000.0)
    eff = Efficiencies()
    assert average_power(climate, p_i, eff) == pytest.approx(1000.0 * 0.8 * 0.95 * 0.98, rel=1e-6)
    assert average_power(climate, p_i, eff, year_average=False) == pytest.approx(
        3 * 1000.0 * eff.total, rel=1e-6)


def test_zero_probability_climate_gives_zero_power(climate):
    empty = WaveClimate(climate.hs_nodes, climate.tp_nodes, climate.hs_weights, climate.tp_weights,
                        np.zeros_like(climate.prob))
    assert average_power(empty, np.ones((climate.n_gq, climate.n_gq))) == 0.0


def test_year_order_does_not_matter(climate, rng):
    p_i = rng.uniform(0.0, 1e5, size=(climate.n_gq, climate.n_gq))
    shuffled = WaveClimate(climate.hs_nodes, climate.tp_nodes, climate.hs_weights, climate.tp_weights,
                           climate.prob[::-1].copy())
    assert average_power(shuffled, p_i) == average_power(climate, p_i)


def test_average_power_checks_shape(climate):
    with pytest.raises(DomainError):
        average_power(climate, np.ones((2, 2)))


def test_power_per_volume():
    geom = WecGeometry(2.0, 3.0)
    assert power_per_volume(1.2e5, geom) == pytest.approx(1.2e5 / (np.pi * 4.0 * 3.0))
    with pytest.raises(DomainError):
        power_per_volume(1.0, WecGeometry(0.0, 3.0))


# ==================== WHOLE CHAIN ====================

def test_single_body_power_chain(bundle, climate):
    design = FarmDesign(WecGeometry(4.0, 3.0), _one_pto(-2e4, 1e5))
    result = evaluate_farm_power(design, bundle, climate)
    assert result.p_a > 0
    assert result.p_v == pytest.approx(result.p_a / design.geometry.volume)
    assert result.p_a_device.sum() == pytest.approx(result.p_a, rel=1e-12)
    assert result.p_i.shape == (climate.n_gq, climate.n_gq)
    assert interaction_factor(design, bundle, climate, farm=result) == pytest.approx(1.0, rel=1e-12)


def test_farm_power_chain_and_export(bundle, climate, store):
    layout = np.array([[0.0, 0.0], [120.0, 60.0], [-40.0, 180.0]])
    design = FarmDesign(WecGeometry(4.0, 3.0), PtoParams(np.zeros(3), np.full(3, 1e5)), layout)
    result = evaluate_farm_power(design, bundle, climate)
    assert result.p_a_device.shape == (3,)
    assert result.p_a_device.sum() == pytest.approx(result.p_a, rel=1e-10)
    q = interaction_factor(design, bundle, climate, farm=result)
    assert 0.5 < q < 1.5
    files = save_power_result(result, climate, store, prefix="farm")
    document = json.loads(store.path("farm.json").read_text(encoding="utf-8"))
    assert document["kind"] == "power_result"
    assert document["p_a"] == result.p_a
    rows = store.load_csv("farm_nodes.csv")
    assert len(rows) == climate.n_gq ** 2
    assert files["csv"].endswith("farm_nodes.csv")


def test_weights_must_match_grid(bundle, climate):
    design = FarmDesign(WecGeometry(4.0, 3.0), _one_pto(0.0, 1e5))
    with pytest.raises(DomainError):
        evaluate_farm_power(design, bundle, climate, weights=np.ones((16, 3)))


# ==================== PHYSICAL CHECKS ====================

def test_sea_state_power_converges_with_grid(climate):
    design = FarmDesign(WecGeometry(5.0, 3.0), _one_pto(0.0, 3e5))
    sea = SeaState(2.0, 8.0)
    powers = []
    for n_w in (50, 100):
        grid = FrequencyGrid.uniform(0.1, 7.0, n_w)
        p_m = evaluate_farm_power(design, oracle_bundle(grid), climate).p_m
        powers.append(power_sea_state(sea, grid, p_m))
    assert powers[0] > 0
    assert abs(powers[0] - powers[1]) / powers[1] < 0.02


@pytest.mark.slow
def test_sea_state_powers_are_non_negative(bundle, climate):
    bounds = Bounds.for_farm(3, radius=(0.5, 5.0))
    rng = np.random.default_rng(21)
    checked = 0
    for _ in range(1000):
        design = decode_design(random_feasible(3, bounds, rng), 3)
        try:
            result = evaluate_farm_power(design, bundle, climate)
        except SingularityError:
            continue
        assert np.all(result.p_m_device >= 0)
        assert np.all(result.p_i >= 0)
        checked += 1
    assert checked > 900


def test_far_spaced_triangle_is_nearly_uncoupled(bundle):
    side = 900.0
    layout = np.array([[0.0, 0.0], [side, 0.0], [0.5 * side, 0.5 * np.sqrt(3.0) * side]])
    design = FarmDesign(WecGeometry(5.0, 3.0), PtoParams(np.zeros(3), np.full(3, 1e5)), layout)
    matrices = assemble_farm(bundle, design)
    off = ~np.eye(3, dtype=bool)
    for values in (matrices.added_mass, matrices.damping):
        diagonal = np.abs(np.diagonal(values, axis1=1, axis2=2))
        coupling = np.abs(values[:, off]).reshape(-1, 3, 2).max(axis=2)
        assert np.all(coupling < 0.05 * diagonal)
