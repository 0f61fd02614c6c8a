"""
Тесты кодирования проекта, ограничений, целевой функции и дифференциальной эволюции
"""
import numpy as np
import pytest

from core.exceptions import DomainError, InfeasibleDesignError
from core.farm_dynamics import evaluate_farm_power
from core.models import FarmDesign, PtoParams, WecGeometry, minimum_spacing
from core.optimizer import (
    Bounds, Evaluator, OptimizerConfig, box_half_width, box_residuals, decode_design, design_dimension,
    distance_constraints, encode_design, evaluate, optimize, random_baseline, random_feasible,
)


def _design(layout, radius=5.0, draft=4.0):
    n = len(layout)
    return FarmDesign(WecGeometry(radius, draft), PtoParams(np.full(n, 1e4), np.full(n, 2e5)),
                      np.asarray(layout, dtype=float))


def test_minimum_spacing_for_five_metre_radius():
    assert minimum_spacing(5.0) == pytest.approx(60.0)


def test_box_half_width_grows_with_farm():
    assert box_half_width(2) == pytest.approx(100.0)
    assert Bounds.for_farm(8).half_width == pytest.approx(0.5 * np.sqrt(160000.0))


def test_design_vector_round_trip():
    design = _design([[0.0, 0.0], [70.0, 10.0], [-20.0, 90.0]])
    x = encode_design(design)
    assert x.shape == (design_dimension(3),) == (12,)
    back = decode_design(x, 3)
    assert np.array_equal(back.layout, design.layout)
    assert np.array_equal(back.pto.damping, design.pto.damping)
    with pytest.raises(DomainError):
        decode_design(x[:-1], 3)
    with pytest.raises(DomainError):
        encode_design(_design([[1.0, 0.0], [80.0, 0.0]]))


def test_spacing_on_the_boundary_is_feasible():
    residual = distance_constraints([[0.0, 0.0], [60.0, 0.0]], 5.0)
    assert residual.shape == (1,)
    assert abs(residual[0]) <= 1e-9
    assert distance_constraints([[0.0, 0.0]], 5.0).size == 0


def test_box_residuals_sign():
    bounds = Bounds.for_farm(2)
    inside = np.array([5.0, 4.0, 0.0, 0.0, 1e5, 1e5, 70.0, 0.0])
    assert np.all(box_residuals(inside, bounds, 2) <= 0)
    outside = inside.copy()
    outside[0] = 12.0
    assert box_residuals(outside, bounds, 2)[0] == pytest.approx(2.0)


def test_bounds_validation():
    with pytest.raises(DomainError):
        Bounds(radius=(3.0, 1.0)).check()
    with pytest.raises(DomainError):
        Bounds(damping=(-1.0, 1.0)).check()
    with pytest.raises(DomainError):
        Bounds(half_width=0.0).check()


# ==================== OBJECTIVE ====================

def test_feasible_objective_is_negative_power_density(bundle, climate):
    design = _design([[0.0, 0.0], [80.0, 30.0]])
    bounds = Bounds.for_farm(2)
    expected = evaluate_farm_power(design, bundle, climate).p_v
    assert evaluate(design, bundle, climate, bounds) == pytest.approx(-expected, rel=1e-12)


def test_overlapping_design_is_penalized(bundle, climate):
    design = _design([[0.0, 0.0], [30.0, 0.0]])
    value = evaluate(design, bundle, climate, Bounds.for_farm(2), penalty=1e3)
    assert value == pytest.approx(1e3 * 30.0 ** 2)


def test_out_of_box_design_keeps_its_power_in_the_objective(bundle, climate):
    design = _design([[0.0, 0.0], [150.0, 0.0]])
    p_v = evaluate_farm_power(design, bundle, climate).p_v
    assert p_v > 0
    value = evaluate(design, bundle, climate, Bounds.for_farm(2), penalty=1e-3)
    assert value == pytest.approx(-p_v + 1e-3 * 50.0 ** 2, rel=1e-9)


def test_singular_design_gets_the_penalty(bundle, climate):
    evaluator = Evaluator(bundle, climate, 1, Bounds.for_farm(1), OptimizerConfig(condition_limit=0.5))
    evaluator.penalty = 123.0
    outcome = evaluator.outcome(np.array([5.0, 4.0, 0.0, 1e5]))
    assert outcome.singular and not outcome.feasible
    assert evaluator.objective(outcome) == 123.0


def test_single_body_has_no_layout_constraints(bundle, climate):
    evaluator = Evaluator(bundle, climate, 1, Bounds.for_farm(1))
    x = np.array([5.0, 4.0, 0.0, 1e5])
    assert evaluator.residuals(x).shape == (4,)
    assert evaluator.outcome(x).feasible


# ==================== RANDOM DESIGNS ====================

def test_random_feasible_respects_spacing_and_box():
    bounds = Bounds.for_farm(5, radius=(0.5, 4.0))
    for seed in range(5):
        x = random_feasible(5, bounds, seed)
        design = decode_design(x, 5)
        design.check_spacing()
        assert np.all(box_residuals(x, bounds, 5) <= 0)


def test_random_feasible_reports_exhaustion():
    bounds = Bounds.for_farm(3, radius=(10.0, 10.0), half_width=10.0)
    with pytest.raises(InfeasibleDesignError, match="could not place"):
        random_feasible(3, bounds, 0, max_tries=20)


def test_random_baseline_is_feasible(bundle, climate):
    bounds = Bounds.for_farm(2)
    evaluator = Evaluator(bundle, climate, 2, bounds)
    x, f = random_baseline(2, bounds, evaluator, count=4, seed=1)
    assert f == evaluator(x)
    assert f < 0


# ==================== DIFFERENTIAL EVOLUTION ====================

def test_budget_equal_to_population_runs_one_generation(bundle, climate):
    cfg = OptimizerConfig()
    result = optimize(2, Bounds.for_farm(2), bundle, climate, budget=cfg.population(2), seed=0, cfg=cfg)
    assert result.evaluations == 17
    assert result.generations == 1
    assert result.feasible


def test_partial_last_generation_keeps_budget_exact(bundle, climate):
    result = optimize(1, Bounds.for_farm(1), bundle, climate, budget=16 + 5, seed=2)
    assert result.evaluations == 21
    assert len(result.trace) == 21


def test_trace_best_is_monotone_and_run_improves_on_start(bundle, climate):
    result = optimize(2, Bounds.for_farm(2), bundle, climate, budget=60, seed=3)
    best = [p.best for p in result.trace]
    assert np.all(np.diff(best) <= 0)
    assert result.best_objective <= min(p.objective for p in result.trace[:17])
    assert result.feasible
    assert result.best_objective == pytest.approx(-result.p_v)
    assert np.all(result.residuals <= 1e-9)
    decode_design(result.best_vector, 2).check_spacing()


def test_optimizer_is_deterministic_across_thread_counts(bundle, climate):
    bounds = Bounds.for_farm(2)
    serial = optimize(2, bounds, bundle, climate, budget=40, seed=5)
    again = optimize(2, bounds, bundle, climate, budget=40, seed=5)
    threaded = optimize(2, bounds, bundle, climate, budget=40, seed=5, cfg=OptimizerConfig(threads=3))
    assert [p.objective for p in serial.trace] == [p.objective for p in again.trace]
    assert [p.objective for p in serial.trace] == [p.objective for p in threaded.trace]
    assert np.array_equal(serial.best_vector, threaded.best_vector)


def test_report_document(bundle, climate):
    result = optimize(1, Bounds.for_farm(1), bundle, climate, budget=16, seed=0)
    document = result.to_dict(record_wall_time=False)
    assert document["kind"] == "optimization"
    assert "wall_time" not in document
    assert document["layout"] == [[0.0, 0.0]]
    assert "wall_time" in result.to_dict()


def test_optimizer_argument_checks(bundle, climate):
    with pytest.raises(DomainError):
        optimize(2, Bounds.for_farm(2), bundle, climate, budget=5)
    with pytest.raises(DomainError):
        optimize(0, Bounds.for_farm(1), bundle, climate, budget=50)
