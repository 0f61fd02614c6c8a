"""
Команды оптимизации.

- optimize: совместный поиск геометрии, управления и раскладки для одного размера фермы
- report: сводит отчеты оптимизации в одну таблицу
"""
import hashlib
import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from config.run_config import RunConfig
from core.artifact_store import ArtifactStore
from core.exceptions import DataError, InfeasibleDesignError
from core.farm_dynamics import evaluate_farm_power, interaction_factor, save_power_result
from core.optimizer import Evaluator, optimize, random_baseline
from core.surrogate import load_bundle
from core.wave_climate import (
    WaveClimate, estimate_climate, load_climate, load_wave_samples, save_climate, synthetic_wave_samples,
)

logger = logging.getLogger(__name__)

REPORT_KIND = "optimization"
CLIMATE_SOURCE_KIND = "climate_source"
REPORT_NAME = re.compile(r"optimize_N\d+\.json")


def _climate_fingerprint(cfg: RunConfig, samples_file: Optional[Path]) -> str:
    """sha256 по секции climate, зерну и байтам использованного файла записей"""
    digest = hashlib.sha256()
    digest.update(json.dumps({"climate": cfg.climate.model_dump(mode="json"), "seed": cfg.seed},
                             sort_keys=True, separators=(",", ":")).encode("utf-8"))
    if samples_file is not None:
        digest.update(samples_file.read_bytes())
    return digest.hexdigest()


def _samples_file(cfg: RunConfig, store: ArtifactStore) -> Optional[Path]:
    if cfg.climate.samples_path:
        return Path(cfg.climate.samples_path)
    if store.exists(cfg.paths.wave_samples):
        return store.path(cfg.paths.wave_samples)
    return None


def prepare_climate(cfg: RunConfig, store: ArtifactStore) -> WaveClimate:
    """climate.json переиспользуется, только если построен из тех же настроек, зерна и записей"""
    path = store.path(cfg.paths.climate)
    source_name = f"{Path(cfg.paths.climate).stem}_source.json"
    samples_file = _samples_file(cfg, store)
    if samples_file is not None and not samples_file.exists():
        raise DataError("wave sample file not found", path=str(samples_file))
    fingerprint = _climate_fingerprint(cfg, samples_file)

    if path.exists() and store.exists(source_name):
        source = store.load_json(source_name, kind=CLIMATE_SOURCE_KIND)
        if source.get("fingerprint") == fingerprint:
            logger.info(f"[CMD][CLIMATE] reusing {path}")
            return load_climate(path)
        logger.info(f"[CMD][CLIMATE] {path} was built from other settings; re-estimating")
    elif path.exists():
        logger.warning(f"[CMD][CLIMATE] {path} has no source record; re-estimating")

    c = cfg.climate
    if samples_file is not None:
        samples = load_wave_samples(samples_file)
    else:
        samples = synthetic_wave_samples(c.n_yr, c.per_year, cfg.seed, c.hs_box, c.tp_box)
    climate = estimate_climate(samples, c.n_gq, c.hs_box, c.tp_box, c.bandwidth())
    store.root.mkdir(parents=True, exist_ok=True)
    save_climate(climate, path)
    store.save_json(source_name, {"kind": CLIMATE_SOURCE_KIND, "fingerprint": fingerprint})
    return climate


def cmd_optimize(cfg: RunConfig, store: ArtifactStore) -> Dict[str, Any]:
    """
    Запускает поиск и пишет отчет, след, раскладку и файлы мощности.

    Если допустимый проект не найден, сначала пишет отчет с флагом
    feasible: false, затем выбрасывает InfeasibleDesignError.
    """
    bundle = load_bundle(store.path(cfg.paths.bundle))
    climate = prepare_climate(cfg, store)
    opt = cfg.optimizer
    bounds = opt.to_bounds()
    opt_cfg = cfg.optimizer_config()
    n = opt.n_wec

    result = optimize(n, bounds, bundle, climate, opt.budget, cfg.seed, opt_cfg)
    report = result.to_dict(record_wall_time=cfg.report.record_wall_time)
    report["config_hash"] = cfg.config_hash()
    report["preset"] = cfg.preset

    prefix = f"optimize_N{n}"
    if result.feasible:
        design = result.design
        evaluator = Evaluator(bundle, climate, n, bounds, opt_cfg)
        power = evaluate_farm_power(design, bundle, climate, bundle.grid, opt_cfg.efficiencies,
                                    evaluator.weights, opt_cfg.year_average, opt_cfg.condition_limit)
        report["p_a"] = power.p_a
        report["q_factor"] = interaction_factor(design, bundle, climate, bundle.grid, opt_cfg.efficiencies,
                                                evaluator.weights, opt_cfg.year_average, farm=power)
        save_power_result(power, climate, store, prefix=f"{prefix}_power")
        if opt.baseline_count > 0:
            _, baseline = random_baseline(n, bounds, evaluator, opt.baseline_count, cfg.seed)
            report["baseline_objective"] = baseline

    store.save_json(f"{prefix}.json", report)
    store.save_csv(f"{prefix}_trace.csv", "trace", ["evaluation", "objective", "best"],
                   [[p.evaluation, p.objective, p.best] for p in result.trace])
    design = result.design
    store.save_csv(f"{prefix}_layout.csv", "layout", ["wec", "x", "y", "stiffness", "damping"],
                   [[i + 1, float(x), float(y), float(k), float(b)]
                    for i, ((x, y), k, b) in enumerate(zip(design.layout, design.pto.stiffness,
                                                           design.pto.damping))])
    if not result.feasible:
        raise InfeasibleDesignError(
            f"no feasible design for N={n} within {result.evaluations} evaluations "
            f"(flagged report written to {store.path(prefix + '.json')})")
    return report


def cmd_report(cfg: RunConfig, store: ArtifactStore, paths: Optional[Sequence[str]] = None) -> List[Dict[str, Any]]:
    """Сводная таблица (N, R, D, p_v, время, зерно), отсортированная по N"""
    if paths:
        sources = [Path(p) for p in paths]
    else:
        sources = sorted(p for p in store.root.glob("optimize_N*.json") if REPORT_NAME.fullmatch(p.name))
    if not sources:
        raise DataError("no optimization reports to merge", path=str(store.root))
    rows = []
    for source in sources:
        document = store.load_json(source if source.is_absolute() else Path.cwd() / source, kind=REPORT_KIND)
        rows.append({
            "n_wec": int(document["n_wec"]),
            "radius": float(document["radius"]),
            "draft": float(document["draft"]),
            "p_v": None if document["p_v"] is None else float(document["p_v"]),
            "wall_time": document.get("wall_time"),
            "seed": int(document["seed"]),
            "feasible": bool(document["feasible"]),
        })
    rows.sort(key=lambda r: (r["n_wec"], r["seed"]))
    columns = ["n_wec", "radius", "draft", "p_v", "wall_time", "seed", "feasible"]
    store.save_csv("report.csv", "report", columns, [[row[c] for c in columns] for row in rows])
    store.save_json("report.json", {"kind": "report", "runs": rows})
    logger.info(f"[CMD][REPORT] {len(rows)} runs merged")
    return rows
