"""
Команды суррогата.

- train: обучает бандл из 30 сетей (или пишет бандл обхода через оракул)
- validate: сравнение суррогата с оракулом для одного тела и одной пары
"""
import logging
from typing import Any, Dict

from config.run_config import RunConfig
from core.artifact_store import ArtifactStore
from core.datasets import load_dataset
from core.exceptions import DataError
from core.models import PairConfig, WecGeometry
from core.surrogate import evaluate_against_oracle, load_bundle, save_bundle, train_bundle

logger = logging.getLogger(__name__)


def cmd_train(cfg: RunConfig, store: ArtifactStore) -> Dict[str, Any]:
    """Обучает бандл по сохраненным датасетам"""
    one = load_dataset(store.path(cfg.paths.one_body))
    two = load_dataset(store.path(cfg.paths.two_body))
    expected = cfg.grid.to_grid()
    for ds in (one, two):
        if ds.depth != cfg.physics.depth:
            raise DataError(f"{ds.kind}-body dataset was generated for depth {ds.depth}, "
                            f"configuration says {cfg.physics.depth}")
        if not ds.grid.matches(expected):
            raise DataError(f"{ds.kind}-body dataset has {ds.grid.n_w} frequencies that do not match "
                            f"the configured grid ({expected.n_w} points); rerun gen-data")

    bundle = train_bundle(one, two, cfg.surrogate_config(), cfg.physics.rho, cfg.physics.g,
                          cfg.training_data.safe_factor)
    bundle_path = save_bundle(bundle, store.path(cfg.paths.bundle))
    store.save_json(cfg.paths.metrics, {
        "kind": "metrics",
        "mode": bundle.mode,
        "model_count": bundle.model_count,
        "models": bundle.metrics,
        "config_hash": cfg.config_hash(),
    })
    store.save_csv("metrics.csv", "metrics", ["model", "test_rmse"],
                   [[name, bundle.metrics[name]] for name in sorted(bundle.metrics)])
    logger.info(f"[CMD][TRAIN] {bundle.mode} bundle with {bundle.model_count} models -> {bundle_path}")
    return {"mode": bundle.mode, "model_count": bundle.model_count, "metrics": bundle.metrics,
            "bundle": str(bundle_path)}


def _write_curves(store: ArtifactStore, name: str, curves: Dict[str, Any]) -> str:
    columns = list(curves)
    rows = [[float(curves[c][k]) for c in columns] for k in range(len(curves["omega"]))]
    return str(store.save_csv(name, "validation", columns, rows))


def cmd_validate(cfg: RunConfig, store: ArtifactStore) -> Dict[str, Any]:
    """Кривые сравнения по частотам и сводка ошибок"""
    bundle = load_bundle(store.path(cfg.paths.bundle))
    v = cfg.validate_
    single = WecGeometry(v.radius, v.draft)
    pair = PairConfig(WecGeometry(v.pair_radius, v.pair_draft), v.distance, v.theta)

    single_eval = evaluate_against_oracle(bundle, single)
    pair_eval = evaluate_against_oracle(bundle, pair)
    files = {
        "single": _write_curves(store, "validate_single.csv", single_eval["curves"]),
        "pair": _write_curves(store, "validate_pair.csv", pair_eval["curves"]),
    }
    errors = {"single": single_eval["errors"], "pair": pair_eval["errors"]}
    store.save_json("validation.json", {
        "kind": "validation",
        "mode": bundle.mode,
        "single": {"radius": v.radius, "draft": v.draft},
        "pair": {"radius": v.pair_radius, "draft": v.pair_draft, "distance": v.distance, "theta": v.theta},
        "errors": errors,
    })
    logger.info(f"[CMD][VALIDATE] curves on {bundle.grid.n_w} frequencies written")
    return {"errors": errors, "files": files}
