"""
Команда генерации данных.

- gen-data: гидродинамические датасеты одного и двух тел (оракул или
  импортированные BEM-таблицы) и синтетические записи волн, если файл
  записей не задан
"""
import logging
from typing import Any, Dict

from config.run_config import RunConfig
from core.artifact_store import ArtifactStore
from core.datasets import import_bem_tables, save_dataset
from core.exceptions import DataError
from core.hydro_oracle import generate_training_data
from core.wave_climate import save_wave_samples, synthetic_wave_samples

logger = logging.getLogger(__name__)


def cmd_gen_data(cfg: RunConfig, store: ArtifactStore) -> Dict[str, Any]:
    """Записывает обучающие датасеты и возвращает сводку"""
    paths = cfg.paths
    grid = cfg.grid.to_grid()
    phys = cfg.physics

    if paths.bem_one or paths.bem_two:
        if not (paths.bem_one and paths.bem_two):
            raise DataError("set both paths.bem_one and paths.bem_two to import BEM tables")
        one = import_bem_tables(paths.bem_one)
        two = import_bem_tables(paths.bem_two)
        if one.kind != "one" or two.kind != "two":
            raise DataError(f"BEM tables hold {one.kind}/{two.kind}-body data, expected one/two")
        source = "bem"
    else:
        one, two = generate_training_data(
            grid, cfg.training_data.to_ranges(), n_one=cfg.training_data.n_one,
            n_two=cfg.training_data.n_two, seed=cfg.seed, depth=phys.depth, g=phys.g,
            rho=phys.rho, threads=cfg.threads,
        )
        source = "oracle"

    store.root.mkdir(parents=True, exist_ok=True)
    files = {
        "one_body": str(save_dataset(one, store.path(paths.one_body))),
        "two_body": str(save_dataset(two, store.path(paths.two_body))),
    }
    if cfg.climate.samples_path is None:
        samples = synthetic_wave_samples(cfg.climate.n_yr, cfg.climate.per_year, cfg.seed,
                                         cfg.climate.hs_box, cfg.climate.tp_box)
        files["wave_samples"] = str(save_wave_samples(samples, store.path(paths.wave_samples)))

    logger.info(f"[CMD][GEN_DATA] {len(one)} + {len(two)} records ({source}), seed {cfg.seed}")
    return {"one_records": len(one), "two_records": len(two), "seed": cfg.seed,
            "source": source, "files": files}
