"""
Файлы гидродинамических датасетов.

Формат обмена (один файл на датасет):

    # wavefarm-hydro v1 kind=<one|two> h=<m> n_w=<int>
    record,R,D[,d,theta],omega,<targets...>
    0,8.0,4.0,0.1,...

по числовой строке на пару (запись, omega); записи идут подряд, нумерация с 0.

Таблицы BEM (по файлу `*.dat` на запись, читаются в порядке имен):

    # wavefarm-bem kind=<one|two> R=<m> D=<m> [d=<m> theta=<rad>] h=<m>
    omega  a  b  fe_re  fe_im                    (одно тело)
    omega  a11 a12 b11 b12 fe_re fe_im           (два тела)

Строки, начинающиеся с '#', '%', '!', и заголовки Tecplot TITLE/VARIABLES/ZONE
пропускаются; разбирается только строка метаданных.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from core.exceptions import DataError
from core.hydro_oracle import ONE_BODY_TARGETS, TWO_BODY_TARGETS, HydroDataset, HydroRecord
from core.wave_climate import FrequencyGrid

logger = logging.getLogger(__name__)

MAGIC = "# wavefarm-hydro v1"
BEM_MAGIC = "# wavefarm-bem"
SKIP_PREFIXES = ("#", "%", "!")
TECPLOT_HEADERS = ("TITLE", "VARIABLES", "ZONE")


def _columns(kind: str) -> List[str]:
    if kind == "one":
        return ["record", "R", "D", "omega", *ONE_BODY_TARGETS]
    return ["record", "R", "D", "d", "theta", "omega", *TWO_BODY_TARGETS]


def _parse_header(line: str, path: str) -> Dict[str, str]:
    if not line.startswith(MAGIC):
        raise DataError(f"missing '{MAGIC}' header", path=path, line=1)
    fields = {}
    for token in line[len(MAGIC):].split():
        key, _, value = token.partition("=")
        fields[key] = value
    for key in ("kind", "h", "n_w"):
        if key not in fields:
            raise DataError(f"header lacks '{key}='", path=path, line=1)
    if fields["kind"] not in ("one", "two"):
        raise DataError(f"unknown dataset kind {fields['kind']!r}", path=path, line=1)
    return fields


def save_dataset(ds: HydroDataset, path: Union[str, Path]) -> Path:
    """Пишет файл обмена; числа в кратчайшем точном repr"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = _columns(ds.kind)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{MAGIC} kind={ds.kind} h={ds.depth!r} n_w={ds.grid.n_w}\n")
        handle.write(",".join(columns) + "\n")
        for index, rec in enumerate(ds.records):
            inputs = [rec.radius, rec.draft]
            if ds.kind == "two":
                inputs += [rec.distance, rec.theta]
            for k, omega in enumerate(ds.grid.omegas):
                values = [rec.values[name][k] for name in ds.targets]
                cells = [str(index)] + [repr(float(v)) for v in (*inputs, omega, *values)]
                handle.write(",".join(cells) + "\n")
    logger.info(f"[DATA][SAVE] {ds.kind}-body dataset: {len(ds)} records -> {path}")
    return path


def load_dataset(path: Union[str, Path]) -> HydroDataset:
    """Читает файл обмена с проверкой схемы, порядка записей и сетки"""
    path = Path(path)
    spath = str(path)
    if not path.exists():
        raise DataError("dataset file not found", path=spath)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DataError("dataset file is empty", path=spath)
    header = _parse_header(lines[0], spath)
    kind = header["kind"]
    try:
        depth = float(header["h"])
        n_w = int(header["n_w"])
    except ValueError:
        raise DataError("header h/n_w are not numeric", path=spath, line=1)
    columns = _columns(kind)
    if len(lines) < 2 or [c.strip() for c in lines[1].split(",")] != columns:
        raise DataError(f"expected column header {','.join(columns)}", path=spath, line=2)

    n_inputs = 2 if kind == "one" else 4
    targets = ONE_BODY_TARGETS if kind == "one" else TWO_BODY_TARGETS
    records: List[HydroRecord] = []
    grid_ref: Optional[np.ndarray] = None
    block: List[List[float]] = []
    block_start = 3

    def close_block(last_line: int):
        nonlocal grid_ref
        if len(block) != n_w:
            raise DataError(f"record {len(records)} has {len(block)} of {n_w} frequency rows",
                            path=spath, line=last_line)
        arr = np.asarray(block)
        inputs = arr[:, 1:1 + n_inputs]
        if np.any(inputs != inputs[0]):
            raise DataError(f"record {len(records)} changes its inputs between rows",
                            path=spath, line=block_start)
        omegas = arr[:, 1 + n_inputs]
        if grid_ref is None:
            grid_ref = omegas
        elif not np.array_equal(grid_ref, omegas):
            raise DataError(f"record {len(records)} uses a different frequency grid",
                            path=spath, line=block_start)
        values = {name: arr[:, 2 + n_inputs + i].copy() for i, name in enumerate(targets)}
        rec = HydroRecord(radius=float(inputs[0, 0]), draft=float(inputs[0, 1]), values=values)
        if kind == "two":
            rec.distance = float(inputs[0, 2])
            rec.theta = float(inputs[0, 3])
        records.append(rec)
        block.clear()

    line_no = 2
    for line_no, raw in enumerate(lines[2:], start=3):
        if not raw.strip():
            continue
        cells = raw.split(",")
        if len(cells) != len(columns):
            raise DataError(f"row has {len(cells)} fields, {kind}-body schema needs {len(columns)}",
                            path=spath, line=line_no)
        try:
            index = int(cells[0])
            row = [float(c) for c in cells]
        except ValueError:
            raise DataError(f"malformed row {raw!r}", path=spath, line=line_no)
        if not all(np.isfinite(row)):
            raise DataError("non-finite value", path=spath, line=line_no)
        if index != len(records):
            if index == len(records) + 1 and block:
                close_block(line_no - 1)
                block_start = line_no
            else:
                raise DataError(f"unexpected record index {index}", path=spath, line=line_no)
        block.append(row)
    if block:
        close_block(line_no)
    if not records:
        raise DataError("dataset has no records", path=spath)

    ds = HydroDataset(kind, records, FrequencyGrid(grid_ref), depth)
    logger.info(f"[DATA][LOAD] {kind}-body dataset: {len(records)} records from {path}")
    return ds


# ==================== BEM TABLES ====================

def _is_skipped(line: str) -> bool:
    stripped = line.strip()
    if not stripped or stripped.startswith(SKIP_PREFIXES):
        return True
    return stripped.split(None, 1)[0].rstrip("=").upper() in TECPLOT_HEADERS


def _read_bem_table(path: Path) -> Tuple[Dict[str, str], np.ndarray]:
    spath = str(path)
    meta: Dict[str, str] = {}
    rows: List[List[float]] = []
    width = None
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if raw.startswith(BEM_MAGIC):
            for token in raw[len(BEM_MAGIC):].split():
                key, _, value = token.partition("=")
                meta[key] = value
            continue
        if _is_skipped(raw):
            continue
        try:
            row = [float(c) for c in raw.split()]
        except ValueError:
            raise DataError(f"non-numeric table row {raw.strip()!r}", path=spath, line=line_no)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataError(f"row has {len(row)} columns, previous rows {width}", path=spath, line=line_no)
        rows.append(row)
    if "kind" not in meta:
        raise DataError(f"missing '{BEM_MAGIC} kind=... R=... D=... h=...' metadata line", path=spath)
    if not rows:
        raise DataError("table has headers but no coefficient rows (empty dataset)", path=spath)
    return meta, np.asarray(rows)


def import_bem_tables(directory: Union[str, Path]) -> HydroDataset:
    """Собирает датасет из таблиц коэффициентов по записям"""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError("BEM table directory not found", path=str(directory))
    files = sorted(directory.glob("*.dat"))
    if not files:
        raise DataError("no *.dat tables in directory (empty dataset)", path=str(directory))

    kind = None
    depth = None
    grid_ref = None
    records = []
    for path in files:
        spath = str(path)
        meta, table = _read_bem_table(path)
        this_kind = meta["kind"]
        if this_kind not in ("one", "two"):
            raise DataError(f"unknown kind {this_kind!r}", path=spath)
        if kind is None:
            kind = this_kind
        elif this_kind != kind:
            raise DataError(f"mixed table kinds: {kind} and {this_kind}", path=spath)
        targets = ONE_BODY_TARGETS if kind == "one" else TWO_BODY_TARGETS
        expected = ["omega", *targets]
        if table.shape[1] != len(expected):
            raise DataError(
                f"{table.shape[1]} columns found; {kind}-body tables need {len(expected)}: "
                f"{' '.join(expected)}", path=spath)
        required = ["R", "D", "h"] + (["d", "theta"] if kind == "two" else [])
        missing = [key for key in required if key not in meta]
        if missing:
            raise DataError(f"metadata lacks {', '.join(missing)}", path=spath)
        omegas = table[:, 0]
        if np.any(np.diff(omegas) <= 0):
            raise DataError("omega column is not strictly increasing", path=spath)
        if grid_ref is None:
            grid_ref = omegas
        elif not np.array_equal(grid_ref, omegas):
            raise DataError("frequency grid differs from the first table", path=spath)
        h = float(meta["h"])
        if depth is None:
            depth = h
        elif h != depth:
            raise DataError(f"water depth {h} differs from {depth}", path=spath)
        rec = HydroRecord(radius=float(meta["R"]), draft=float(meta["D"]),
                          values={name: table[:, i + 1].copy() for i, name in enumerate(targets)})
        if kind == "two":
            rec.distance = float(meta["d"])
            rec.theta = float(meta["theta"])
        records.append(rec)

    logger.info(f"[DATA][IMPORT_BEM] {len(records)} {kind}-body tables from {directory}")
    return HydroDataset(kind, records, FrequencyGrid(grid_ref), depth)


def export_bem_tables(ds: HydroDataset, directory: Union[str, Path]) -> List[Path]:
    """Пишет по таблице на запись в формате, который читает import_bem_tables"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    width = len(str(max(len(ds) - 1, 0)))
    for index, rec in enumerate(ds.records):
        meta = f"{BEM_MAGIC} kind={ds.kind} R={rec.radius!r} D={rec.draft!r}"
        if ds.kind == "two":
            meta += f" d={rec.distance!r} theta={rec.theta!r}"
        meta += f" h={ds.depth!r}"
        lines = [meta, "# " + " ".join(["omega", *ds.targets])]
        for k, omega in enumerate(ds.grid.omegas):
            values = [repr(float(rec.values[name][k])) for name in ds.targets]
            lines.append(" ".join([repr(float(omega)), *values]))
        target = directory / f"record_{index:0{width}d}.dat"
        target.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(target)
    logger.info(f"[DATA][EXPORT_BEM] {len(written)} tables -> {directory}")
    return written
