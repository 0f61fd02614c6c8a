import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from core.exceptions import DataError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class ArtifactStore:
    """Менеджер выходного каталога: JSON-документы и CSV с версией формата"""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self._ready = False

    def _ensure_root(self):
        """Создает каталог при первой записи"""
        if not self._ready:
            try:
                self.root.mkdir(parents=True, exist_ok=True)
            except OSError as e:
                logger.error(f"[STORE][INIT] Cannot create output directory {self.root}: {e}")
                raise DataError(f"output directory not writable: {e}", path=str(self.root))
            self._ready = True

    def path(self, *parts: str) -> Path:
        return self.root.joinpath(*parts)

    def exists(self, *parts: str) -> bool:
        return self.path(*parts).exists()

    def save_json(self, name: str, document: Dict[str, Any]) -> Path:
        """Сохраняет документ; format_version проставляется, если его нет"""
        self._ensure_root()
        target = self.path(name)
        payload = _json_safe(dict(document))
        payload.setdefault("format_version", FORMAT_VERSION)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
            target.write_text(text + "\n", encoding="utf-8")
        except OSError as e:
            logger.error(f"[STORE][SAVE_JSON] ❌ {target}: {e}", exc_info=True)
            raise DataError(f"cannot write JSON: {e}", path=str(target))
        logger.info(f"[STORE][SAVE_JSON] ✅ {target}")
        return target

    def load_json(self, name: Union[str, Path], kind: Optional[str] = None) -> Dict[str, Any]:
        """Читает документ и проверяет версию (и тип, если указан)"""
        target = Path(name) if Path(name).is_absolute() else self.path(str(name))
        if not target.exists():
            raise DataError("file not found", path=str(target))
        try:
            document = json.loads(target.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise DataError(f"invalid JSON: {e}", path=str(target))
        version = document.get("format_version")
        if version != FORMAT_VERSION:
            raise DataError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})",
                            path=str(target))
        if kind is not None and document.get("kind") != kind:
            raise DataError(f"expected a '{kind}' document, got {document.get('kind')!r}", path=str(target))
        logger.debug(f"[STORE][LOAD_JSON] {target}")
        return document

    def save_csv(self, name: str, kind: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """CSV с заголовком '# wavefarm-<kind> v1' и строкой имен столбцов"""
        self._ensure_root()
        target = self.path(name)
        count = 0
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with target.open("w", newline="", encoding="utf-8") as handle:
                handle.write(f"# wavefarm-{kind} v{FORMAT_VERSION}\n")
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(columns)
                for row in rows:
                    writer.writerow([_cell(value) for value in row])
                    count += 1
        except OSError as e:
            logger.error(f"[STORE][SAVE_CSV] ❌ {target}: {e}", exc_info=True)
            raise DataError(f"cannot write CSV: {e}", path=str(target))
        logger.info(f"[STORE][SAVE_CSV] ✅ {target} ({count} rows)")
        return target

    def load_csv(self, name: Union[str, Path]) -> List[Dict[str, str]]:
        target = Path(name) if Path(name).is_absolute() else self.path(str(name))
        if not target.exists():
            raise DataError("file not found", path=str(target))
        with target.open(newline="", encoding="utf-8") as handle:
            header = handle.readline()
            if not header.startswith("# wavefarm-"):
                raise DataError("missing '# wavefarm-<kind> v1' header", path=str(target), line=1)
            return list(csv.DictReader(handle))


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def _json_safe(value: Any) -> Any:
    """NaN и бесконечности превращаются в null: JSON-файлы остаются строго валидными"""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    return value
