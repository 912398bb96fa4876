"""Запись таблиц и сводок: CSV/JSON с детерминированным форматированием чисел."""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """repr для float (кратчайшее точное представление), str для остального."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def write_csv(path: Path, rows: Sequence[dict[str, Any]], columns: Optional[Iterable[str]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    columns = list(columns)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c, "")) for c in columns])
    logger.info("Table written: %s (%d rows)", path, len(rows))
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info("Summary written: %s", path)
    return path


def write_table(
    out_dir: Path, name: str, rows: Sequence[dict[str, Any]], fmt: str, columns: Optional[Iterable[str]] = None
) -> Path:
    """Таблица в формате fmt ("csv" или "json") как out_dir/name.{fmt}."""
    if fmt == "csv":
        return write_csv(Path(out_dir) / f"{name}.csv", rows, columns)
    if fmt == "json":
        return write_json(Path(out_dir) / f"{name}.json", list(rows))
    raise ValueError(f"unknown output format: {fmt}")
