"""Параллельный прогон членов κ̄-свипа; результаты собираются по ключу в порядке свипа."""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Optional, Sequence

from korteweg.config import settings

logger = logging.getLogger(__name__)


def run_sweep(
    member: Callable[[float], dict[str, Any]],
    values: Sequence[float],
    max_workers: Optional[int] = None,
) -> list[dict[str, Any]]:
    """member(κ̄) для каждого значения; при max_workers > 1 — в отдельных процессах.

    member должен быть сериализуемым (функция модуля или functools.partial от неё).
    """
    workers = settings.max_workers if max_workers is None else max_workers
    if workers <= 1 or len(values) <= 1:
        return [member(v) for v in values]
    logger.info("Running %d sweep members on %d workers", len(values), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = dict(zip(values, pool.map(member, values)))
    return [results[v] for v in values]
