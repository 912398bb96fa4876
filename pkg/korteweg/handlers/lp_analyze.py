"""Таблица норм диадических блоков для снимка поля."""

import logging
from pathlib import Path

from korteweg.core.snapshot import read_snapshot
from korteweg.errors import OutOfRangeError
from korteweg.models import ExperimentConfig
from korteweg.services.besov import besov_norm, block_table
from korteweg.utils.output import write_json, write_table

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig, out_dir: Path, fmt: str) -> int:
    if config.snapshot is None:
        raise OutOfRangeError("lp-analyze needs 'snapshot' in the config")
    field, time = read_snapshot(config.snapshot)
    params = config.besov_params()
    rows = block_table(field, params)
    write_table(out_dir, "lp_blocks", rows, fmt, columns=["j", "block_L2", "block_Lp", "weighted_2js"])
    norm = besov_norm(field, params)
    logger.info("lp-analyze: %s field at t=%.6g, Besov norm %.6g", field.kind, time, norm)
    write_json(
        Path(out_dir) / "lp_summary.json",
        {"kind": field.kind, "time": time, "s": params.s, "p": params.p, "r": params.r, "besov_norm": norm},
    )
    return 0
