"""Свип по κ̄: время выхода свободного решения из ε-шара и степенная подгонка T(κ̄)."""

import logging
from functools import partial
from pathlib import Path
from typing import Any

from korteweg.core.fields import ScalarField
from korteweg.errors import KortewegError, OutOfRangeError
from korteweg.models import ExperimentConfig
from korteweg.services.analytics import fit_power_law, lifespan_predictor
from korteweg.services.besov import BesovParams, besov_norm
from korteweg.services.pipeline import exit_time
from korteweg.services.stokes import free_solution
from korteweg.utils.output import write_json, write_table
from korteweg.utils.sweep import run_sweep

logger = logging.getLogger(__name__)

COLUMNS = ["kappa_bar", "status", "exit_time", "exit_time_unit", "horizon", "censored", "predicted_T0"]


def lifespan_member(config: ExperimentConfig, kappa_bar: float) -> dict[str, Any]:
    row: dict[str, Any] = {"kappa_bar": kappa_bar}
    try:
        coeffs = config.coefficients(kappa_bar)
        u0 = config.initial_velocity()
        horizon = config.lifespan_horizon * config.sweep[0] / kappa_bar
        free = free_solution(coeffs, u0, horizon, config.lifespan_steps, mode="constant", exact=True)
        t_unit = exit_time(free, config.epsilon, config.besov_p)

        grid = coeffs.grid
        at_s = BesovParams(s=grid.dim / config.besov_p, p=config.besov_p)
        at_s1 = BesovParams(s=grid.dim / config.besov_p + 1.0, p=config.besov_p)
        one = ScalarField.constant(grid, 1.0)
        predicted = lifespan_predictor(
            (besov_norm(u0, at_s), besov_norm(u0, at_s1)),
            (besov_norm(coeffs.rho0 - one, at_s), besov_norm(coeffs.grad_rho0, at_s)),
            coeffs.mu_bar,
            kappa_bar,
            config.epsilon,
        )
        row.update(
            {
                "status": "ok",
                "exit_time": t_unit / coeffs.mu_bar,
                "exit_time_unit": t_unit,
                "horizon": horizon,
                "censored": t_unit >= free.final_time,
                "predicted_T0": predicted,
            }
        )
        if predicted > row["exit_time"]:
            logger.warning(
                "Lifespan predictor %.4g exceeds measured exit time %.4g at kappa_bar=%.3g",
                predicted,
                row["exit_time"],
                kappa_bar,
            )
        logger.info("lifespan member kappa_bar=%.3g: exit time %.6g", kappa_bar, row["exit_time"])
    except KortewegError as e:
        logger.error("lifespan member kappa_bar=%.3g failed: %s", kappa_bar, e)
        row.update({"status": f"failed: {e}"})
    return row


def run(config: ExperimentConfig, out_dir: Path, fmt: str) -> int:
    if len(config.sweep) < 3:
        raise OutOfRangeError("lifespan-study needs a sweep of at least 3 kappa_bar values")
    rows = run_sweep(partial(lifespan_member, config), config.sweep)
    write_table(out_dir, "lifespan", rows, fmt, columns=COLUMNS)

    usable = [(r["kappa_bar"], r["exit_time"]) for r in rows if r["status"] == "ok" and not r["censored"]]
    excluded = len(rows) - len(usable)
    if excluded:
        logger.warning("%d sweep members excluded from the lifespan fit", excluded)
    summary: dict[str, Any] = {"epsilon": config.epsilon, "members": len(rows), "fitted": len(usable)}
    if len(usable) >= 3:
        fit = fit_power_law(usable)
        summary["fit"] = fit.model_dump()
        logger.info("Lifespan fit: slope %.4f, r^2 %.4f", fit.slope, fit.r_squared)
    else:
        logger.warning("Too few usable members for a lifespan fit")
    write_json(Path(out_dir) / "lifespan_fit.json", summary)
    return 0
