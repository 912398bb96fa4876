"""Один прогон: диагностика по шагам, снимок конечной скорости, сводка."""

import logging
from pathlib import Path

from korteweg.core.snapshot import write_snapshot
from korteweg.models import ExperimentConfig
from korteweg.services.picard import s1_residual
from korteweg.services.pipeline import run_simulation
from korteweg.utils.output import write_json, write_table

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig, out_dir: Path, fmt: str) -> int:
    coeffs = config.coefficients()
    logger.info(
        "simulate: n=%d dt=%.3g T=%.3g mu_bar=%.3g kappa_bar=%.3g solver=%s route=%s",
        config.grid,
        config.dt,
        config.T,
        config.mu_bar,
        config.kappa_bar,
        config.solver,
        config.route,
    )
    result = run_simulation(
        coeffs,
        config.initial_velocity(),
        config.T,
        config.n_steps,
        config.picard_config(),
        route=config.route,
        solver=config.solver,
    )
    write_table(out_dir, "diagnostics", result.diagnostics, fmt)

    summary = {
        "solver": config.solver,
        "route": config.route,
        "n_steps": config.n_steps,
        "final_time": result.eulerian.u.final_time,
        "final_kinetic_energy": result.diagnostics[-1]["kinetic_energy"],
    }
    if result.picard is not None:
        ratios = [{"iteration": k + 2, "ratio": r} for k, r in enumerate(result.picard.contraction_log)]
        write_table(out_dir, "contraction", ratios, fmt, columns=["iteration", "ratio"])
        residual = s1_residual(result.picard.trajectory, coeffs)
        summary.update(
            {
                "iterations": result.picard.iterations,
                "converged": result.picard.converged,
                "momentum_residual_l1": residual.l1,
                "momentum_residual_relative": residual.relative,
            }
        )

    velocity = result.eulerian.u
    write_snapshot(Path(out_dir) / "final_velocity.kfld", velocity.u[-1], velocity.final_time)
    write_json(Path(out_dir) / "summary.json", summary)
    return 0
