"""Свип по κ̄ → 0: разности с прогоном κ̄ = 0 в норме E_T и для плотности, степенные подгонки."""

import logging
from functools import partial
from pathlib import Path
from typing import Any

from korteweg.core.timemesh import time_aggregate
from korteweg.errors import KortewegError, OutOfRangeError
from korteweg.models import ExperimentConfig
from korteweg.services.analytics import fit_power_law
from korteweg.services.besov import BesovParams, besov_norm
from korteweg.services.coefficients import Coefficients
from korteweg.services.forcings import DifferenceInputs, assemble_forcings
from korteweg.services.lagrangian import compose_with_flow, jacobian_data
from korteweg.services.picard import PicardResult, energy_params, picard_solve
from korteweg.services.trajectory import energy_norm, trajectory_difference
from korteweg.utils.output import write_json, write_table
from korteweg.utils.sweep import run_sweep

logger = logging.getLogger(__name__)

COLUMNS = ["kappa_bar", "status", "iterations", "E_difference", "density_difference", "K_forcing_L1"]


def _solve(config: ExperimentConfig, kappa_bar: float) -> tuple[Coefficients, PicardResult]:
    coeffs = config.coefficients(kappa_bar)
    result = picard_solve(
        coeffs, config.initial_velocity(), config.T, config.n_steps, config.picard_config(), config.route
    )
    return coeffs, result


def density_difference(coeffs: Coefficients, run: PicardResult, baseline: PicardResult, p: float) -> float:
    """‖ρ₀∘X_κ − ρ₀∘X₀‖_{L^∞_T Ḃ^{n/p}_{p,1}}."""
    params = BesovParams(s=coeffs.grid.dim / p, p=p)
    worst = 0.0
    for t in run.trajectory.times:
        gap = compose_with_flow(coeffs.rho0, run.flow, t) - compose_with_flow(coeffs.rho0, baseline.flow, t)
        worst = max(worst, besov_norm(gap, params))
    return worst


def k_forcing_norm(coeffs: Coefficients, run: PicardResult, baseline: PicardResult, p: float) -> float:
    """‖K¹ + K² + K³‖_{L¹_T Ḃ^{n/p−1}_{p,1}}."""
    params = energy_params(coeffs.grid.dim, p)
    traj, base = run.trajectory, baseline.trajectory
    pressures = traj.pressure()
    norms = []
    for k, t in enumerate(traj.times):
        inputs = DifferenceInputs(
            jac_base=jacobian_data(baseline.flow, t),
            u_kappa=traj.u[k],
            u_base=base.u[k],
            grad_p_kappa=pressures[k],
        )
        forcing = assemble_forcings("diff_K", coeffs, jacobian_data(run.flow, t), difference=inputs)
        norms.append(besov_norm(forcing, params))
    return time_aggregate(norms, traj.times, 1)


def convergence_member(config: ExperimentConfig, baseline: PicardResult, kappa_bar: float) -> dict[str, Any]:
    row: dict[str, Any] = {"kappa_bar": kappa_bar}
    try:
        coeffs, run = _solve(config, kappa_bar)
        params = energy_params(coeffs.grid.dim, config.besov_p)
        diff = trajectory_difference(run.trajectory, baseline.trajectory)
        row.update(
            {
                "status": "ok",
                "iterations": run.iterations,
                "E_difference": energy_norm(diff, params).value,
                "density_difference": density_difference(coeffs, run, baseline, config.besov_p),
                "K_forcing_L1": k_forcing_norm(coeffs, run, baseline, config.besov_p),
            }
        )
        logger.info(
            "convergence member kappa_bar=%.3g: E difference %.4g, density difference %.4g",
            kappa_bar,
            row["E_difference"],
            row["density_difference"],
        )
    except KortewegError as e:
        logger.error("convergence member kappa_bar=%.3g failed: %s", kappa_bar, e)
        row["status"] = f"failed: {e}"
    return row


def _fit(rows: list[dict[str, Any]], column: str) -> dict[str, Any] | None:
    points = [(r["kappa_bar"], r[column]) for r in rows if r["status"] == "ok" and r[column] > 0]
    if len(points) < 3:
        logger.warning("Too few usable members to fit %s", column)
        return None
    fit = fit_power_law(points)
    logger.info("Fit of %s: slope %.4f, r^2 %.4f", column, fit.slope, fit.r_squared)
    return fit.model_dump()


def run(config: ExperimentConfig, out_dir: Path, fmt: str) -> int:
    if len(config.sweep) < 3:
        raise OutOfRangeError("convergence-study needs a sweep of at least 3 kappa_bar values")
    _, baseline = _solve(config, 0.0)
    rows = run_sweep(partial(convergence_member, config, baseline), config.sweep)
    write_table(out_dir, "convergence", rows, fmt, columns=COLUMNS)

    failed = sum(1 for r in rows if r["status"] != "ok")
    if failed:
        logger.warning("%d sweep members failed and are excluded from the fits", failed)
    summary = {
        "T": config.T,
        "E_difference_fit": _fit(rows, "E_difference"),
        "density_difference_fit": _fit(rows, "density_difference"),
        # ожидаемые показатели: α для E_T и (3α − 1)/2 для плотности
        "targets": [{"alpha": a, "velocity": a, "density": (3.0 * a - 1.0) / 2.0} for a in config.alpha_targets],
    }
    write_json(Path(out_dir) / "convergence_fit.json", summary)
    return 0
