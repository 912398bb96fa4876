"""Unit-тесты pydantic-моделей манифеста и конфигурации экспериментов."""

import pytest
from pydantic import ValidationError

from korteweg.models import ExperimentConfig, FitResult, RunManifest


def test_manifest_defaults():
    """Манифест по умолчанию валиден: 100 шагов по 1e-3."""
    manifest = RunManifest()
    assert manifest.n_steps == 100
    assert manifest.make_grid().n_points == 64


@pytest.mark.parametrize("grid", [4, 12, 100])
def test_manifest_grid_must_be_power_of_two(grid):
    """Размер сетки — степень двойки не меньше 8."""
    with pytest.raises(ValidationError):
        RunManifest(grid=grid)


def test_manifest_whole_number_of_steps():
    """T не кратно dt."""
    with pytest.raises(ValidationError):
        RunManifest(dt=0.03, T=0.1)


def test_manifest_rejects_unknown_fields():
    """Опечатка в ключе манифеста."""
    with pytest.raises(ValidationError):
        RunManifest.model_validate({"grid": 16, "kapa_bar": 0.1})


def test_manifest_builds_coefficients():
    """Коэффициенты и начальные данные собираются из манифеста."""
    manifest = RunManifest.model_validate(
        {
            "grid": 16,
            "mu_bar": 2.0,
            "kappa_bar": 0.4,
            "rho0": {"kind": "cosine", "amplitude": 0.1},
            "u0": {"kind": "taylor_green", "amplitude": 0.2},
        }
    )
    coeffs = manifest.coefficients()
    assert coeffs.kappa_over_mu2 == pytest.approx(0.1)
    assert manifest.coefficients(kappa_bar=0.0).kappa_bar == 0.0
    assert manifest.initial_velocity().max_abs() == pytest.approx(0.2)


def test_picard_config_follows_tolerances():
    """Допуски манифеста переходят в PicardConfig."""
    manifest = RunManifest.model_validate({"tolerances": {"picard_tol": 1e-6, "max_iters": 5}, "besov_p": 4})
    config = manifest.picard_config()
    assert config.tol == 1e-6
    assert config.max_iters == 5
    assert config.besov_p == 4


def test_sweep_must_decrease():
    """Свип по κ̄ строго убывает."""
    with pytest.raises(ValidationError):
        ExperimentConfig(sweep=[0.01, 0.1, 1.0])


def test_sweep_must_span_a_decade():
    """Свип покрывает хотя бы декаду."""
    with pytest.raises(ValidationError):
        ExperimentConfig(sweep=[0.5, 0.3, 0.1])


def test_sweep_accepts_decade():
    """[1, 0.3, 0.1] — допустимый свип."""
    config = ExperimentConfig(sweep=[1.0, 0.3, 0.1])
    assert config.sweep == [1.0, 0.3, 0.1]
    assert config.besov_params().p == 2.0


def test_fit_result_needs_points():
    """Подгонка по двум точкам не создаётся."""
    with pytest.raises(ValidationError):
        FitResult(slope=1.0, intercept=0.0, r_squared=1.0, points=[(0.0, 0.0), (1.0, 1.0)])
