"""Интеграционные тесты подкоманд CLI на маленьких сетках."""

import csv
import json

import numpy as np
import pytest

from korteweg.core.fields import ScalarField
from korteweg.core.grid import Grid
from korteweg.core.snapshot import write_snapshot
from korteweg.main import main


def _write_config(path, **overrides):
    config = {
        "grid": 16,
        "dt": 0.01,
        "T": 0.02,
        "mu_bar": 1.0,
        "kappa_bar": 0.0,
        "rho0": {"kind": "constant"},
        "u0": {"kind": "taylor_green", "amplitude": 0.05},
    }
    config.update(overrides)
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


def _rows(path):
    with path.open(encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_simulate_writes_artifacts(tmp_path):
    """simulate: диагностика, таблица сжатия, снимок и сводка."""
    config = _write_config(tmp_path / "run.json")
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "out")]) == 0
    rows = _rows(tmp_path / "out" / "diagnostics.csv")
    assert len(rows) == 3
    assert (tmp_path / "out" / "final_velocity.kfld").exists()
    summary = json.loads((tmp_path / "out" / "summary.json").read_text(encoding="utf-8"))
    assert summary["converged"] is True


def test_simulate_is_deterministic(tmp_path):
    """Один конфиг и seed — побайтно одинаковые таблицы."""
    config = _write_config(tmp_path / "run.json", u0={"kind": "random", "amplitude": 0.05})
    for name in ("a", "b"):
        assert main(["simulate", "--config", str(config), "--out", str(tmp_path / name), "--seed", "3"]) == 0
    first = (tmp_path / "a" / "diagnostics.csv").read_bytes()
    assert first == (tmp_path / "b" / "diagnostics.csv").read_bytes()


def test_simulate_eulerian_json(tmp_path):
    """Эйлеров решатель и таблица в JSON."""
    config = _write_config(tmp_path / "run.json", solver="eulerian")
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path), "--format", "json"]) == 0
    rows = json.loads((tmp_path / "diagnostics.json").read_text(encoding="utf-8"))
    assert len(rows) == 3
    assert "J_dev" not in rows[0]


def test_lp_analyze_single_mode(tmp_path):
    """Снимок одной моды: не больше трёх ненулевых блоков."""
    grid = Grid(n_points=32)
    snapshot = write_snapshot(tmp_path / "mode.kfld", ScalarField.from_function(grid, lambda x, y: np.cos(4 * x)))
    config = _write_config(tmp_path / "lp.json", grid=32, snapshot=str(snapshot))
    assert main(["lp-analyze", "--config", str(config), "--out", str(tmp_path / "lp")]) == 0
    rows = _rows(tmp_path / "lp" / "lp_blocks.csv")
    assert sum(1 for row in rows if float(row["block_L2"]) > 1e-12) <= 3


def test_lp_analyze_without_snapshot(tmp_path):
    """lp-analyze без снимка — ошибка исполнения (код 1)."""
    config = _write_config(tmp_path / "lp.json")
    assert main(["lp-analyze", "--config", str(config), "--out", str(tmp_path)]) == 1


def test_lp_analyze_damaged_snapshot(tmp_path):
    """Обрезанный снимок — ошибка исполнения (код 1), а не падение."""
    snapshot = tmp_path / "broken.kfld"
    snapshot.write_bytes(b"KORTFLD1")
    config = _write_config(tmp_path / "lp.json", snapshot=str(snapshot))
    assert main(["lp-analyze", "--config", str(config), "--out", str(tmp_path)]) == 1


def test_lifespan_study(tmp_path):
    """lifespan-study: строка на каждый член свипа и файл подгонки."""
    config = _write_config(
        tmp_path / "life.json",
        kappa_bar=0.1,
        rho0={"kind": "cosine", "amplitude": 0.2},
        u0={"kind": "zero"},
        sweep=[1.0, 0.3, 0.1],
        lifespan_steps=20,
    )
    assert main(["lifespan-study", "--config", str(config), "--out", str(tmp_path / "life")]) == 0
    rows = _rows(tmp_path / "life" / "lifespan.csv")
    assert [float(row["kappa_bar"]) for row in rows] == [1.0, 0.3, 0.1]
    assert (tmp_path / "life" / "lifespan_fit.json").exists()


def test_convergence_study(tmp_path):
    """convergence-study: строка на каждый член свипа и файл подгонки."""
    config = _write_config(
        tmp_path / "conv.json",
        rho0={"kind": "cosine", "amplitude": 0.1},
        sweep=[0.1, 0.03, 0.01],
    )
    assert main(["convergence-study", "--config", str(config), "--out", str(tmp_path / "conv")]) == 0
    rows = _rows(tmp_path / "conv" / "convergence.csv")
    assert len(rows) == 3
    assert all(row["status"] == "ok" for row in rows)
    fit = json.loads((tmp_path / "conv" / "convergence_fit.json").read_text(encoding="utf-8"))
    assert fit["targets"][0]["density"] == pytest.approx(1.0)


def test_invalid_config_exit_code(tmp_path):
    """Ошибка валидации манифеста — код 2."""
    config = _write_config(tmp_path / "bad.json", grid=12)
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_missing_config_exit_code(tmp_path):
    """Отсутствующий файл — код 2."""
    assert main(["simulate", "--config", str(tmp_path / "none.json")]) == 2
