import math

import numpy as np
import pytest

from uqgeom import (
    ContinuousUncertainSet,
    CylinderConfig,
    ExperimentConfig,
    MeasureId,
    PointMassPoint,
    cylinder_uncertain_set,
    fit_sample_constant,
    run_deviation_experiment,
)
from uqgeom.harness import cylinder_axis_direction, read_deviation_csv


def test_cylinder_generator_geometry():
    cfg = CylinderConfig(n=40, length=10.0, radius=1.0, sigma=2.0)
    cset = cylinder_uncertain_set(cfg, seed=1)
    assert cset.n == 40 and cset.dimension == 3
    centers = np.array([p.mean for p in cset.points])
    assert np.allclose(np.hypot(centers[:, 0], centers[:, 1]), 1.0)
    assert centers[:, 2].min() >= 0.0 and centers[:, 2].max() <= 10.0
    assert np.allclose(cset.points[0].cov, 4.0 * np.eye(3))
    again = cylinder_uncertain_set(cfg, seed=1)
    assert np.array_equal(centers, np.array([p.mean for p in again.points]))


def test_cylinder_axis_direction():
    u = cylinder_axis_direction(75.0)
    assert abs(np.linalg.norm(u) - 1.0) < 1e-12
    assert abs(math.degrees(math.acos(u[2])) - 75.0) < 1e-9


def test_fit_recovers_synthetic_constant(rng):
    """Deviations drawn exactly from the model delta = exp(nu - m eps^2 / C)
    with C = 0.5, nu = 1 are recovered within 1%."""
    c_true, nu = 0.5, 1.0
    tables = {}
    for m in (16, 64, 256, 1024):
        u = rng.random(50_000)
        tables[m] = np.sqrt(c_true * (nu - np.log(u)) / m)
    fit = fit_sample_constant(tables, nu=nu)
    assert not fit.degenerate
    assert abs(fit.c - c_true) / c_true <= 0.01
    assert fit.residual_norm < 0.05


def test_fit_requires_two_m_values():
    with pytest.raises(ValueError, match="2 distinct m"):
        fit_sample_constant({16: np.array([0.1, 0.2])})


def test_fit_degenerate_all_zero():
    fit = fit_sample_constant({16: np.zeros(10), 64: np.zeros(10)})
    assert fit.degenerate and math.isnan(fit.c)


def test_experiment_point_mass_degenerate():
    cset = ContinuousUncertainSet(
        (PointMassPoint((0.0, 0.0, 0.0)), PointMassPoint((1.0, 0.0, 0.0))), 3
    )
    config = ExperimentConfig(
        generator=cset,
        measures=(MeasureId("dwid", (1, 0, 0)), MeasureId("diameter")),
        m_values=(8, 16),
        eta=200,
        tau=5,
        seed=0,
    )
    result = run_deviation_experiment(config)
    for q in result.deviations.values():
        assert np.all(q.values == 0.0)
    for fit in result.fits.values():
        assert fit.degenerate


def test_experiment_small_cylinder_and_csv(tmp_path):
    config = ExperimentConfig(
        generator=CylinderConfig(n=8, sigma=1.0),
        measures=(MeasureId("diameter"), MeasureId("seb2")),
        m_values=(16, 64),
        eta=1000,
        tau=12,
        seed=5,
    )
    result = run_deviation_experiment(config)
    # doubling m shifts deviations left (medians decrease)
    for mname in ("diameter", "seb2"):
        med16 = float(np.median(result.deviations[(mname, 16)].values))
        med64 = float(np.median(result.deviations[(mname, 64)].values))
        assert med64 <= med16
    files = result.write_csv(tmp_path)
    assert any(p.name == "fits.csv" for p in files)
    table_files = [p for p in files if p.name.startswith("deviation_diameter")]
    assert len(table_files) == 2
    back = read_deviation_csv([p for p in table_files if "m16" in p.name][0])
    orig = result.deviations[("diameter", 16)].values
    assert len(back) == len(orig)
    assert np.allclose(np.sort(back), np.sort(orig), atol=1e-12)


def test_experiment_threads_match_serial():
    config = dict(
        generator=CylinderConfig(n=5, sigma=0.5),
        measures=(MeasureId("diameter"),),
        m_values=(8, 16),
        eta=200,
        tau=6,
        seed=9,
    )
    serial = run_deviation_experiment(ExperimentConfig(**config, threads=1))
    threaded = run_deviation_experiment(ExperimentConfig(**config, threads=4))
    for key in serial.deviations:
        assert np.array_equal(serial.deviations[key].values, threaded.deviations[key].values)


def test_experiment_config_validation():
    with pytest.raises(ValueError, match="eta"):
        ExperimentConfig(
            generator=CylinderConfig(),
            measures=(MeasureId("diameter"),),
            m_values=(64,),
            eta=100,
            tau=5,
        )
