"""Deviation experiment and sample-constant fitting.

Reproduces the calibration experiment behind the default sample budget: draw
quantizations of size m for several m, measure their sup-norm deviation from
a large reference quantization treated as ground truth, and fit the success
model 1 - delta = 1 - exp(-m eps^2 / C + nu) to recover the constant C
(about 0.5 in both the original measurement and this implementation).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .measures import MeasureId, evaluate
from .model import ContinuousUncertainSet, GaussianPoint, IndecisivePointSet, sample_support
from .quantize import Quantization1D, max_deviation, quantization_to_csv

__all__ = [
    "CylinderConfig",
    "ExperimentConfig",
    "ExperimentResult",
    "FitResult",
    "cylinder_uncertain_set",
    "run_deviation_experiment",
    "fit_sample_constant",
    "read_deviation_csv",
]


@dataclass(frozen=True)
class CylinderConfig:
    """Gaussian-blurred points on the lateral surface of a cylinder."""

    n: int = 50
    length: float = 10.0
    radius: float = 1.0
    sigma: float = 2.0


@dataclass(frozen=True)
class ExperimentConfig:
    generator: CylinderConfig | IndecisivePointSet | ContinuousUncertainSet
    measures: tuple[MeasureId, ...]
    m_values: tuple[int, ...]
    eta: int = 20_000
    tau: int = 200
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "measures", tuple(self.measures))
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        if not self.m_values or any(m < 1 for m in self.m_values):
            raise ValueError("m_values must be positive")
        if self.eta < 2 * max(self.m_values):
            raise ValueError("eta must dominate the largest m (reference acts as ground truth)")
        if self.tau < 1:
            raise ValueError("tau must be at least 1")


@dataclass(frozen=True)
class FitResult:
    c: float
    residual_norm: float
    points: tuple  # (m, eps, delta) triples entering the fit
    nu: float
    degenerate: bool = False
    note: str = ""


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: ExperimentConfig
    references: dict
    deviations: dict  # (measure string, m) -> Quantization1D of d_inf values
    fits: dict  # measure string -> FitResult

    def write_csv(self, outdir) -> list[Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        written = []
        for (mname, m), q in self.deviations.items():
            safe = mname.replace(":", "_").replace(",", "_").replace("-", "_")
            path = outdir / f"deviation_{safe}_m{m}.csv"
            path.write_text(quantization_to_csv(q))
            written.append(path)
        lines = ["measure,c,residual_norm,degenerate,note"]
        for mname, fit in self.fits.items():
            lines.append(
                f"{mname},{fit.c:.17g},{fit.residual_norm:.17g},{int(fit.degenerate)},{fit.note}"
            )
        fit_path = outdir / "fits.csv"
        fit_path.write_text("\n".join(lines) + "\n")
        written.append(fit_path)
        return written


def cylinder_uncertain_set(cfg: CylinderConfig, seed: int) -> ContinuousUncertainSet:
    """n isotropic 3-variate Gaussians centered uniformly on the cylinder's
    lateral surface."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xC71,)))
    cov = (cfg.sigma**2) * np.eye(3)
    points = []
    for _ in range(cfg.n):
        theta = 2.0 * math.pi * rng.random()
        z = cfg.length * rng.random()
        center = np.array([cfg.radius * math.cos(theta), cfg.radius * math.sin(theta), z])
        points.append(GaussianPoint(center, cov))
    return ContinuousUncertainSet(tuple(points), 3)


def cylinder_axis_direction(angle_degrees: float = 75.0) -> tuple[float, float, float]:
    """Unit direction making the given angle with the cylinder (z) axis."""
    a = math.radians(angle_degrees)
    return (math.sin(a), 0.0, math.cos(a))


def _values_for_supports(uset, measures, seed, spawn_tag: int, count: int) -> np.ndarray:
    """(count, len(measures)) array of measure values over sampled supports;
    one rng stream per support so evaluation order is irrelevant."""
    out = np.empty((count, len(measures)))
    for s in range(count):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(spawn_tag, s))
        )
        support = sample_support(uset, rng)
        for c, measure in enumerate(measures):
            out[s, c] = evaluate(measure, support.locations)
    return out


def run_deviation_experiment(config: ExperimentConfig) -> ExperimentResult:
    """For each m: tau sampled quantizations, each compared (sup norm)
    against one eta-sample reference per measure; returns the deviation
    quantizations and the per-measure fitted constant."""
    gen = config.generator
    if isinstance(gen, CylinderConfig):
        uset = cylinder_uncertain_set(gen, config.seed)
    else:
        uset = gen
    measures = config.measures

    ref_values = _values_for_supports(uset, measures, config.seed, 0, config.eta)
    references = {
        str(m): Quantization1D.from_samples(ref_values[:, c]) for c, m in enumerate(measures)
    }

    deviations: dict[tuple[str, int], Quantization1D] = {}
    tables: dict[str, dict[int, np.ndarray]] = {str(m): {} for m in measures}

    def one_trial(m_index: int, m: int, trial: int) -> np.ndarray:
        tag = 1 + m_index * config.tau + trial
        values = _values_for_supports(uset, measures, config.seed, tag, m)
        devs = np.empty(len(measures))
        for c, measure in enumerate(measures):
            r = Quantization1D.from_samples(values[:, c])
            devs[c] = max_deviation(r, references[str(measure)])
        return devs

    for m_index, m in enumerate(config.m_values):
        if config.threads > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                results = list(
                    pool.map(lambda t: one_trial(m_index, m, t), range(config.tau))
                )
        else:
            results = [one_trial(m_index, m, t) for t in range(config.tau)]
        all_devs = np.vstack(results)
        for c, measure in enumerate(measures):
            devs = all_devs[:, c]
            deviations[(str(measure), m)] = Quantization1D.from_samples(devs)
            tables[str(measure)][m] = np.sort(devs)

    fits = {}
    for mname, table in tables.items():
        try:
            fits[mname] = fit_sample_constant(table, nu=1.0)
        except ValueError as exc:
            fits[mname] = FitResult(
                math.nan, math.nan, (), 1.0, degenerate=True, note=str(exc)
            )
    return ExperimentResult(config, references, deviations, fits)


_DELTA_GRID = tuple(np.linspace(0.05, 0.6, 12))


def fit_sample_constant(
    deviation_tables: dict[int, np.ndarray],
    nu: float = 1.0,
    delta_grid=_DELTA_GRID,
) -> FitResult:
    """Least-squares fit of C in delta = exp(-m eps^2 / C + nu), nu fixed.

    ``deviation_tables`` maps each m to its tau sup-norm deviations.  For a
    grid of failure probabilities delta, eps is the empirical (1 - delta)
    quantile of the deviations; the fit is linear in log space:
    ln delta = nu - (m eps^2) / C.
    """
    ms = sorted(deviation_tables)
    if len(ms) < 2:
        raise ValueError("need deviation tables for at least 2 distinct m values")
    xs = []
    ys = []
    points = []
    for m in ms:
        devs = np.sort(np.asarray(deviation_tables[m], dtype=np.float64))
        tau = len(devs)
        for delta in delta_grid:
            idx = min(tau - 1, max(0, math.ceil((1.0 - delta) * tau) - 1))
            eps = float(devs[idx])
            if eps <= 0.0:
                continue
            xs.append(m * eps * eps)
            ys.append(nu - math.log(delta))
            points.append((m, eps, float(delta)))
    if not xs:
        return FitResult(
            math.nan, math.nan, (), nu, degenerate=True, note="all deviations are zero"
        )
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    slope = float((xs * ys).sum() / (xs * xs).sum())
    if slope <= 0:
        return FitResult(math.nan, math.nan, tuple(points), nu, degenerate=True, note="non-positive slope")
    c = 1.0 / slope
    residuals = xs / c - ys  # residuals of ln delta against the fitted model
    return FitResult(c, float(np.sqrt((residuals**2).mean())), tuple(points), nu)


def read_deviation_csv(path) -> np.ndarray:
    """Deviation values from a CSV written by ExperimentResult.write_csv."""
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    vi = header.index("value")
    wi = header.index("weight")
    values = []
    for line in lines[1:]:
        parts = line.split(",")
        v = float(parts[vi])
        w = float(parts[wi])
        values.append((v, w))
    total = sum(w for _, w in values)
    # Reconstruct an (approximately) uniform sample list from the weights.
    m = round(1.0 / min(w for _, w in values if w > 0))
    out = []
    for v, w in values:
        out.extend([v] * max(1, round(w * m)))
    return np.asarray(out)
