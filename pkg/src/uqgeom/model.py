"""Domain types for uncertain and indecisive point sets.

Two input models are supported:

* indecisive points: each point takes one of finitely many candidate
  locations, with exact rational weights summing to one;
* continuous uncertain points: each point follows a parametric planar/3D
  distribution (Gaussian, uniform disk, or point mass).

All types are immutable after construction and safe to share across
threads.  Sampling takes an explicit numpy ``Generator`` so callers control
reproducibility; see :func:`uqgeom.montecarlo.trial_rng` for the
counter-based stream derivation used by the randomized engines.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import as_points, coordinate_scale

__all__ = [
    "ValidationError",
    "IndecisivePoint",
    "IndecisivePointSet",
    "GaussianPoint",
    "UniformDiskPoint",
    "PointMassPoint",
    "ContinuousUncertainSet",
    "Support",
    "sample_support",
    "support_probability",
    "canonical_jitter",
    "load_point_set",
    "save_point_set",
]


class ValidationError(ValueError):
    """Raised for malformed inputs; maps to CLI exit code 2."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------
# Indecisive model


@dataclass(frozen=True, eq=False)
class IndecisivePoint:
    """One uncertain point restricted to finitely many weighted locations.

    ``weights`` are exact rationals in (0, 1] summing to exactly 1; decimal
    inputs should be converted with an exact decimal expansion before
    construction (the JSON loader does this).
    """

    locations: np.ndarray  # (k, d), read-only
    weights: tuple[Fraction, ...]
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        locs = as_points(self.locations)
        object.__setattr__(self, "locations", _freeze(locs))
        w = tuple(Fraction(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != len(locs):
            raise ValidationError(f"{len(locs)} locations but {len(w)} weights")
        if any(not (0 < x <= 1) for x in w):
            raise ValidationError("weights must lie in (0, 1]")
        if sum(w) != 1:
            raise ValidationError(f"weights sum to {sum(w)}, expected exactly 1")
        cum = np.cumsum([float(x) for x in w])
        cum[-1] = 1.0
        object.__setattr__(self, "_cum", _freeze(cum))

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def dimension(self) -> int:
        return self.locations.shape[1]


@dataclass(frozen=True, eq=False)
class IndecisivePointSet:
    points: tuple[IndecisivePoint, ...]
    dimension: int
    # True once canonical_jitter has been applied; the deterministic engine
    # skips re-jittering sets that carry this mark.
    jitter_applied: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValidationError("need at least one point")
        for i, p in enumerate(self.points):
            if p.dimension != self.dimension:
                raise ValidationError(
                    f"points[{i}] has dimension {p.dimension}, set has {self.dimension}"
                )

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def k_max(self) -> int:
        return max(p.k for p in self.points)

    def support_count(self) -> int:
        out = 1
        for p in self.points:
            out *= p.k
        return out

    def all_locations(self) -> np.ndarray:
        return np.concatenate([p.locations for p in self.points], axis=0)


# --------------------------------------------------------------------------
# Continuous model


@dataclass(frozen=True, eq=False)
class GaussianPoint:
    mean: np.ndarray
    cov: np.ndarray  # symmetric positive-definite, (d, d)
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = _freeze(np.asarray(self.mean, dtype=np.float64).reshape(-1))
        cov = np.asarray(self.cov, dtype=np.float64)
        if cov.shape != (len(mean), len(mean)):
            raise ValidationError(f"covariance shape {cov.shape} does not match mean of length {len(mean)}")
        if not np.allclose(cov, cov.T, rtol=1e-12, atol=1e-12):
            raise ValidationError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(0.5 * (cov + cov.T))
        except np.linalg.LinAlgError:
            raise ValidationError("covariance must be positive-definite") from None
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _freeze(0.5 * (cov + cov.T)))
        object.__setattr__(self, "_chol", _freeze(chol))

    @property
    def dimension(self) -> int:
        return len(self.mean)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.mean + self._chol @ rng.standard_normal(self.dimension)


@dataclass(frozen=True, eq=False)
class UniformDiskPoint:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = _freeze(np.asarray(self.center, dtype=np.float64).reshape(-1))
        if len(center) != 2:
            raise ValidationError("uniform_disk supports d=2 only")
        if not (self.radius > 0):
            raise ValidationError("radius must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self) -> int:
        return 2

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        u = rng.random()
        theta = 2.0 * math.pi * rng.random()
        r = self.radius * math.sqrt(u)
        return self.center + r * np.array([math.cos(theta), math.sin(theta)])


@dataclass(frozen=True, eq=False)
class PointMassPoint:
    at: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "at", _freeze(np.asarray(self.at, dtype=np.float64).reshape(-1)))

    @property
    def dimension(self) -> int:
        return len(self.at)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.at.copy()


ContinuousUncertainPoint = GaussianPoint | UniformDiskPoint | PointMassPoint


@dataclass(frozen=True, eq=False)
class ContinuousUncertainSet:
    points: tuple[ContinuousUncertainPoint, ...]
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValidationError("need at least one point")
        for i, p in enumerate(self.points):
            if p.dimension != self.dimension:
                raise ValidationError(
                    f"points[{i}] has dimension {p.dimension}, set has {self.dimension}"
                )

    @property
    def n(self) -> int:
        return len(self.points)


# --------------------------------------------------------------------------
# Supports


@dataclass(frozen=True, eq=False)
class Support:
    """One realization: exactly one location per uncertain point.

    ``provenance`` carries the chosen candidate index per point when the
    support comes from an indecisive set; it is required for exact
    probability computations.
    """

    locations: np.ndarray  # (n, d)
    provenance: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "locations", _freeze(as_points(self.locations)))
        if self.provenance is not None:
            object.__setattr__(self, "provenance", tuple(int(j) for j in self.provenance))
            if len(self.provenance) != len(self.locations):
                raise ValidationError("provenance length must equal the number of points")

    @property
    def n(self) -> int:
        return len(self.locations)


def sample_support(uset: IndecisivePointSet | ContinuousUncertainSet, rng: np.random.Generator) -> Support:
    """Draw one support, each location independently from its point's
    distribution.  Indecisive draws use inverse-CDF over the cumulative
    weights so the rational weights are respected."""
    if isinstance(uset, IndecisivePointSet):
        locs = np.empty((uset.n, uset.dimension))
        prov = []
        for i, p in enumerate(uset.points):
            u = rng.random()
            j = min(int(np.searchsorted(p._cum, u, side="right")), p.k - 1)
            prov.append(j)
            locs[i] = p.locations[j]
        return Support(locs, tuple(prov))
    locs = np.empty((uset.n, uset.dimension))
    for i, p in enumerate(uset.points):
        locs[i] = p.sample(rng)
    return Support(locs, None)


def support_probability(uset: IndecisivePointSet, support: Support) -> Fraction:
    """Exact probability of a support: the product of chosen candidate weights."""
    if support.provenance is None:
        raise ValidationError("provenance required")
    if len(support.provenance) != uset.n:
        raise ValidationError("support does not match the point set")
    prob = Fraction(1)
    for p, j in zip(uset.points, support.provenance):
        prob *= p.weights[j]
    return prob


# --------------------------------------------------------------------------
# Canonical jitter

# Fixed pseudo-random unit direction used for all jitter offsets.
_JITTER_ANGLE = 2.399963229728653  # radians
_JITTER_DIR = (math.cos(_JITTER_ANGLE), math.sin(_JITTER_ANGLE))
_JITTER_UNIT = 2.0**-40


def canonical_jitter(uset: IndecisivePointSet) -> IndecisivePointSet:
    """Deterministic symbolic-style perturbation enabling general position.

    Candidate (i, j) is translated by a distinct multiple of 2^-40 (scaled by
    the coordinate magnitude of the set) along one fixed pseudo-random
    direction, so coincident candidates, shared coordinates, concyclic
    quadruples and projection ties are all broken consistently.  Applying the
    function to an already-jittered set is a no-op.
    """
    if uset.jitter_applied:
        return uset
    scale = coordinate_scale(uset.all_locations())
    step = _JITTER_UNIT * scale
    if uset.dimension == 2:
        direction = np.array(_JITTER_DIR)
    else:
        direction = np.array([_JITTER_DIR[0], _JITTER_DIR[1], math.sin(1.0)])
        direction /= np.linalg.norm(direction)
    new_points = []
    counter = 1
    for p in uset.points:
        locs = p.locations.copy()
        for j in range(p.k):
            locs[j] = locs[j] + (counter * step) * direction
            counter += 1
        new_points.append(IndecisivePoint(locs, p.weights))
    jittered = IndecisivePointSet(tuple(new_points), uset.dimension, jitter_applied=True)
    flat = jittered.all_locations()
    # Distinct multiples guarantee pairwise-distinct candidates unless the
    # raw input was adversarially aligned with the jitter direction.
    uniq = {tuple(row) for row in flat}
    if len(uniq) != len(flat):
        raise ValidationError("jitter failed to separate coincident candidates")
    return jittered


# --------------------------------------------------------------------------
# JSON interchange


def _weight_to_json(w: Fraction) -> str:
    return f"{w.numerator}/{w.denominator}"


def _parse_weight(text, where: str) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"{where}: cannot parse weight {text!r}") from None


def load_point_set(document) -> IndecisivePointSet | ContinuousUncertainSet:
    """Parse the JSON interchange format.

    Accepts raw bytes/str, or an already-parsed mapping.  Floats in weight
    positions are expanded exactly from their decimal representation.
    """
    if isinstance(document, (bytes, bytearray)):
        document = document.decode("utf-8")
    if isinstance(document, str):
        try:
            doc = json.loads(document, parse_float=str)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ValidationError("top-level document must be an object")
    for key in ("dimension", "model", "points"):
        if key not in doc:
            raise ValidationError(f"missing top-level key {key!r}")
    d = int(doc["dimension"])
    if d not in (2, 3):
        raise ValidationError("dimension must be 2 or 3")
    model = doc["model"]
    raw_points = doc["points"]
    if not isinstance(raw_points, list) or not raw_points:
        raise ValidationError("points must be a non-empty list")

    if model == "indecisive":
        points = []
        for i, rp in enumerate(raw_points):
            where = f"points[{i}]"
            if "locations" not in rp or "weights" not in rp:
                raise ValidationError(f"{where}: needs 'locations' and 'weights'")
            weights = tuple(_parse_weight(w, where) for w in rp["weights"])
            try:
                locs = np.asarray(rp["locations"], dtype=np.float64)
                point = IndecisivePoint(locs, weights)
            except (ValidationError, ValueError) as exc:
                raise ValidationError(f"{where}: {exc}") from None
            points.append(point)
        try:
            return IndecisivePointSet(
                tuple(points), d, jitter_applied=bool(doc.get("jitter_applied", False))
            )
        except ValidationError as exc:
            raise ValidationError(f"points: {exc}") from None

    if model == "continuous":
        points = []
        for i, rp in enumerate(raw_points):
            where = f"points[{i}]"
            kind = rp.get("kind")
            try:
                if kind == "gaussian":
                    point = GaussianPoint(
                        np.asarray(rp["mean"], dtype=np.float64),
                        np.asarray(rp["cov"], dtype=np.float64),
                    )
                elif kind == "uniform_disk":
                    point = UniformDiskPoint(
                        np.asarray(rp["center"], dtype=np.float64), float(rp["radius"])
                    )
                elif kind == "point_mass":
                    point = PointMassPoint(np.asarray(rp["at"], dtype=np.float64))
                else:
                    raise ValidationError(f"unknown kind {kind!r}")
            except (ValidationError, ValueError, KeyError) as exc:
                raise ValidationError(f"{where}: {exc}") from None
            points.append(point)
        try:
            return ContinuousUncertainSet(tuple(points), d)
        except ValidationError as exc:
            raise ValidationError(f"points: {exc}") from None

    raise ValidationError(f"unknown model {model!r}")


def save_point_set(uset: IndecisivePointSet | ContinuousUncertainSet) -> str:
    """Serialize to the JSON interchange format (inverse of load_point_set)."""
    if isinstance(uset, IndecisivePointSet):
        doc = {
            "dimension": uset.dimension,
            "model": "indecisive",
            "points": [
                {
                    "locations": [[float(x) for x in loc] for loc in p.locations],
                    "weights": [_weight_to_json(w) for w in p.weights],
                }
                for p in uset.points
            ],
        }
        if uset.jitter_applied:
            doc["jitter_applied"] = True
    else:
        points = []
        for p in uset.points:
            if isinstance(p, GaussianPoint):
                points.append(
                    {
                        "kind": "gaussian",
                        "mean": [float(x) for x in p.mean],
                        "cov": [[float(x) for x in row] for row in p.cov],
                    }
                )
            elif isinstance(p, UniformDiskPoint):
                points.append(
                    {"kind": "uniform_disk", "center": [float(x) for x in p.center], "radius": p.radius}
                )
            else:
                points.append({"kind": "point_mass", "at": [float(x) for x in p.at]})
        doc = {"dimension": uset.dimension, "model": "continuous", "points": points}
    return json.dumps(doc, indent=2)
