"""Deterministic engine for indecisive point sets.

Computes the exact output distribution of any supported LP-type measure by
enumerating potential bases (subsets of at most beta candidate locations,
one per point), validating each as a true minimal basis, and counting the
probability mass of the supports it represents: basis members contribute
their own weight, every other point contributes the summed weight of its
candidates that lie strictly inside the basis's non-violation shape.

All probability arithmetic is exact.  Per point, weights are scaled to a
common integer denominator, so a basis probability is an integer numerator
over the product of the per-point denominators; the engine verifies the
integer identity "sum of numerators == product of denominators" and refuses
to return a distribution that leaks or double-counts mass.

Inputs are canonically jittered (see :func:`uqgeom.model.canonical_jitter`)
unless already marked, which realizes the general-position assumption the
counting argument needs.  The brute-force oracle enumerates all supports on
the same jittered coordinates, so the two engines are comparable breakpoint
by breakpoint.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import bbox_diameter, coordinate_scale
from .measures import (
    Basis,
    BasisMember,
    MeasureId,
    NotLPTypeError,
    _seb2_ball_of_members,
    _seb2_ball_tuple,
    _seb2_basis_indices,
    combinatorial_dimension,
    value_scale,
)
from .model import IndecisivePointSet, ValidationError, canonical_jitter
from .quantize import Quantization1D
from .sip import DiskShape, RectShape, SipField

__all__ = [
    "BasisRecord",
    "ExactDistribution",
    "ResourceCapError",
    "ConservationError",
    "enumerate_potential_bases",
    "basis_support_probability",
    "exact_distribution",
    "brute_force_distribution",
    "deterministic_sip",
    "distributions_match",
]

_MATCH_REL = 1e-13
_STRICT_REL = 1e-14

_HARDNESS_MESSAGE = (
    "diameter is not LP-type (locality fails); computing its exact "
    "distribution is #P-hard, use brute_force_distribution or the "
    "randomized engine instead"
)


class ResourceCapError(RuntimeError):
    """Raised when an enumeration would exceed the configured cap; maps to
    CLI exit code 3."""


class ConservationError(AssertionError):
    """Basis probabilities failed to sum to exactly one.

    This indicates a degeneracy the canonical jitter did not separate (or an
    internal bug); the engine refuses to return a wrong distribution.
    """


@dataclass(frozen=True, eq=False)
class BasisRecord:
    """One weighted atom of an exact distribution.

    ``basis`` is None for records produced by brute-force enumeration, where
    atoms are grouped by value rather than by defining basis.
    """

    basis: Basis | None
    probability: Fraction
    value: float


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    records: tuple[BasisRecord, ...]
    collapsed: Quantization1D
    measure: MeasureId

    @property
    def total_probability(self) -> Fraction:
        return sum((r.probability for r in self.records), Fraction(0))

    def cdf(self, r: float) -> Fraction:
        idx = int(np.searchsorted(self.collapsed.values, r, side="right"))
        if idx == 0:
            return Fraction(0)
        return sum(self.collapsed.weights[:idx], Fraction(0))


# --------------------------------------------------------------------------
# Preparation


class _Prepared:
    __slots__ = (
        "uset",
        "measure",
        "n",
        "ks",
        "xs",
        "ys",
        "fx",
        "fy",
        "fxl",
        "fyl",
        "wints",
        "wnp",
        "denoms",
        "total_denom",
        "scale",
        "vscale",
        "geom_eps",
        "match_eps",
        "strict_eps",
        "group_tol",
        "beta",
    )

    def __init__(self, uset: IndecisivePointSet, measure: MeasureId):
        if uset.dimension != 2:
            raise ValidationError("the deterministic engine supports d=2 only")
        uset = canonical_jitter(uset)
        self.uset = uset
        self.measure = measure
        self.n = uset.n
        self.ks = [p.k for p in uset.points]
        self.xs = [p.locations[:, 0].copy() for p in uset.points]
        self.ys = [p.locations[:, 1].copy() for p in uset.points]
        all_locs = uset.all_locations()
        self.scale = coordinate_scale(all_locs)
        self.vscale = value_scale(measure, self.scale)
        self.geom_eps = _STRICT_REL * self.scale
        self.match_eps = _MATCH_REL * self.vscale
        self.strict_eps = _STRICT_REL * self.vscale
        diam = bbox_diameter(all_locs)
        self.group_tol = 1e-9 * value_scale(measure, diam)
        self.beta = min(combinatorial_dimension(measure, 2), self.n)
        # Frame coordinates for the strict-interior masks.
        if measure.kind == "dwid":
            u = np.asarray(measure.direction)
            self.fx = [x * u[0] + y * u[1] for x, y in zip(self.xs, self.ys)]
            self.fy = [np.zeros(k) for k in self.ks]
        elif measure.kind == "seb1":
            self.fx = [x + y for x, y in zip(self.xs, self.ys)]
            self.fy = [y - x for x, y in zip(self.xs, self.ys)]
        else:
            self.fx = self.xs
            self.fy = self.ys
        # Plain-float copies for the per-combo inner loops (numpy scalar
        # indexing is too slow at (nk)^beta scale).
        self.fxl = [[float(v) for v in arr] for arr in self.fx]
        self.fyl = [[float(v) for v in arr] for arr in self.fy]
        # Integer weights over a per-point common denominator.
        self.wints = []
        self.wnp = []
        self.denoms = []
        for p in uset.points:
            denom = 1
            for w in p.weights:
                denom = denom * w.denominator // math.gcd(denom, w.denominator)
            ints = [int(w * denom) for w in p.weights]
            self.wints.append(ints)
            dtype = np.int64 if denom < 2**62 else object
            self.wnp.append(np.array(ints, dtype=dtype))
            self.denoms.append(denom)
        self.total_denom = math.prod(self.denoms)

    def combo_count(self) -> int:
        total = 0
        for s in range(1, self.beta + 1):
            for pts_combo in itertools.combinations(range(self.n), s):
                total += math.prod(self.ks[i] for i in pts_combo)
        return total


def _validate_and_value(prep: _Prepared, xs: tuple, ys: tuple) -> float | None:
    """Value of a potential basis, or None when it is not minimal.

    ``xs``/``ys`` hold the members' frame coordinates (projection/rotated
    where applicable) as plain floats.  Minimality only needs the drop-one
    subsets by monotonicity.
    """
    kind = prep.measure.kind
    s = len(xs)
    eps = prep.strict_eps
    if s == 1:
        return 0.0
    if kind == "dwid":
        span = abs(xs[1] - xs[0])
        return span if span > eps else None
    if kind == "seb2":
        if s == 2:
            r = _seb2_ball_tuple(((xs[0], ys[0]), (xs[1], ys[1])))[2]
            return r if r > eps else None
        # A triple is minimal iff the triangle is strictly acute: vertex V is
        # outside the opposite pair's diametral disk iff (A-V).(B-V) > 0.
        # Radius differences degrade quadratically near right triangles, so
        # minimality must use this linear-scale predicate instead.
        eps_dot = prep.geom_eps * prep.scale
        ax, ay, bx, by, cx, cy = xs[0], ys[0], xs[1], ys[1], xs[2], ys[2]
        if (
            (bx - ax) * (cx - ax) + (by - ay) * (cy - ay) <= eps_dot
            or (ax - bx) * (cx - bx) + (ay - by) * (cy - by) <= eps_dot
            or (ax - cx) * (bx - cx) + (ay - cy) * (by - cy) <= eps_dot
        ):
            return None
        sol = _seb2_ball_tuple(tuple(zip(xs, ys)))
        return sol[2]
    if kind in ("aabb_perimeter", "aabb_area"):
        perim = kind == "aabb_perimeter"

        def rect_value(x, y):
            ex = max(x) - min(x)
            ey = max(y) - min(y)
            return 2.0 * (ex + ey) if perim else ex * ey

        value = rect_value(xs, ys)
        for drop in range(s):
            keep = tuple(t for t in range(s) if t != drop)
            if rect_value([xs[t] for t in keep], [ys[t] for t in keep]) >= value - eps:
                return None
        return value

    # sebinf / seb1 (frame coordinates).  The plain radius violates the
    # locality axiom (optimal centers are not unique), so the basis must pin
    # the lexicographically minimal optimum (r, cx, cy): minimality compares
    # the full triple, with cx = max_x - r and cy = max_y - r.
    geps = prep.geom_eps

    def lex_opt(x, y):
        r = max(max(x) - min(x), max(y) - min(y)) / 2.0
        return r, max(x) - r, max(y) - r

    r, cx, cy = lex_opt(xs, ys)
    for drop in range(s):
        keep = tuple(t for t in range(s) if t != drop)
        r2, cx2, cy2 = lex_opt([xs[t] for t in keep], [ys[t] for t in keep])
        # Subsets give lexicographically smaller-or-equal optima; reject the
        # combo unless every drop strictly changes some component.
        if abs(r2 - r) <= eps and abs(cx2 - cx) <= geps and abs(cy2 - cy) <= geps:
            return None
    return r


def _shape_of(prep: _Prepared, xs: tuple, ys: tuple, value: float) -> tuple:
    kind = prep.measure.kind
    if kind == "seb2":
        if len(xs) == 1:
            return (xs[0], ys[0], 0.0)
        sol = _seb2_ball_tuple(tuple(zip(xs, ys)))
        return (sol[0], sol[1], sol[2])
    if kind == "dwid":
        return (min(xs), max(xs))
    if kind in ("aabb_perimeter", "aabb_area"):
        return (min(xs), max(xs), min(ys), max(ys))
    # sebinf / seb1: the canonical (lex-minimal) optimal square in frame
    # coordinates, anchored at the max corner.  A support has this basis iff
    # all its other candidates lie inside this square, which pins radius and
    # both center components at once.
    w2 = 2.0 * value
    mx = max(xs)
    my = max(ys)
    return (mx - w2, mx, my - w2, my)


def _mask_strict_inside(prep: _Prepared, shape: tuple, i: int) -> np.ndarray:
    kind = prep.measure.kind
    eps = prep.geom_eps
    xs = prep.fx[i]
    ys = prep.fy[i]
    if kind == "seb2":
        cx, cy, r = shape
        lim = r - eps
        if lim <= 0.0:
            return np.zeros(len(xs), dtype=bool)
        return (xs - cx) ** 2 + (ys - cy) ** 2 < lim * lim
    if kind == "dwid":
        lo, hi = shape
        return (xs > lo + eps) & (xs < hi - eps)
    x0, x1, y0, y1 = shape
    return (xs > x0 + eps) & (xs < x1 - eps) & (ys > y0 + eps) & (ys < y1 - eps)


def _iter_valid_bases(prep: _Prepared):
    """Yield (combo, member_xs, member_ys, value) over all validated
    potential bases, in lexicographic (point indices, candidate indices)
    order.  Coordinates are frame coordinates as plain float tuples."""
    n = prep.n
    for s in range(1, prep.beta + 1):
        for pts_combo in itertools.combinations(range(n), s):
            coord_x = [prep.fxl[i] for i in pts_combo]
            coord_y = [prep.fyl[i] for i in pts_combo]
            ranges = [range(prep.ks[i]) for i in pts_combo]
            for cand in itertools.product(*ranges):
                xs = tuple(coord_x[t][j] for t, j in enumerate(cand))
                ys = tuple(coord_y[t][j] for t, j in enumerate(cand))
                value = _validate_and_value(prep, xs, ys)
                if value is None:
                    continue
                yield tuple(zip(pts_combo, cand)), xs, ys, value


def _numerator(prep: _Prepared, combo, shape) -> int:
    """Integer probability numerator (over prep.total_denom) of the basis."""
    members = dict(combo)
    num = 1
    for i in range(prep.n):
        j = members.get(i)
        if j is not None:
            num *= prep.wints[i][j]
            continue
        mask = _mask_strict_inside(prep, shape, i)
        s = int(prep.wnp[i][mask].sum()) if mask.any() else 0
        if s == 0:
            return 0
        num *= s
    return num


def _basis_object(prep: _Prepared, combo, value: float) -> Basis:
    members = tuple(
        BasisMember(i, j, (float(prep.xs[i][j]), float(prep.ys[i][j]))) for i, j in combo
    )
    return Basis(prep.measure, members, value)


def _require_lp_type(measure: MeasureId):
    if not measure.is_lp_type:
        raise NotLPTypeError(_HARDNESS_MESSAGE)


def enumerate_potential_bases(uset: IndecisivePointSet, measure: MeasureId):
    """All validated potential bases: subsets of at most beta candidates with
    pairwise-distinct point indices that are minimal for the measure.

    Bases are yielded regardless of whether any support realizes them (a
    basis whose non-members all violate contributes zero probability)."""
    _require_lp_type(measure)
    prep = _Prepared(uset, measure)
    for combo, xs, ys, value in _iter_valid_bases(prep):
        yield _basis_object(prep, combo, value)


def basis_support_probability(uset: IndecisivePointSet, measure: MeasureId, basis: Basis) -> Fraction:
    """Exact probability that a random support has this basis."""
    _require_lp_type(measure)
    prep = _Prepared(uset, measure)
    combo = []
    for m in basis.members:
        if m.candidate is None:
            raise ValidationError("basis members need (point, candidate) provenance")
        combo.append((m.point, m.candidate))
    combo = tuple(sorted(combo))
    xs = tuple(prep.fxl[i][j] for i, j in combo)
    ys = tuple(prep.fyl[i][j] for i, j in combo)
    value = _validate_and_value(prep, xs, ys)
    if value is None:
        raise ValidationError("not a valid (minimal) basis for this measure")
    shape = _shape_of(prep, xs, ys, value)
    return Fraction(_numerator(prep, combo, shape), prep.total_denom)


def _collapse(values_to_num: dict, total_denom: int, group_tol: float) -> Quantization1D:
    """Group sorted breakpoints whose consecutive gaps are within the
    tolerance (single linkage); each group keeps its smallest value."""
    items = sorted(values_to_num.items())
    grouped_vals: list[float] = []
    grouped_nums: list[int] = []
    prev = None
    for v, num in items:
        if prev is not None and v - prev <= group_tol:
            grouped_nums[-1] += num
        else:
            grouped_vals.append(v)
            grouped_nums.append(num)
        prev = v
    weights = tuple(Fraction(num, total_denom) for num in grouped_nums)
    return Quantization1D(np.array(grouped_vals), weights, "exact")


def exact_distribution(
    uset: IndecisivePointSet,
    measure: MeasureId,
    *,
    keep_records: bool | None = None,
) -> ExactDistribution:
    """Exact distribution of the measure over all supports (Theorem-style
    basis counting; O((nk)^(beta+1)) time).

    Raises ConservationError if the counted mass does not sum to exactly 1,
    which would indicate an unresolved degeneracy.  ``keep_records`` defaults
    to True for small enumerations and False beyond 200k potential bases.
    """
    _require_lp_type(measure)
    prep = _Prepared(uset, measure)
    if keep_records is None:
        keep_records = prep.combo_count() <= 200_000
    agg: dict[float, int] = {}
    records: list[BasisRecord] = []
    total = 0
    for combo, xs, ys, value in _iter_valid_bases(prep):
        shape = _shape_of(prep, xs, ys, value)
        num = _numerator(prep, combo, shape)
        if num == 0:
            continue
        total += num
        agg[value] = agg.get(value, 0) + num
        if keep_records:
            records.append(
                BasisRecord(
                    _basis_object(prep, combo, value),
                    Fraction(num, prep.total_denom),
                    value,
                )
            )
    if total != prep.total_denom:
        raise ConservationError(
            f"basis probabilities sum to {Fraction(total, prep.total_denom)} != 1; "
            "the instance is degenerate beyond what canonical jitter resolves"
        )
    collapsed = _collapse(agg, prep.total_denom, prep.group_tol)
    return ExactDistribution(tuple(records), collapsed, measure)


def brute_force_distribution(
    uset: IndecisivePointSet,
    measure: MeasureId,
    *,
    cap: int = 1_000_000,
) -> ExactDistribution:
    """Oracle distribution by full enumeration of all k^n supports.

    Works for every measure including diameter.  Uses the same jittered
    coordinates and value conventions as the deterministic engine so the two
    outputs are directly comparable.
    """
    count = uset.support_count()
    if count > cap:
        raise ResourceCapError(
            f"instance has {count} supports, exceeding the cap of {cap}; "
            f"rerun with a cap of at least {count}"
        )
    if uset.dimension != 2:
        raise ValidationError("the brute-force oracle supports d=2 only")
    jset = canonical_jitter(uset)
    n = jset.n
    kind = measure.kind
    pts_arrays = [p.locations for p in jset.points]
    denoms = []
    wints = []
    for p in jset.points:
        denom = 1
        for w in p.weights:
            denom = denom * w.denominator // math.gcd(denom, w.denominator)
        denoms.append(denom)
        wints.append([int(w * denom) for w in p.weights])
    total_denom = math.prod(denoms)
    diam = bbox_diameter(jset.all_locations())
    group_tol = 1e-9 * value_scale(measure, diam)
    if kind == "dwid":
        u = np.asarray(measure.direction)
        projs = [arr @ u for arr in pts_arrays]

    agg: dict[float, int] = {}
    total = 0
    buf = np.empty((n, 2))
    for choice in itertools.product(*[range(p.k) for p in jset.points]):
        num = 1
        for i, j in enumerate(choice):
            num *= wints[i][j]
            buf[i] = pts_arrays[i][j]
        if kind == "dwid":
            t = [projs[i][j] for i, j in enumerate(choice)]
            value = max(t) - min(t)
        elif kind == "seb2":
            idx = _seb2_basis_indices(buf)
            value = _seb2_ball_of_members(buf[list(idx)]).radius
        elif kind == "diameter":
            if n == 1:
                value = 0.0
            else:
                diff = buf[:, None, :] - buf[None, :, :]
                value = float(np.sqrt((diff * diff).sum(axis=2)).max())
        else:
            ex = buf[:, 0].max() - buf[:, 0].min()
            ey = buf[:, 1].max() - buf[:, 1].min()
            if kind == "aabb_perimeter":
                value = 2.0 * (ex + ey)
            elif kind == "aabb_area":
                value = ex * ey
            elif kind == "sebinf":
                value = max(ex, ey) / 2.0
            else:  # seb1
                s = buf[:, 0] + buf[:, 1]
                t = buf[:, 1] - buf[:, 0]
                value = max(s.max() - s.min(), t.max() - t.min()) / 2.0
        value = float(value)
        agg[value] = agg.get(value, 0) + num
        total += num
    if total != total_denom:
        raise ConservationError("support probabilities failed to sum to 1 (internal error)")
    collapsed = _collapse(agg, total_denom, group_tol)
    records = tuple(
        BasisRecord(None, Fraction(num, total_denom), v) for v, num in sorted(agg.items())
    )
    return ExactDistribution(records, collapsed, measure)


def deterministic_sip(uset: IndecisivePointSet, measure: MeasureId) -> SipField:
    """Exact shape-inclusion-probability field: one summarizing shape per
    basis, weighted by the basis probability.  Queries are answered by a
    linear scan over the weighted shapes."""
    if measure.kind not in ("seb2", "aabb_perimeter", "aabb_area"):
        raise ValidationError("deterministic SIP needs a disk or rectangle summarizing shape")
    prep = _Prepared(uset, measure)
    shapes = []
    total = 0
    for combo, xs, ys, value in _iter_valid_bases(prep):
        shape = _shape_of(prep, xs, ys, value)
        num = _numerator(prep, combo, shape)
        if num == 0:
            continue
        total += num
        weight = Fraction(num, prep.total_denom)
        # For these measures the frame coordinates are plain x/y, so the
        # counting shape doubles as the summarizing shape.
        if measure.kind == "seb2":
            shapes.append((DiskShape(shape[0], shape[1], shape[2]), weight))
        else:
            x0, x1, y0, y1 = shape
            shapes.append((RectShape(x0, y0, x1, y1), weight))
    if total != prep.total_denom:
        raise ConservationError("SIP shape weights failed to sum to 1")
    return SipField.from_shapes(shapes)


def distributions_match(
    a: ExactDistribution, b: ExactDistribution, tol: float
) -> bool:
    """Grouped-breakpoint equality: cluster the union of breakpoints at the
    given tolerance (single linkage) and require exactly equal rational
    weights per cluster."""
    pooled = [(float(v), 0, w) for v, w in zip(a.collapsed.values, a.collapsed.weights)]
    pooled += [(float(v), 1, w) for v, w in zip(b.collapsed.values, b.collapsed.weights)]
    pooled.sort(key=lambda t: t[0])
    wa = Fraction(0)
    wb = Fraction(0)
    prev = None
    for v, side, w in pooled:
        if prev is not None and v - prev > tol:
            if wa != wb:
                return False
            wa = Fraction(0)
            wb = Fraction(0)
        if side == 0:
            wa += w
        else:
            wb += w
        prev = v
    return wa == wb
