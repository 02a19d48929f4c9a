import math

import numpy as np
import pytest

from uqgeom import (
    MeasureId,
    NotLPTypeError,
    check_lp_axioms,
    combinatorial_dimension,
    evaluate,
    find_basis,
    full_violation_test,
    tolerance,
)


def test_measure_id_parsing():
    assert MeasureId.parse("seb2").kind == "seb2"
    assert MeasureId.parse("aabb-perimeter").kind == "aabb_perimeter"
    m = MeasureId.parse("dwid:3,4")
    assert m.kind == "dwid" and np.allclose(m.direction, (0.6, 0.8))
    with pytest.raises(ValueError):
        MeasureId("dwid")  # needs a direction
    with pytest.raises(ValueError):
        MeasureId("seb2", direction=(1.0, 0.0))
    with pytest.raises(ValueError):
        MeasureId("nope")


def test_combinatorial_dimensions():
    assert combinatorial_dimension(MeasureId("seb2")) == 3
    assert combinatorial_dimension(MeasureId("seb1")) == 3
    assert combinatorial_dimension(MeasureId("sebinf")) == 3
    assert combinatorial_dimension(MeasureId("aabb_perimeter")) == 4
    assert combinatorial_dimension(MeasureId("aabb_area")) == 4
    assert combinatorial_dimension(MeasureId("dwid", (1, 0))) == 2


def test_evaluate_seb2_antipodal_pair():
    assert abs(evaluate(MeasureId("seb2"), [[0, 0], [2, 0]]) - 1.0) < 1e-12


def test_evaluate_seb2_equilateral_circumradius():
    tri = [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]
    assert abs(evaluate(MeasureId("seb2"), tri) - 1 / math.sqrt(3)) < 1e-12


def test_evaluate_aabb_perimeter():
    assert evaluate(MeasureId("aabb_perimeter"), [[0, 0], [2, 1]]) == 6.0
    assert evaluate(MeasureId("aabb_area"), [[0, 0], [2, 1]]) == 2.0


def test_evaluate_dwid_and_diameter():
    pts = [[0, 0], [3, 4], [1, 1]]
    assert abs(evaluate(MeasureId("dwid", (1, 0)), pts) - 3.0) < 1e-12
    assert abs(evaluate(MeasureId("diameter"), pts) - 5.0) < 1e-12
    assert evaluate(MeasureId("diameter"), [[2, 2]]) == 0.0


def test_evaluate_seb1_sebinf():
    pts = [[0.0, 0.0], [2.0, 0.0]]
    assert abs(evaluate(MeasureId("sebinf"), pts) - 1.0) < 1e-12
    assert abs(evaluate(MeasureId("seb1"), pts) - 1.0) < 1e-12
    # L1 ball of (0,0), (1,1) has radius 1 (L1 distance 2)
    assert abs(evaluate(MeasureId("seb1"), [[0, 0], [1, 1]]) - 1.0) < 1e-12


def test_seb2_in_3d():
    pts = np.array([[0, 0, 0], [2, 0, 0], [1, 1, 0], [1, 0, 0.5]])
    assert abs(evaluate(MeasureId("seb2"), pts) - 1.0) < 1e-12


def test_find_basis_collinear_points():
    basis = find_basis(MeasureId("seb2"), [[0, 0], [1, 0], [2, 0]])
    assert basis.indices() == (0, 2)
    assert basis.size == 2


def test_find_basis_square_lexicographic():
    sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    basis = find_basis(MeasureId("seb2"), sq)
    assert basis.indices() == (0, 2)
    # derived check: f(B) equals f(Q) (brute: circumradius of the square)
    assert abs(basis.value - evaluate(MeasureId("seb2"), sq)) < 1e-12
    assert abs(basis.value - math.sqrt(2) / 2) < 1e-12


def test_find_basis_aabb_on_random_points(rng):
    m = MeasureId("aabb_perimeter")
    for _ in range(20):
        pts = rng.uniform(-1, 1, (5, 2))
        basis = find_basis(m, pts)
        assert basis.size <= 4
        assert abs(evaluate(m, basis.member_array()) - evaluate(m, pts)) <= tolerance(pts, m)


def test_find_basis_matches_full_value_randomized(rng):
    measures = [
        MeasureId("seb2"),
        MeasureId("seb1"),
        MeasureId("sebinf"),
        MeasureId("aabb_area"),
        MeasureId("dwid", (0.6, 0.8)),
    ]
    for _ in range(20):
        pts = rng.uniform(-2, 2, (int(rng.integers(1, 9)), 2))
        for m in measures:
            basis = find_basis(m, pts)
            assert basis.size <= combinatorial_dimension(m)
            assert abs(evaluate(m, basis.member_array()) - evaluate(m, pts)) <= max(
                tolerance(pts, m), 1e-12
            )
            # minimality: every strict subset has strictly smaller value
            if basis.size > 1:
                arr = basis.member_array()
                for drop in range(basis.size):
                    sub = np.delete(arr, drop, axis=0)
                    assert evaluate(m, sub) < basis.value


def test_find_basis_rejects_diameter():
    with pytest.raises(NotLPTypeError):
        find_basis(MeasureId("diameter"), [[0, 0], [1, 1]])


def test_full_violation_closed_boundary():
    m = MeasureId("seb2")
    basis = find_basis(m, [[-1.0, 0.0], [1.0, 0.0]])
    assert not full_violation_test(m, basis, (0.5, 0.5))  # inside
    assert full_violation_test(m, basis, (1.5, 0.5))  # outside
    assert not full_violation_test(m, basis, (0.0, 1.0))  # exactly on the circle


def test_full_violation_matches_evaluate(rng):
    measures = [MeasureId("seb2"), MeasureId("aabb_perimeter"), MeasureId("dwid", (1, 0))]
    for _ in range(50):
        pts = rng.uniform(-1, 1, (6, 2))
        q = rng.uniform(-1.5, 1.5, 2)
        for m in measures:
            basis = find_basis(m, pts)
            union = np.vstack([basis.member_array(), q])
            slow = evaluate(m, union) > basis.value + tolerance(union, m)
            assert full_violation_test(m, basis, q) == slow


def test_axioms_seb2_clean(rng):
    pts = rng.uniform(-1, 1, (10, 2))
    report = check_lp_axioms(MeasureId("seb2"), pts, trials=100, seed=7)
    assert report.ok


def test_axioms_dwid_monotone(rng):
    pts = rng.uniform(-1, 1, (8, 2))
    report = check_lp_axioms(MeasureId("dwid", (0.3, 0.7)), pts, trials=100, seed=8)
    assert not report.monotonicity_violations


def test_axioms_diameter_diagnostic(rng):
    pts = rng.uniform(-1, 1, (8, 2))
    report = check_lp_axioms(MeasureId("diameter"), pts, trials=50, seed=9)
    assert "not exploitable" in report.note
    assert not report.monotonicity_violations


def test_monotonicity_property_all_measures(rng):
    measures = [
        MeasureId("seb2"),
        MeasureId("seb1"),
        MeasureId("sebinf"),
        MeasureId("aabb_perimeter"),
        MeasureId("aabb_area"),
        MeasureId("dwid", (0.8, -0.6)),
        MeasureId("diameter"),
    ]
    for _ in range(30):
        pts = rng.uniform(-1, 1, (7, 2))
        size = int(rng.integers(1, 7))
        sub = pts[rng.choice(7, size=size, replace=False)]
        for m in measures:
            assert evaluate(m, sub) <= evaluate(m, pts) + tolerance(pts, m)
