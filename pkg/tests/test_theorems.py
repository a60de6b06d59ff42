import math
from fractions import Fraction

import pytest

from app.engine.errors import GeometryError, IncidenceError
from app.engine.geometry_module import Line, LinePair, LinePairSet, PointSet, cartesian
from app.engine.geometry_module.generators import (
    full_hyperplanepairs, full_linepairs, full_points, multiset_random, random_hyperplanepairs, random_linepairs,
    random_points, random_vectors,
)
from app.engine.counting_module import count_incidences
from app.engine.gf_module import build_field, field_for_order
from app.engine.theorems_module import (
    SdzParams, build_energy_reduction, verify_cartesian, verify_cs, verify_hyperplane, verify_sdz, verify_vinh,
)


def test_cs_on_the_full_space_gf2(gf2):
    cs1, cs2 = verify_cs(full_points(gf2), full_linepairs(gf2))
    assert cs1.lhs == cs2.lhs == 144
    assert cs2.bound_term == pytest.approx(132.0)
    assert cs2.ratio == pytest.approx(144 / 132)
    assert cs1.bound_term == pytest.approx(math.sqrt(2) * 4 * 36 + 16)
    assert cs1.hard and cs1.passed and cs2.passed
    assert cs1.extras["sum_sq_point"] == 1296
    assert cs1.extras["point_pairs_ok"]


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_cs_chain_passes_on_random_sets(q):
    spec = field_for_order(q)
    for seed in range(3):
        P = random_points(spec, min(25, q ** 4), seed)
        L = random_linepairs(spec, 25, seed, stream=2)
        cs1, cs2 = verify_cs(P, L)
        assert cs1.passed and cs2.passed
        assert cs1.lhs == count_incidences(P, L, "naive").count


def test_vinh_paper_mode_on_the_full_space(gf2):
    report = verify_vinh(full_points(gf2), full_linepairs(gf2))
    assert report.lhs == 144
    assert report.main_term == Fraction(144)
    assert report.discrepancy == 0
    assert report.ratio == 0
    assert report.params["lambda_mode"] == "paper"
    assert report.extras["explicit_lambda_bound"] == pytest.approx(math.sqrt(32))


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_vinh_computed_mode_always_holds(q):
    spec = field_for_order(q)
    for seed in range(5):
        P = random_points(spec, min(20, q ** 4), seed)
        L = random_linepairs(spec, 20, seed, stream=2)
        report = verify_vinh(P, L, "computed")
        assert report.hard
        assert report.passed, report.as_dict()
        assert report.extras["embedded_incidences"] == report.lhs
        assert report.discrepancy <= report.bound_term + 1e-9


def test_vinh_computed_mode_with_multisets(gf3):
    P = multiset_random(gf3, 15, 4, seed=9)
    L = multiset_random(gf3, 15, 4, seed=9, target="linepairs")
    report = verify_vinh(P, L, "computed_lambda2")
    assert report.passed
    assert report.params["multiset"]
    main = Fraction(16, 169) * P.total * L.total
    assert report.main_term == main


def test_vinh_arguments(gf2):
    with pytest.raises(GeometryError):
        verify_vinh(random_points(gf2, 3, 0, d1=2, d2=3), random_hyperplanepairs(gf2, 3, 0, d1=2, d2=3))
    with pytest.raises(IncidenceError, match="lambda mode"):
        verify_vinh(random_points(gf2, 3, 0), random_linepairs(gf2, 3, 0), "exact")
    report = verify_vinh(random_points(gf2, 3, 0), random_linepairs(gf2, 3, 0), "paper_q32")
    assert report.params["lambda_mode"] == "paper"


def test_hyperplane_reduces_to_vinh_in_the_plane(gf3):
    P = random_points(gf3, 20, seed=2)
    L = random_linepairs(gf3, 20, seed=2, stream=2).hyperplane_pairs()
    for mode in ("paper", "computed"):
        vinh = verify_vinh(P, L, mode)
        hyper = verify_hyperplane(P, L, mode)
        assert hyper.theorem_id == "hyperplane"
        assert (hyper.lhs, hyper.main_term, hyper.bound_term, hyper.ratio) == \
            (vinh.lhs, vinh.main_term, vinh.bound_term, vinh.ratio)


def test_hyperplane_in_mixed_dimensions(gf2):
    P = random_points(gf2, 20, seed=5, d1=2, d2=3)
    H = random_hyperplanepairs(gf2, 20, seed=5, d1=2, d2=3)
    paper = verify_hyperplane(P, H)
    assert paper.bound_term == pytest.approx(2 ** 2.5 * math.sqrt(400))
    computed = verify_hyperplane(P, H, "computed")
    assert computed.passed
    with pytest.raises(GeometryError, match="d1 <= d2"):
        verify_hyperplane(random_points(gf2, 3, 0, d1=3, d2=2), random_hyperplanepairs(gf2, 3, 0, d1=3, d2=2))


@pytest.mark.parametrize("d1, d2", [(1, 2), (1, 1), (3, 2)])
def test_hyperplane_dimension_range(gf2, d1, d2):
    P = random_points(gf2, 3, 0, d1=d1, d2=d2)
    with pytest.raises(GeometryError, match="2 <= d1 <= d2 <= 4"):
        verify_hyperplane(P, random_hyperplanepairs(gf2, 3, 0))


@pytest.mark.parametrize("q", [2, 3])
def test_hyperplane_on_the_full_space(q):
    spec = field_for_order(q)
    P, H = full_points(spec, 3, 3), full_hyperplanepairs(spec, 3, 3)
    report = verify_hyperplane(P, H)
    assert report.lhs == H.total * q ** 4
    assert report.main_term == Fraction(H.total * q ** 4)
    assert report.discrepancy == 0
    assert report.passed


def test_energy_reduction_matches_direct_count(gf5):
    for seed in range(5):
        A = random_vectors(gf5, 4, seed, stream=1)
        L = random_linepairs(gf5, 6, seed, True, stream=2)
        reduction = build_energy_reduction(A, L)
        assert reduction.agree
        assert reduction.Q.total == 24
        assert reduction.R.dims == (3, 3)
        assert reduction.energy >= 24


def test_energy_reduction_rejects_vertical_lines(gf3):
    A = random_vectors(gf3, 2, 0)
    L = LinePairSet(gf3, [LinePair(Line.vertical(0), Line.nonvertical(1, 1))])
    with pytest.raises(GeometryError, match="non-vertical"):
        build_energy_reduction(A, L)


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_cartesian_hard_checks(q):
    spec = field_for_order(q)
    for seed in range(3):
        A = random_vectors(spec, min(3, q * q), seed, stream=1)
        B = random_vectors(spec, min(5, q * q), seed, stream=2)
        L = random_linepairs(spec, 8, seed, True, stream=0)
        report = verify_cartesian(A, B, L)
        assert report.passed, report.as_dict()
        assert report.extras["lemma_solutions"] == report.lhs
        assert report.lhs == count_incidences(cartesian(spec, A, B), L).count
        assert report.lhs ** 2 <= B.total * report.extras["energy"]


def test_cartesian_hypothesis_and_argument_checks(gf3):
    A = random_vectors(gf3, 2, 0, stream=1)
    B = random_vectors(gf3, 3, 0, stream=2)
    L = random_linepairs(gf3, 4, 0, True)
    report = verify_cartesian(A, B, L, threshold_exponent=1.0)
    assert not report.hypothesis_ok
    assert report.extras["hypothesis_ok_statement"]
    assert report.params["threshold_exponent"] == 1.0
    with pytest.raises(GeometryError, match=r"\|A\| <= \|B\|"):
        verify_cartesian(B, A, L)


def test_sdz_hypothesis(gf3):
    P = random_points(gf3, 20, seed=0)
    report = verify_sdz(P, random_linepairs(gf3, 20, seed=0, stream=2))
    assert report.hypothesis_ok
    assert report.bound_term == pytest.approx(400 * math.sqrt(20 / 3))
    too_many = verify_sdz(P, random_linepairs(gf3, 30, seed=0, stream=2))
    assert not too_many.hypothesis_ok
    assert not too_many.extras["n_range_ok"]
    with pytest.raises(IncidenceError):
        SdzParams(C=0)


def test_bound_report_as_dict(gf2):
    report = verify_vinh(full_points(gf2), full_linepairs(gf2))
    data = report.as_dict()
    assert data["main_term"] == 144.0
    assert data["theorem_id"] == "vinh"


@pytest.mark.slow
def test_vinh_computed_mode_gf7():
    spec = build_field(7)
    P = random_points(spec, 200, seed=1)
    L = random_linepairs(spec, 200, seed=1, stream=2)
    assert verify_vinh(P, L, "computed").passed
