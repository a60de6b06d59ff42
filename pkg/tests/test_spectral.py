import math

import numpy as np
import pytest
import scipy.sparse as sp

from app.engine.errors import ConvergenceError, GeometryError, IncidenceError, SizeCapError
from app.engine.geometry_module.generators import random_linepairs, random_points
from app.engine.gf_module import build_field, field_for_order
from app.engine.spectral_module import (
    build_graph, closed_form_lambda2, common_neighbors, dumps_graph, embed_flat_rows, embed_point_rows,
    expected_common_neighbors, explicit_lambda_bound, measured_spectrum, mixing_check, mixing_check_l2,
    polarity_factor, second_eigenvalue, verify_neighbor_formula, verify_square_decomposition, vertex_weights,
)
from app.engine.counting_module import count_incidences


@pytest.fixture(scope="module")
def graph2():
    return build_graph(build_field(2))


@pytest.fixture(scope="module")
def graph3():
    return build_graph(build_field(3))


def test_graph_size_and_degree(graph2):
    assert graph2.n == 49
    assert graph2.k == 9
    assert graph2.is_regular()
    assert graph2.is_symmetric()
    assert graph2.loops() == 9


def test_degree_in_mixed_dimensions():
    g = build_graph(build_field(2), 2, 3)
    assert g.n == 7 * 15
    assert g.k == 3 * 7
    assert g.is_regular()


@pytest.mark.parametrize("q, absolute", [(2, 3), (3, 4)])
def test_polarity_factor(q, absolute):
    spec = build_field(q)
    factor = polarity_factor(spec, 2)
    assert factor.shape == (q * q + q + 1, q * q + q + 1)
    assert (factor != factor.T).nnz == 0
    assert set(np.asarray(factor.sum(axis=1)).ravel()) == {q + 1}
    # self-orthogonal points: a line in characteristic 2, a conic otherwise
    assert factor.diagonal().sum() == absolute
    assert (build_graph(spec).adjacency != sp.kron(factor, factor)).nnz == 0


def test_second_eigenvalue_gf2(graph2):
    report = second_eigenvalue(graph2)
    assert report.method == "dense"
    assert report.lambda2 == pytest.approx(3 * math.sqrt(2), abs=1e-9)
    assert report.bound == pytest.approx(math.sqrt(32))
    assert report.bound_ok
    assert report.closed_form == pytest.approx(report.lambda2, abs=1e-9)


def test_power_iteration_matches_dense(graph3):
    dense = second_eigenvalue(graph3, method="dense")
    power = second_eigenvalue(graph3, method="power", seed=7)
    assert power.method == "power-iteration"
    assert power.iterations > 0
    assert power.lambda2 == pytest.approx(dense.lambda2, abs=1e-6)
    assert dense.lambda2 == pytest.approx(4 * math.sqrt(3), abs=1e-9)


def test_eigensolver_arguments(graph2):
    with pytest.raises(IncidenceError, match="tolerance"):
        second_eigenvalue(graph2, tol=0)
    with pytest.raises(IncidenceError, match="unknown eigen method"):
        second_eigenvalue(graph2, method="lanczos")
    with pytest.raises(ConvergenceError) as info:
        second_eigenvalue(graph2, tol=1e-15, method="power", max_iter=1)
    assert info.value.iterations == 1


def test_measured_spectrum_gf2(graph2):
    spectrum = measured_spectrum(graph2)
    values = list(spectrum)
    assert values == pytest.approx([9.0, 3 * math.sqrt(2), 2.0, -2.0, -3 * math.sqrt(2)], abs=1e-5)
    assert list(spectrum.values()) == [1, 6, 18, 18, 6]


def test_explicit_bound_formula():
    for q in (2, 3, 4, 5, 7):
        assert explicit_lambda_bound(q, 2, 2) == pytest.approx(math.sqrt(2 * q ** 3 + 3 * q ** 2 + 2 * q))
        assert closed_form_lambda2(q, 2, 2) <= explicit_lambda_bound(q, 2, 2)
    assert explicit_lambda_bound(2, 2, 3) == pytest.approx(math.sqrt(126))
    assert explicit_lambda_bound(2, 3, 2) == pytest.approx(math.sqrt(126))


@pytest.mark.parametrize("d1, d2, q", [(2, 3, 2), (3, 3, 2), (2, 3, 3)])
def test_mixed_dimension_graphs(d1, d2, q):
    g = build_graph(build_field(q), d1, d2)
    assert g.is_regular()
    assert verify_neighbor_formula(g)
    floor = expected_common_neighbors(q, d1, d2, False, False)
    row_sums = np.asarray(g.square.sum(axis=1)).ravel() - floor * g.n
    assert explicit_lambda_bound(q, d1, d2) == pytest.approx(math.sqrt(row_sums.max()))
    report = second_eigenvalue(g)
    assert report.bound_ok
    assert report.residual <= 1e-8
    assert report.lambda2 <= report.bound


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_neighbor_formula_and_square_decomposition(q):
    g = build_graph(field_for_order(q))
    assert verify_neighbor_formula(g)
    square = verify_square_decomposition(g)
    assert square.ok
    assert square.e_degree == 2 * q * (q + 1)


def test_common_neighbor_cases(graph3):
    q = 3
    assert expected_common_neighbors(q, 2, 2, True, True) == (q + 1) ** 2
    assert expected_common_neighbors(q, 2, 2, True, False) == q + 1
    assert expected_common_neighbors(q, 2, 2, False, False) == 1
    u = graph3.index_of((1, 0, 0), (0, 1, 0))
    v = graph3.index_of((1, 0, 0), (0, 0, 1))
    w = graph3.index_of((0, 1, 2), (1, 1, 1))
    assert common_neighbors(graph3, u, u) == (q + 1) ** 2
    assert common_neighbors(graph3, u, v) == q + 1
    assert common_neighbors(graph3, u, w) == 1


def test_index_of_uses_projective_classes(graph3):
    assert graph3.index_of((2, 0, 0), (0, 2, 1)) == graph3.index_of((1, 0, 0), (0, 1, 2))
    first, second = graph3.vertex(graph3.index_of((0, 1, 2), (1, 1, 1)))
    assert first.coords == (0, 1, 2)
    assert second.coords == (1, 1, 1)


def test_fault_injection_is_detected(graph2):
    faulty = graph2.flip_entry(0, 1)
    assert faulty.perturbed
    assert not graph2.perturbed
    assert not faulty.is_regular()
    check = verify_neighbor_formula(faulty)
    assert not check
    assert check.first_mismatch is not None
    assert not verify_square_decomposition(faulty)


def test_square_decomposition_needs_planes():
    with pytest.raises(GeometryError):
        verify_square_decomposition(build_graph(build_field(2), 2, 3))


def test_graph_cap():
    with pytest.raises(SizeCapError):
        build_graph(build_field(19))


def test_mixing_lemma(graph3):
    lam = second_eigenvalue(graph3).lambda2
    rng = np.random.default_rng(0)
    for _ in range(500):
        U = rng.choice(graph3.n, size=int(rng.integers(1, graph3.n)), replace=False)
        V = rng.choice(graph3.n, size=int(rng.integers(1, graph3.n)), replace=False)
        assert mixing_check(graph3, U, V, lam).ok
    for _ in range(200):
        f = rng.integers(0, 4, size=graph3.n)
        h = rng.integers(0, 4, size=graph3.n)
        assert mixing_check_l2(graph3, f, h, lam).ok


def test_mixing_rejects_bad_input(graph2):
    with pytest.raises(GeometryError):
        mixing_check(graph2, [0, 49], [1], 1.0)
    with pytest.raises(GeometryError):
        mixing_check_l2(graph2, np.ones(3), np.ones(49), 1.0)
    with pytest.raises(GeometryError):
        mixing_check_l2(graph2, -np.ones(49), np.ones(49), 1.0)


def test_embedding_turns_incidences_into_edges(graph3):
    spec = graph3.spec
    P = random_points(spec, 40, seed=1)
    L = random_linepairs(spec, 40, seed=1, stream=2)
    first, second = P.component_arrays()
    f = vertex_weights(graph3, embed_point_rows(graph3, first, second), P.weights())
    flats = L.flat_arrays()
    h = vertex_weights(graph3, embed_flat_rows(graph3, flats.normals, flats.offsets), L.weights())
    assert int(f @ (graph3.adjacency @ h)) == count_incidences(P, L).count


def test_dumps_graph(graph2):
    lines = dumps_graph(graph2).splitlines()
    assert lines[0] == "# ffincidence-graph v1 q=2 d1=2 d2=2"
    assert len(lines) - 1 == (49 * 9 - 9) // 2 + 9
