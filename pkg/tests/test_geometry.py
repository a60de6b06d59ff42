import itertools

import pytest

from app.engine.errors import FieldError, GeometryError, SizeCapError
from app.engine.geometry_module import (
    Hyperplane, HyperplanePair, HyperplanePairSet, Line, LinePair, LinePairSet, PointSet, as_hyperplane_pairs,
    cartesian, common_linepairs, dump_set, dumps_set, enumerate_hyperplanes, enumerate_lines, generate,
    hyperplanes_through, incident, lines_through, load_set, loads_set, make_rng, parse_generator, points_on,
    population,
)
from app.engine.geometry_module.generators import (
    STREAM_A, STREAM_B, full_hyperplanepairs, multiset_random, random_linepairs, random_points, random_vectors,
)
from app.engine.gf_module import build_field, field_for_order


# ----- lines and hyperplanes --------------------------------------------------------


def test_line_enumeration(small_field):
    lines = enumerate_lines(small_field)
    q = small_field.q
    assert len(lines) == q * q + q
    assert len(set(lines)) == len(lines)
    assert all(len(line.points(small_field)) == q for line in lines)
    assert [line.is_vertical for line in lines].count(True) == q


def test_lines_through_a_point(small_field):
    point = (1, small_field.q - 1)
    through = lines_through(small_field, point)
    assert len(through) == small_field.q + 1
    assert all(line.contains(small_field, point) for line in through)


def test_line_normal_form(gf5):
    line = Line.nonvertical(2, 3)
    a, b, c = line.normal_form(gf5)
    for x, y in line.points(gf5):
        assert gf5.add(gf5.mul(a, x), gf5.mul(b, y)) == c
    assert Line.vertical(4).normal_form(gf5) == (1, 0, 4)
    assert str(line) == "Y=2X+3"


def test_hyperplane_canonical_form(gf3):
    h = Hyperplane.canonical(gf3, (0, 2, 2), 1)
    assert h.normal == (0, 1, 1)
    assert h.offset == 2
    with pytest.raises(GeometryError):
        Hyperplane.canonical(gf3, (0, 0, 0), 1)


def test_hyperplane_points(gf3):
    h = Hyperplane.canonical(gf3, (1, 2, 0), 1)
    points = h.points(gf3)
    assert points.shape == (9, 3)
    assert all(h.contains(gf3, tuple(int(c) for c in p)) for p in points)
    with pytest.raises(GeometryError):
        h.contains(gf3, (0, 0))


def test_hyperplane_enumeration(gf3):
    planes = enumerate_hyperplanes(gf3, 3)
    assert len(planes) == 3 * 13
    point = (2, 0, 1)
    through = hyperplanes_through(gf3, point)
    assert len(through) == 13
    assert all(h.contains(gf3, point) for h in through)
    assert set(through) <= set(planes)


def test_points_on_hyperplane(gf3):
    plane = Hyperplane.canonical(gf3, (2, 2, 0), 1)
    assert plane.normal == (1, 1, 0)
    points = points_on(gf3, plane)
    assert points.shape == (9, 3)
    assert len({tuple(p) for p in points.tolist()}) == 9
    assert all((x + y) % 3 == 2 for x, y, _ in points.tolist())


def test_common_linepairs(gf3):
    q = 3
    assert common_linepairs(gf3, ((0, 0), (0, 0)), ((1, 2), (2, 2))) == 1
    assert common_linepairs(gf3, ((0, 0), (0, 0)), ((0, 0), (1, 1))) == q + 1
    assert common_linepairs(gf3, ((0, 1), (2, 0)), ((0, 1), (2, 0))) == (q + 1) ** 2


@pytest.mark.parametrize("q", [2, 3, 4])
def test_distinct_linepairs_share_at_most_q_points(q):
    spec = field_for_order(q)
    lines = enumerate_lines(spec)
    on = {line: set(line.points(spec)) for line in lines}
    shared = {(a, b): len(on[a] & on[b]) for a in lines for b in lines}
    pairs = [(a, b) for a in lines for b in lines]
    largest = max(shared[a1, b1] * shared[a2, b2]
                  for (a1, a2), (b1, b2) in itertools.combinations(pairs, 2))
    assert largest == q
    first, second = LinePair(*pairs[0]), LinePair(*pairs[1])
    common = set(first.points(spec)) & set(second.points(spec))
    assert len(common) == shared[pairs[0][0], pairs[1][0]] * shared[pairs[0][1], pairs[1][1]]


def test_incident(gf2):
    ell = LinePair(Line.nonvertical(1, 0), Line.vertical(1))
    assert incident(gf2, ((1, 1), (1, 0)), ell)
    assert not incident(gf2, ((1, 0), (1, 0)), ell)
    assert incident(gf2, ((1, 1), (1, 0)), ell.to_hyperplane_pair(gf2))


# ----- sets ------------------------------------------------------------------------


def test_duplicates_merge_into_multiplicities(gf3):
    P = PointSet(gf3, (2, 2), [((0, 1), (2, 2)), ((1, 1), (0, 0)), ((0, 1), (2, 2))])
    assert P.is_multiset
    assert P.support_size == 2
    assert P.total == 3
    assert P.sum_sq_multiplicity == 5
    assert P.multiplicity(((0, 1), (2, 2))) == 2
    assert P.multiplicity(((2, 2), (2, 2))) == 0


def test_point_set_validation(gf3):
    with pytest.raises(GeometryError, match="multiplicity"):
        PointSet(gf3, (2,), [(0, 1)], [0])
    with pytest.raises(GeometryError, match="dimensions"):
        PointSet(gf3, (2, 2), [((0, 1), (2,))])
    with pytest.raises(GeometryError, match="outside"):
        PointSet(gf3, (2,), [(0, 3)])
    with pytest.raises(GeometryError):
        PointSet(gf3, (5,), [])


def test_flat_sets_validate_elements(gf2):
    with pytest.raises(GeometryError):
        LinePairSet(gf2, [Line.vertical(0)])
    h2 = Hyperplane.canonical(gf2, (1, 0), 0)
    h3 = Hyperplane.canonical(gf2, (1, 0, 0), 0)
    with pytest.raises(GeometryError):
        HyperplanePairSet(gf2, (2, 2), [HyperplanePair(h2, h3)])
    with pytest.raises(GeometryError):
        as_hyperplane_pairs(PointSet(gf2, (2,), [(0, 0)]))


def test_linepairs_as_hyperplane_pairs(gf3):
    L = LinePairSet(gf3, [LinePair(Line.nonvertical(1, 2), Line.vertical(0))], [3])
    H = as_hyperplane_pairs(L)
    assert H.total == 3
    assert H.dims == (2, 2)
    flats = L.flat_arrays()
    assert flats.normals[0].shape == (1, 2)
    assert int(flats.offsets[1][0]) == 0


def test_cartesian(gf5):
    A = PointSet(gf5, (2,), [(0, 1), (2, 3)])
    B = PointSet(gf5, (2,), [(4, 4), (1, 0), (3, 3)])
    P = cartesian(gf5, A, B)
    assert P.total == 6
    assert ((0, 4), (1, 4)) in P
    with pytest.raises(GeometryError):
        cartesian(gf5, A, PointSet(gf5, (3,), [(0, 0, 0)]))


# ----- generators ------------------------------------------------------------------


def test_full_generators(gf2):
    assert generate(gf2, "full_points").total == 16
    assert generate(gf2, "full_linepairs").total == 36
    assert generate(gf2, "full_vectors", d=3).total == 8
    assert full_hyperplanepairs(gf2, 2, 3).total == 6 * 14


def test_random_generators_are_deterministic(gf3):
    first = generate(gf3, "random_points", seed=7, n=20)
    again = generate(gf3, "random_points", seed=7, n=20)
    other = generate(gf3, "random_points", seed=8, n=20)
    assert first.support == again.support
    assert first.support != other.support
    assert first.total == 20
    assert not first.is_multiset
    assert list(first.support) == sorted(first.support)


def test_streams_are_independent(gf5):
    a = random_vectors(gf5, 10, 3, stream=1)
    b = random_vectors(gf5, 10, 3, stream=2)
    assert a.support != b.support


def test_nonvertical_only(gf3):
    L = generate(gf3, "random_linepairs", seed=1, n=30, nonvertical_only=True)
    assert L.nonvertical
    assert L.total == 30


def test_multiset_random(gf3):
    P = multiset_random(gf3, 10, 4, seed=5)
    assert P.support_size == 10
    assert all(1 <= m <= 4 for _, m in P.items())
    L = multiset_random(gf3, 6, 2, seed=5, target="linepairs")
    assert isinstance(L, LinePairSet)
    with pytest.raises(GeometryError):
        multiset_random(gf3, 3, 0, seed=1)


def test_multiset_sides_use_separate_streams(gf3):
    P = multiset_random(gf3, 10, 4, seed=5)
    L = multiset_random(gf3, 10, 4, seed=5, target="linepairs")
    assert P.support == random_points(gf3, 10, 5, stream=STREAM_A).support
    assert L.support == random_linepairs(gf3, 10, 5, stream=STREAM_B).support
    assert P.weights().tolist() != L.weights().tolist()
    explicit = generate(gf3, "multiset_random", seed=5, n=10, max_mult=4, stream=STREAM_B)
    assert explicit.support == random_points(gf3, 10, 5, stream=STREAM_B).support


def test_generate_cartesian(gf3):
    P = generate(gf3, "cartesian", seed=2, na=3, nb=4)
    assert P.total == 12
    assert P.dims == (2, 2)


def test_generator_errors(gf2):
    with pytest.raises(GeometryError, match="exceeds population"):
        generate(gf2, "random_points", seed=0, n=17)
    with pytest.raises(GeometryError, match="missing parameter 'n'"):
        generate(gf2, "random_points", seed=0)
    with pytest.raises(GeometryError, match="unknown generator kind"):
        generate(gf2, "lattice")
    with pytest.raises(GeometryError):
        make_rng(-1)


def test_population():
    assert population(2, "random_points") == 16
    assert population(3, "random_vectors", d=3) == 27
    assert population(2, "random_linepairs") == 36
    assert population(2, "random_linepairs", nonvertical_only=True) == 16
    assert population(2, "multiset_random", target="linepairs") == 36
    assert population(2, "random_hyperplanepairs", d1=2, d2=3) == 84
    with pytest.raises(GeometryError):
        population(2, "full_points")


def test_parse_generator():
    assert parse_generator("random_linepairs:n=5,nonvertical_only=true") == \
        ("random_linepairs", {"n": 5, "nonvertical_only": True})
    assert parse_generator("random_linepairs:n=5,nonvertical_only") == \
        ("random_linepairs", {"n": 5, "nonvertical_only": True})
    assert parse_generator("full_points") == ("full_points", {})
    with pytest.raises(GeometryError):
        parse_generator("grid:n=4")


# ----- serialization ---------------------------------------------------------------


def test_point_set_text_format(gf3):
    P = PointSet(gf3, (2, 2), [((0, 1), (2, 2)), ((1, 1), (0, 0))])
    text = dumps_set(P)
    assert text.splitlines() == ["# ffincidence-set v1 q=3 kind=points dims=2,2", "0,1,2,2", "1,1,0,0"]
    back = loads_set(text)
    assert back.support == P.support


def test_multiset_line_pairs_survive_a_file(gf4, tmp_path):
    L = LinePairSet(gf4, [LinePair(Line.nonvertical(2, 3), Line.vertical(1)),
                          LinePair(Line.vertical(0), Line.nonvertical(0, 0))], [2, 1])
    path = tmp_path / "flats.txt"
    dump_set(L, path)
    assert path.read_text().startswith("# ffincidence-set v1 q=4 kind=linepairs dims=2,2 multiset=1")
    back = load_set(path)
    assert list(back.items()) == list(L.items())


def test_hyperplane_pairs_text_format(gf2):
    H = generate(gf2, "random_hyperplanepairs", seed=3, n=5, d1=2, d2=3)
    back = loads_set(dumps_set(H))
    assert back.dims == (2, 3)
    assert back.support == H.support


def test_header_without_dims(gf3):
    P = loads_set("# ffincidence-set v1 q=3 kind=points\n0,1,2,2\n1,1,0,0\n")
    assert P.dims == (2, 2)
    assert ((0, 1), (2, 2)) in P
    A = loads_set("# ffincidence-set v1 q=3 kind=points multiset=1\n0,1,2\n2,2,1\n")
    assert A.dims == (2,)
    assert A.total == 3
    L = loads_set("# ffincidence-set v1 q=3 kind=linepairs\n0,1,2,1,0,0\n")
    assert list(L.support) == [LinePair(Line.nonvertical(1, 2), Line.vertical(0))]
    H = generate(gf3, "random_hyperplanepairs", seed=1, n=4, d1=2, d2=3)
    text = dumps_set(H).replace(" dims=2,3", "")
    assert loads_set(text).support == H.support
    assert loads_set("# ffincidence-set v1 q=2 kind=points\n").total == 0


def test_malformed_set_files():
    with pytest.raises(GeometryError, match="empty"):
        loads_set("")
    with pytest.raises(GeometryError, match="bad set header"):
        loads_set("# something else\n")
    with pytest.raises(FieldError):
        loads_set("# ffincidence-set v1 q=6 kind=points dims=2\n0,0\n")
    with pytest.raises(GeometryError, match="expected 2 fields"):
        loads_set("# ffincidence-set v1 q=3 kind=points dims=2\n0,0,1\n")
    with pytest.raises(GeometryError, match="outside"):
        loads_set("# ffincidence-set v1 q=3 kind=points dims=2\n0,3\n")


def test_line_enumeration_cap():
    with pytest.raises(SizeCapError):
        enumerate_lines(build_field(1031))
