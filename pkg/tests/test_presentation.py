import itertools

import pytest

from glw.errors import CapExceededError, NotComposableError, PresentationError
from glw.presentation import (
    Morphism,
    build_category,
    compose,
    enumerate_morphisms,
    format_category,
    morphism_label,
    parse_category,
    parse_morphism,
)
from tests.conftest import fixture_path


def read(name):
    with open(fixture_path(name), encoding="utf-8") as fh:
        return fh.read()


def unit(cat, a, b, i):
    coords = [0] * cat.dim(a, b)
    coords[i] = 1
    return Morphism(a, b, tuple(coords))


def test_parse_window():
    q = parse_category(read("w5.gcat"))
    assert q.objects == ("v0", "v1", "v2", "v3", "v4")
    assert len(q.arrows) == 8
    assert len(q.relations) == 10
    assert q.nilpotency == 3
    assert q.prime == 2


def test_round_trip():
    q = parse_category(read("w5.gcat"))
    assert parse_category(format_category(q)) == q


def test_hom_dimensions(w5):
    assert w5.hom_table() == {
        "v0": {"v0": 2, "v1": 1, "v2": 0, "v3": 0, "v4": 0},
        "v1": {"v0": 1, "v1": 2, "v2": 1, "v3": 0, "v4": 0},
        "v2": {"v0": 0, "v1": 1, "v2": 2, "v3": 1, "v4": 0},
        "v3": {"v0": 0, "v1": 0, "v2": 1, "v3": 2, "v4": 1},
        "v4": {"v0": 0, "v1": 0, "v2": 0, "v3": 1, "v4": 1},
    }


def test_interior_bases(w5):
    assert w5.basis_labels("v2", "v2") == ["1", "b2.a2"]
    assert w5.basis_labels("v2", "v1") == ["b1"]
    assert w5.basis_labels("v2", "v3") == ["a2"]


def test_longer_nilpotency_bound_adds_nothing(w5):
    text = read("w5.gcat").replace("nilpotency 3", "nilpotency 4")
    assert build_category(parse_category(text)).hom_table() == w5.hom_table()


def test_point(point):
    assert point.dim("pt", "pt") == 1
    assert point.identity("pt").coords == (1,)


def test_dual_numbers(dual):
    assert dual.basis_labels("o", "o") == ["1", "e"]
    e = dual.arrow("e")
    assert compose(dual, e, e).is_zero()


@pytest.mark.parametrize(
    "text, message",
    [
        ("field 2\nnilpotency 2\n", "no objects"),
        ("field 4\nnilpotency 2\nobject x\n", "not prime"),
        ("field 2\nnilpotency 0\nobject x\n", "at least 1"),
        ("field 2\nobject x\n", "nilpotency bound is required"),
        ("field 2\nnilpotency 2\nobject x\narrow f : x -> y\n", "unknown object 'y'"),
        ("field 2\nnilpotency 2\nobject x\nrelation g.g = 0\n", "unknown arrow 'g'"),
        ("field 2\nnilpotency 2\nobject x\nwibble\n", "unknown keyword"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(PresentationError, match=message):
        parse_category(text)


def test_non_parallel_relation():
    text = (
        "field 2\nnilpotency 3\nobject v0 v1 v2\n"
        "arrow a0 : v0 -> v1\narrow a1 : v1 -> v2\n"
        "relation a0 + a1.a0 = 0\n"
    )
    with pytest.raises(PresentationError, match="non-parallel relation") as info:
        parse_category(text)
    assert info.value.line == 6


def test_missing_field_uses_default_prime():
    q = parse_category("nilpotency 1\nobject x\n")
    assert q.prime == 2


def test_enumerate_morphisms(w5, dual):
    assert enumerate_morphisms(w5, "v2", "v0") == [Morphism("v2", "v0", ())]
    assert len(enumerate_morphisms(dual, "o", "o")) == 4
    with pytest.raises(CapExceededError):
        enumerate_morphisms(dual, "o", "o", cap=3)


def test_endomorphisms_closed_under_composition(w5):
    ends = enumerate_morphisms(w5, "v2", "v2")
    assert len(ends) == 4
    for g, f in itertools.product(ends, repeat=2):
        assert compose(w5, g, f) in ends


def test_zigzag_relations(w5):
    a2, b2 = w5.arrow("a2"), w5.arrow("b2")
    assert compose(w5, a2, b2).is_zero()
    loop = compose(w5, b2, a2)
    assert loop == Morphism("v2", "v2", (0, 1))
    assert morphism_label(w5, loop) == "b2.a2"
    assert compose(w5, loop, loop).is_zero()


def test_compose_rejects_mismatch(w5):
    with pytest.raises(NotComposableError):
        compose(w5, w5.arrow("a2"), w5.arrow("a0"))


@pytest.mark.parametrize("name", ["w5", "dual"])
def test_associativity_and_units(name, request):
    cat = request.getfixturevalue(name)
    objs = cat.objects
    for a, b in itertools.product(objs, repeat=2):
        for i in range(cat.dim(a, b)):
            f = unit(cat, a, b, i)
            assert compose(cat, cat.identity(b), f) == f
            assert compose(cat, f, cat.identity(a)) == f
    for a, b, c, d in itertools.product(objs, repeat=4):
        for i, j, k in itertools.product(range(cat.dim(a, b)), range(cat.dim(b, c)), range(cat.dim(c, d))):
            f, g, h = unit(cat, a, b, i), unit(cat, b, c, j), unit(cat, c, d, k)
            assert compose(cat, compose(cat, h, g), f) == compose(cat, h, compose(cat, g, f))


def test_parse_morphism(w5):
    assert parse_morphism(w5, "v2", "b2.a2") == Morphism("v2", "v2", (0, 1))
    assert parse_morphism(w5, "v2", "id + b2.a2") == Morphism("v2", "v2", (1, 1))
    with pytest.raises(PresentationError):
        parse_morphism(w5, "v2", "a2 + b1")
