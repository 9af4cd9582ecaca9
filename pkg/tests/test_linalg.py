import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glw import linalg
from glw.errors import CapExceededError, GlwError, InconsistentSystemError
from glw.linalg import Subspace

P = 2


@st.composite
def matrices(draw, max_rows=5, max_cols=5, rows=None, cols=None):
    r = rows if rows is not None else draw(st.integers(1, max_rows))
    c = cols if cols is not None else draw(st.integers(1, max_cols))
    entries = draw(st.lists(st.integers(0, P - 1), min_size=r * c, max_size=r * c))
    return np.array(entries, dtype=np.int64).reshape(r, c)


@st.composite
def subspaces(draw, ambient):
    count = draw(st.integers(0, ambient))
    vectors = draw(
        st.lists(st.lists(st.integers(0, P - 1), min_size=ambient, max_size=ambient), min_size=count, max_size=count)
    )
    return Subspace.span(vectors, ambient, P)


def all_vectors(n):
    return [np.array(v, dtype=np.int64) for v in itertools.product(range(P), repeat=n)]


def row_space(m):
    return {tuple(int(x) for x in (np.array(c) @ m) % P) for c in itertools.product(range(P), repeat=m.shape[0])}


def elements(space: Subspace):
    return {tuple(int(x) for x in v) for v in all_vectors(space.ambient_dim) if space.contains(v)}


def test_rref_identity():
    reduced, rank = linalg.rref(linalg.identity(2), P)
    assert rank == 2
    assert np.array_equal(reduced, linalg.identity(2))


def test_rref_duplicate_rows():
    reduced, rank = linalg.rref(np.array([[1, 1], [1, 1]]), P)
    assert rank == 1
    assert reduced.tolist() == [[1, 1]]


@given(matrices())
def test_rank_matches_row_space_size(m):
    assert len(row_space(m)) == P ** linalg.rank(m, P)


@given(matrices())
def test_rref_is_idempotent_and_keeps_row_space(m):
    reduced, rank = linalg.rref(m, P)
    again, rank_again = linalg.rref(reduced, P)
    assert np.array_equal(reduced, again)
    assert rank == rank_again
    if rank:
        assert row_space(reduced) == row_space(m)


def test_solve_identity():
    b = np.array([1, 0, 1])
    solution = linalg.solve(linalg.identity(3), b, P)
    assert solution.particular.tolist() == [1, 0, 1]
    assert solution.kernel.is_zero


def test_solve_zero_system_has_full_kernel():
    solution = linalg.solve(linalg.zeros(2, 3), np.zeros(2, dtype=np.int64), P)
    assert solution.kernel.is_full


def test_solve_inconsistent():
    with pytest.raises(InconsistentSystemError):
        linalg.solve(linalg.zeros(1, 2), np.array([1]), P)


@given(matrices(rows=3, cols=4), st.lists(st.integers(0, 1), min_size=3, max_size=3))
def test_solve_matches_enumeration(a, rhs):
    b = np.array(rhs, dtype=np.int64)
    expected = {tuple(int(t) for t in x) for x in all_vectors(4) if np.array_equal((a @ x) % P, b)}
    if not expected:
        with pytest.raises(InconsistentSystemError):
            linalg.solve(a, b, P)
        return
    solution = linalg.solve(a, b, P)
    found = {tuple(int(t) for t in (solution.particular + k) % P) for k in solution.kernel.elements(64)}
    assert found == expected


@given(subspaces(4))
def test_meet_with_full_and_zero(u):
    assert linalg.meet(u, Subspace.full(4, P)) == u
    assert linalg.meet(u, Subspace.zero(4, P)).is_zero
    assert linalg.join(u, Subspace.zero(4, P)) == u
    assert linalg.join(u, Subspace.full(4, P)).is_full


@given(subspaces(4), subspaces(4))
def test_meet_matches_enumeration(u, v):
    assert elements(linalg.meet(u, v)) == elements(u) & elements(v)


@given(subspaces(5), subspaces(5))
def test_dimension_formula(u, v):
    assert linalg.join(u, v).dim + linalg.meet(u, v).dim == u.dim + v.dim


@settings(max_examples=50)
@given(subspaces(5), subspaces(5), subspaces(5))
def test_lattice_laws(u, v, w):
    meet, join = linalg.meet, linalg.join
    assert meet(u, v) == meet(v, u)
    assert join(u, v) == join(v, u)
    assert meet(meet(u, v), w) == meet(u, meet(v, w))
    assert join(join(u, v), w) == join(u, join(v, w))
    assert meet(u, u) == u
    assert join(u, u) == u
    assert meet(u, join(u, v)) == u
    assert join(u, meet(u, v)) == u


@given(matrices(max_rows=4, max_cols=4))
def test_preimage_trivial_cases(f):
    full = Subspace.full(f.shape[0], P)
    assert linalg.preimage(f, full).is_full
    w = Subspace.span([f[:, 0]], f.shape[0], P)
    assert linalg.preimage(linalg.identity(f.shape[0]), w) == w


@given(st.data())
def test_preimage_matches_enumeration(data):
    f = data.draw(matrices(max_rows=4, max_cols=4))
    w = data.draw(subspaces(f.shape[0]))
    pre = linalg.preimage(f, w)
    expected = {tuple(int(t) for t in x) for x in all_vectors(f.shape[1]) if w.contains((f @ x) % P)}
    assert elements(pre) == expected
    assert linalg.kernel(f, P).issubspace(pre)


@given(st.data())
def test_preimage_preserves_meets(data):
    f = data.draw(matrices(max_rows=4, max_cols=4))
    u = data.draw(subspaces(f.shape[0]))
    v = data.draw(subspaces(f.shape[0]))
    assert linalg.preimage(f, linalg.meet(u, v)) == linalg.meet(linalg.preimage(f, u), linalg.preimage(f, v))


@given(matrices())
def test_rank_nullity(m):
    assert linalg.kernel(m, P).dim + linalg.rank(m, P) == m.shape[1]
    assert linalg.image(m, P).dim == linalg.rank(m, P)


def test_subspace_equality_is_canonical():
    a = Subspace.span([[1, 1, 0], [0, 1, 1]], 3, P)
    b = Subspace.span([[1, 0, 1], [1, 1, 0]], 3, P)
    assert a == b
    assert str(a) == "<101, 011>"


def test_coordinates_round_trip():
    space = Subspace.span([[1, 1, 0], [0, 0, 1]], 3, P)
    coords = space.coordinates([1, 1, 1])
    assert ((coords @ space.basis) % P).tolist() == [1, 1, 1]
    with pytest.raises(GlwError):
        space.coordinates([1, 0, 0])


def test_enumeration_cap():
    assert len(list(linalg.enumerate_vectors(3, P, 8))) == 8
    with pytest.raises(CapExceededError):
        linalg.enumerate_vectors(4, P, 8)


def test_prime_check():
    assert linalg.check_prime(3) == 3
    with pytest.raises(GlwError):
        linalg.check_prime(4)
