"""Exact dense linear algebra over a prime field F_p.

Matrices are numpy int64 arrays with entries in [0, p). A matrix acts on
column vectors, so an (m x n) matrix maps F_p^n to F_p^m. Subspaces are
stored by their reduced row echelon basis, which makes equality structural.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence, Tuple

import numpy as np

from glw.errors import CapExceededError, GlwError, InconsistentSystemError

Matrix = np.ndarray
Vector = Tuple[int, ...]


@lru_cache(maxsize=None)
def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p ** 0.5) + 1))


def check_prime(p: int) -> int:
    if not is_prime(p):
        raise GlwError(f"field characteristic {p} is not prime")
    return p


def as_matrix(entries, p: int, rows: Optional[int] = None, cols: Optional[int] = None) -> Matrix:
    """Build a reduced matrix; ``rows``/``cols`` fix the shape of empty input."""
    mat = np.array(entries, dtype=np.int64)
    if mat.size == 0 and rows is not None and cols is not None:
        return np.zeros((rows, cols), dtype=np.int64)
    if mat.ndim == 1 and rows is not None and cols is not None:
        mat = mat.reshape(rows, cols)
    if mat.ndim != 2:
        raise GlwError(f"expected a 2-dimensional matrix, got shape {mat.shape}")
    if rows is not None and cols is not None and mat.shape != (rows, cols):
        raise GlwError(f"expected a {rows}x{cols} matrix, got {mat.shape[0]}x{mat.shape[1]}")
    return mat % p


def zeros(rows: int, cols: int) -> Matrix:
    return np.zeros((rows, cols), dtype=np.int64)


def identity(n: int) -> Matrix:
    return np.eye(n, dtype=np.int64)


def matmul(a: Matrix, b: Matrix, p: int) -> Matrix:
    return (a @ b) % p


def is_zero(m: Matrix) -> bool:
    return not np.any(m)


@dataclass(frozen=True)
class RowReduceResult:
    matrix: Matrix
    rank: int
    pivots: Tuple[int, ...]


def row_reduce(m: Matrix, p: int) -> RowReduceResult:
    """Full Gauss-Jordan elimination, keeping zero rows at the bottom."""
    mat = np.array(m, dtype=np.int64) % p
    rows, cols = mat.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nonzero = np.nonzero(mat[r:, c])[0]
        if nonzero.size == 0:
            continue
        pivot_row = r + int(nonzero[0])
        if pivot_row != r:
            mat[[r, pivot_row]] = mat[[pivot_row, r]]
        inv = pow(int(mat[r, c]), -1, p)
        mat[r] = (mat[r] * inv) % p
        factors = mat[:, c].copy()
        factors[r] = 0
        if np.any(factors):
            mat = (mat - np.outer(factors, mat[r])) % p
        pivots.append(c)
        r += 1
    return RowReduceResult(matrix=mat, rank=r, pivots=tuple(pivots))


def rref(m: Matrix, p: int) -> Tuple[Matrix, int]:
    """Reduced row echelon form without zero rows, and the rank."""
    reduced = row_reduce(m, p)
    return reduced.matrix[: reduced.rank].copy(), reduced.rank


def rank(m: Matrix, p: int) -> int:
    if m.size == 0:
        return 0
    return row_reduce(m, p).rank


def nullspace(m: Matrix, p: int) -> Matrix:
    """Rows form a basis of {x : m x = 0}."""
    rows, cols = m.shape
    if rows == 0:
        return identity(cols)
    reduced = row_reduce(m, p)
    pivot_set = set(reduced.pivots)
    basis = []
    for free in range(cols):
        if free in pivot_set:
            continue
        vec = np.zeros(cols, dtype=np.int64)
        vec[free] = 1
        for row, col in enumerate(reduced.pivots):
            vec[col] = (-reduced.matrix[row, free]) % p
        basis.append(vec)
    if not basis:
        return zeros(0, cols)
    return np.vstack(basis)


@dataclass(frozen=True)
class Subspace:
    """A subspace of F_p^n held by its canonical RREF basis (one row per vector)."""

    p: int
    ambient_dim: int
    rows: Tuple[Vector, ...]

    @classmethod
    def span(cls, vectors: Iterable[Sequence[int]], ambient_dim: int, p: int) -> "Subspace":
        vecs = [list(v) for v in vectors]
        if not vecs or ambient_dim == 0:
            return cls(p=p, ambient_dim=ambient_dim, rows=())
        mat = as_matrix(vecs, p)
        if mat.shape[1] != ambient_dim:
            raise GlwError(f"vector length {mat.shape[1]} does not match ambient dimension {ambient_dim}")
        basis, _ = rref(mat, p)
        return cls(p=p, ambient_dim=ambient_dim, rows=tuple(tuple(int(x) for x in row) for row in basis))

    @classmethod
    def from_matrix(cls, mat: Matrix, p: int) -> "Subspace":
        """Row space of ``mat``."""
        return cls.span(list(mat), mat.shape[1], p)

    @classmethod
    def zero(cls, ambient_dim: int, p: int) -> "Subspace":
        return cls(p=p, ambient_dim=ambient_dim, rows=())

    @classmethod
    def full(cls, ambient_dim: int, p: int) -> "Subspace":
        return cls.from_matrix(identity(ambient_dim), p)

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def basis(self) -> Matrix:
        if not self.rows:
            return zeros(0, self.ambient_dim)
        return np.array(self.rows, dtype=np.int64)

    @property
    def pivots(self) -> Tuple[int, ...]:
        return tuple(next(i for i, x in enumerate(row) if x) for row in self.rows)

    @property
    def nonpivots(self) -> Tuple[int, ...]:
        piv = set(self.pivots)
        return tuple(i for i in range(self.ambient_dim) if i not in piv)

    @property
    def is_zero(self) -> bool:
        return not self.rows

    @property
    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def reduce(self, v: Sequence[int]) -> np.ndarray:
        """Eliminate the pivot coordinates of ``v``; zero iff ``v`` lies in the subspace."""
        vec = np.array(v, dtype=np.int64) % self.p
        if not self.rows:
            return vec
        return (vec - self.basis.T @ vec[list(self.pivots)]) % self.p

    def contains(self, v: Sequence[int]) -> bool:
        return not np.any(self.reduce(v))

    def coordinates(self, v: Sequence[int]) -> np.ndarray:
        """Coordinates of a member ``v`` in the RREF basis."""
        vec = np.array(v, dtype=np.int64) % self.p
        if not self.contains(vec):
            raise GlwError("vector is not in the subspace")
        return vec[list(self.pivots)] if self.rows else np.zeros(0, dtype=np.int64)

    def coordinate_matrix(self) -> Matrix:
        """(dim x ambient) matrix selecting pivot entries; a left inverse of ``basis.T`` on the subspace."""
        sel = zeros(self.dim, self.ambient_dim)
        for i, c in enumerate(self.pivots):
            sel[i, c] = 1
        return sel

    def issubspace(self, other: "Subspace") -> bool:
        return all(other.contains(row) for row in self.rows)

    def elements(self, cap: int) -> Iterator[np.ndarray]:
        """Every vector of the subspace, ordered by coordinate tuple."""
        for coords in enumerate_vectors(self.dim, self.p, cap):
            yield (np.array(coords, dtype=np.int64) @ self.basis) % self.p if self.rows else np.zeros(
                self.ambient_dim, dtype=np.int64
            )

    def sort_key(self) -> Tuple[int, Tuple[Vector, ...]]:
        return self.dim, self.rows

    def __str__(self) -> str:
        return "<" + ", ".join("".join(str(x) for x in row) for row in self.rows) + ">"


def _check_same_ambient(u: Subspace, v: Subspace) -> None:
    if u.ambient_dim != v.ambient_dim or u.p != v.p:
        raise GlwError("subspaces live in different ambient spaces")


def join(u: Subspace, v: Subspace) -> Subspace:
    _check_same_ambient(u, v)
    return Subspace.span(list(u.rows) + list(v.rows), u.ambient_dim, u.p)


def meet(u: Subspace, v: Subspace) -> Subspace:
    _check_same_ambient(u, v)
    if u.is_zero or v.is_zero:
        return Subspace.zero(u.ambient_dim, u.p)
    # a U = b V  <=>  [U^T | -V^T] (a, b) = 0
    stacked = np.hstack([u.basis.T, (-v.basis.T) % u.p]) % u.p
    null = nullspace(stacked, u.p)
    if null.shape[0] == 0:
        return Subspace.zero(u.ambient_dim, u.p)
    return Subspace.from_matrix(matmul(null[:, : u.dim], u.basis, u.p), u.p)


def kernel(f: Matrix, p: int) -> Subspace:
    return Subspace.from_matrix(nullspace(f, p), p) if f.shape[1] else Subspace.zero(0, p)


def image(f: Matrix, p: int, source: Optional[Subspace] = None) -> Subspace:
    """Image of ``f``, or of ``f`` restricted to ``source``."""
    if source is None:
        return Subspace.from_matrix(f.T % p, p) if f.shape[1] else Subspace.zero(f.shape[0], p)
    if source.is_zero:
        return Subspace.zero(f.shape[0], p)
    return Subspace.from_matrix(matmul(f, source.basis.T, p).T, p)


def preimage(f: Matrix, w: Subspace) -> Subspace:
    """{x : f x in W}."""
    p = w.p
    if f.shape[0] != w.ambient_dim:
        raise GlwError(f"map with {f.shape[0]} rows cannot land in a space of dimension {w.ambient_dim}")
    n = f.shape[1]
    if n == 0:
        return Subspace.zero(0, p)
    if w.is_zero:
        return kernel(f, p)
    stacked = np.hstack([f, (-w.basis.T) % p]) % p
    null = nullspace(stacked, p)
    return Subspace.from_matrix(null[:, :n], p)


@dataclass(frozen=True)
class Solution:
    """Solution set of a x = b: ``particular`` plus anything in ``kernel``."""

    particular: Matrix
    kernel: Subspace


def solve(a: Matrix, b: Matrix, p: int) -> Solution:
    """Solve a x = b for a matrix or column-vector right-hand side."""
    vector_rhs = b.ndim == 1
    rhs = b.reshape(-1, 1) if vector_rhs else b
    if a.shape[0] != rhs.shape[0]:
        raise GlwError(f"system has {a.shape[0]} equations but right-hand side has {rhs.shape[0]} rows")
    n = a.shape[1]
    reduced = row_reduce(np.hstack([a, rhs]) % p, p)
    if any(col >= n for col in reduced.pivots):
        raise InconsistentSystemError("linear system is inconsistent")
    x = zeros(n, rhs.shape[1])
    for row, col in enumerate(reduced.pivots):
        x[col] = reduced.matrix[row, n:]
    ker = kernel(a, p) if n else Subspace.zero(0, p)
    return Solution(particular=x.reshape(-1) if vector_rhs else x, kernel=ker)


def enumerate_vectors(n: int, p: int, cap: int) -> Iterator[Vector]:
    """All of F_p^n in lexicographic order."""
    if p ** n > cap:
        raise CapExceededError(f"enumerating {p}^{n} vectors exceeds the cap of {cap}")
    return itertools.product(range(p), repeat=n)
