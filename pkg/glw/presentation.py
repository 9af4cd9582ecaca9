"""Quiver-with-relations presentations and the finite K-linear categories they define.

A path is a tuple of arrow names in application order: ``("a2", "b2")`` means
a2 first, then b2, and is written ``b2.a2`` in text (right-most applied first).
Composition follows the same convention: ``compose(cat, g, f)`` is g after f.
"""
from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from core import config
from glw.errors import NotComposableError, PresentationError
from glw.linalg import Subspace, enumerate_vectors, is_prime

logger = logging.getLogger(__name__)

Path = Tuple[str, ...]
IDENTITY_WORD = "id"


class ArrowSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    source: str
    target: str


class Term(BaseModel):
    model_config = ConfigDict(frozen=True)

    coefficient: int
    path: Path  # application order; empty only for identities in morphism expressions


class Relation(BaseModel):
    model_config = ConfigDict(frozen=True)

    terms: Tuple[Term, ...]


class QuiverPresentation(BaseModel):
    model_config = ConfigDict(frozen=True)

    prime: int
    nilpotency: int
    objects: Tuple[str, ...]
    arrows: Tuple[ArrowSpec, ...]
    relations: Tuple[Relation, ...]

    def arrow(self, name: str) -> ArrowSpec:
        for a in self.arrows:
            if a.name == name:
                return a
        raise PresentationError(f"unknown arrow '{name}'")


def path_label(path: Path) -> str:
    return ".".join(reversed(path)) if path else "1"


def term_label(term: Term) -> str:
    word = path_label(term.path) if term.path else IDENTITY_WORD
    return word if term.coefficient == 1 else f"{term.coefficient}*{word}"


def relation_label(relation: Relation) -> str:
    return " + ".join(term_label(t) for t in relation.terms)


# ---------------------------------------------------------------------------
# .gcat parsing
# ---------------------------------------------------------------------------

_IDENT = r"[A-Za-z_][\w']*"
_TERM = re.compile(
    rf"\s*(?P<sign>[+-])?\s*(?:(?P<coef>\d+)\s*\*\s*)?(?P<path>{_IDENT}(?:\s*\.\s*{_IDENT})*)\s*"
)
_ARROW = re.compile(rf"^arrow\s+(?P<name>{_IDENT})\s*:\s*(?P<src>{_IDENT})\s*->\s*(?P<dst>{_IDENT})\s*$")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def parse_terms(text: str, p: int, line: Optional[int] = None, offset: int = 0) -> List[Term]:
    """Parse ``c1*path1 + c2*path2 ...``; ``id`` stands for an identity."""
    terms: List[Term] = []
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise PresentationError(f"cannot parse term '{text[pos:].strip()}'", line, offset + pos + 1)
        if terms and m.group("sign") is None:
            raise PresentationError("expected '+' or '-' between terms", line, offset + pos + 1)
        coef = int(m.group("coef") or 1)
        if m.group("sign") == "-":
            coef = -coef
        words = [w.strip() for w in m.group("path").split(".")]
        path: Path = () if words == [IDENTITY_WORD] else tuple(reversed(words))
        if IDENTITY_WORD in path:
            raise PresentationError("'id' cannot appear inside a longer path", line, offset + pos + 1)
        if coef % p:
            terms.append(Term(coefficient=coef % p, path=path))
        pos = m.end()
    return terms


def _path_ends(path: Path, arrows: Dict[str, ArrowSpec], line: int, column: int) -> Tuple[str, str]:
    for name in path:
        if name not in arrows:
            raise PresentationError(f"unknown arrow '{name}'", line, column)
    for first, second in zip(path, path[1:]):
        if arrows[first].target != arrows[second].source:
            raise PresentationError(
                f"path {path_label(path)} is not composable at {first} -> {second}", line, column
            )
    return arrows[path[0]].source, arrows[path[-1]].target


def parse_category(text: str) -> QuiverPresentation:
    """Parse the ``.gcat`` line format into a validated presentation."""
    prime: Optional[int] = None
    nilpotency: Optional[int] = None
    objects: List[str] = []
    arrows: Dict[str, ArrowSpec] = {}
    pending_relations: List[Tuple[int, int, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        column = len(line) - len(line.lstrip()) + 1
        stripped = line.strip()
        keyword = stripped.split()[0]
        rest = stripped[len(keyword):].strip()
        if keyword == "field":
            if not rest.isdigit():
                raise PresentationError(f"field expects an integer, got '{rest}'", lineno, column)
            prime = int(rest)
            if not is_prime(prime):
                raise PresentationError(f"field characteristic {prime} is not prime", lineno, column)
        elif keyword == "nilpotency":
            if not rest.lstrip("-").isdigit():
                raise PresentationError(f"nilpotency expects an integer, got '{rest}'", lineno, column)
            nilpotency = int(rest)
            if nilpotency < 1:
                raise PresentationError("nilpotency bound must be at least 1", lineno, column)
        elif keyword == "object":
            names = rest.split()
            if not names:
                raise PresentationError("object expects an id", lineno, column)
            for name in names:
                if not re.fullmatch(_IDENT, name) or name == IDENTITY_WORD:
                    raise PresentationError(f"invalid object id '{name}'", lineno, column)
                if name in objects:
                    raise PresentationError(f"duplicate object '{name}'", lineno, column)
                objects.append(name)
        elif keyword == "arrow":
            m = _ARROW.match(stripped)
            if m is None:
                raise PresentationError("expected 'arrow <id> : <src> -> <dst>'", lineno, column)
            name = m.group("name")
            if name in arrows or name == IDENTITY_WORD:
                raise PresentationError(f"duplicate or reserved arrow id '{name}'", lineno, column)
            for end in (m.group("src"), m.group("dst")):
                if end not in objects:
                    raise PresentationError(f"unknown object '{end}'", lineno, column)
            arrows[name] = ArrowSpec(name=name, source=m.group("src"), target=m.group("dst"))
        elif keyword == "relation":
            pending_relations.append((lineno, column + len("relation") + 1, rest))
        else:
            raise PresentationError(f"unknown keyword '{keyword}'", lineno, column)

    if not objects:
        raise PresentationError("no objects")
    if nilpotency is None:
        raise PresentationError("nilpotency bound is required")
    p = prime if prime is not None else config.GLW_PRIME

    relations: List[Relation] = []
    for lineno, column, body in pending_relations:
        lhs, eq, rhs = body.partition("=")
        if not eq or rhs.strip() != "0":
            raise PresentationError("relation must have the form '<combination> = 0'", lineno, column)
        terms = parse_terms(lhs, p, lineno, column)
        if not terms:
            raise PresentationError("relation is trivially zero", lineno, column)
        ends = set()
        for term in terms:
            if not term.path:
                raise PresentationError("relations may not contain identities", lineno, column)
            ends.add(_path_ends(term.path, arrows, lineno, column))
        if len(ends) > 1:
            raise PresentationError("non-parallel relation", lineno, column)
        relations.append(Relation(terms=tuple(terms)))

    return QuiverPresentation(
        prime=p,
        nilpotency=nilpotency,
        objects=tuple(objects),
        arrows=tuple(arrows.values()),
        relations=tuple(relations),
    )


def format_category(q: QuiverPresentation) -> str:
    """Canonical ``.gcat`` text; parsing it returns an equal presentation."""
    lines = [f"field {q.prime}", f"nilpotency {q.nilpotency}"]
    lines += [f"object {o}" for o in q.objects]
    lines += [f"arrow {a.name} : {a.source} -> {a.target}" for a in q.arrows]
    lines += [f"relation {relation_label(r)} = 0" for r in q.relations]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Category construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Morphism:
    source: str
    target: str
    coords: Tuple[int, ...]

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)

    def is_zero(self) -> bool:
        return not any(self.coords)


@dataclass(frozen=True)
class _PathSpace:
    """Paths a -> b of length < N modulo the relation ideal."""

    paths: Tuple[Path, ...]  # column order: descending (length, path)
    ideal: Subspace
    basis_columns: Tuple[int, ...]  # columns surviving reduction, ascending path order

    def normal_form(self, vec: np.ndarray) -> np.ndarray:
        return self.ideal.reduce(vec)[list(self.basis_columns)]


@dataclass(frozen=True, eq=False)
class CategoryData:
    """Hom bases and bilinear composition tables of a finitely presented category."""

    presentation: QuiverPresentation
    spaces: Dict[Tuple[str, str], _PathSpace] = field(repr=False)
    tables: Dict[Tuple[str, str, str], np.ndarray] = field(repr=False)

    @property
    def p(self) -> int:
        return self.presentation.prime

    @property
    def objects(self) -> Tuple[str, ...]:
        return self.presentation.objects

    @property
    def arrows(self) -> Tuple[ArrowSpec, ...]:
        return self.presentation.arrows

    def basis(self, a: str, b: str) -> Tuple[Path, ...]:
        space = self._space(a, b)
        return tuple(space.paths[c] for c in space.basis_columns)

    def basis_labels(self, a: str, b: str) -> List[str]:
        return [path_label(path) for path in self.basis(a, b)]

    def dim(self, a: str, b: str) -> int:
        return len(self._space(a, b).basis_columns)

    def _space(self, a: str, b: str) -> _PathSpace:
        try:
            return self.spaces[(a, b)]
        except KeyError:
            raise PresentationError(f"unknown object pair ({a}, {b})") from None

    def reduce_path(self, a: str, b: str, path: Path) -> np.ndarray:
        """Coordinates of a path a -> b in the Hom(a, b) basis (zero once it reaches length N)."""
        space = self._space(a, b)
        vec = np.zeros(len(space.paths), dtype=np.int64)
        if len(path) < self.presentation.nilpotency:
            vec[space.paths.index(path)] = 1
        return space.normal_form(vec)

    def identity(self, a: str) -> Morphism:
        return Morphism(a, a, tuple(int(x) for x in self.reduce_path(a, a, ())))

    def arrow(self, name: str) -> Morphism:
        spec = self.presentation.arrow(name)
        coords = self.reduce_path(spec.source, spec.target, (name,))
        return Morphism(spec.source, spec.target, tuple(int(x) for x in coords))

    def morphism(self, source: str, target: str, terms: Sequence[Term]) -> Morphism:
        """The linear combination of paths ``terms`` as a morphism source -> target."""
        arrows = {a.name: a for a in self.arrows}
        vec = np.zeros(self.dim(source, target), dtype=np.int64)
        for term in terms:
            if term.path:
                ends = _path_ends(term.path, arrows, None, None)
            else:
                ends = (source, source)
            if ends != (source, target):
                raise PresentationError(
                    f"term {term_label(term)} is not a morphism {source} -> {target}"
                )
            vec = (vec + term.coefficient * self.reduce_path(source, target, term.path)) % self.p
        return Morphism(source, target, tuple(int(x) for x in vec))

    def table(self, a: str, b: str, c: str) -> np.ndarray:
        """T[k, i, j]: coefficient of basis k of Hom(a,c) in (basis i of Hom(b,c)) o (basis j of Hom(a,b))."""
        return self.tables[(a, b, c)]

    def compose_coords(self, a: str, b: str, c: str, g: np.ndarray, f: np.ndarray) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.table(a, b, c), g, f) % self.p

    def postcompose_matrix(self, g: Morphism, a: str) -> np.ndarray:
        """Matrix of Hom(a, g.source) -> Hom(a, g.target), f -> g o f."""
        return np.einsum("kij,i->kj", self.table(a, g.source, g.target), g.vector) % self.p

    def precompose_matrix(self, h: Morphism, x: str) -> np.ndarray:
        """Matrix of Hom(h.target, x) -> Hom(h.source, x), f -> f o h."""
        return np.einsum("kij,j->ki", self.table(h.source, h.target, x), h.vector) % self.p

    @cached_property
    def max_paths(self) -> Tuple[Path, ...]:
        """Every path of length exactly N."""
        return tuple(_paths_of_length(self.presentation, self.presentation.nilpotency))

    def hom_table(self) -> Dict[str, Dict[str, int]]:
        return {a: {b: self.dim(a, b) for b in self.objects} for a in self.objects}


def _paths_of_length(q: QuiverPresentation, length: int) -> List[Path]:
    out_arrows: Dict[str, List[ArrowSpec]] = {o: [] for o in q.objects}
    for a in q.arrows:
        out_arrows[a.source].append(a)
    frontier: List[Tuple[str, Path]] = [(o, ()) for o in q.objects]
    for _ in range(length):
        frontier = [(a.target, path + (a.name,)) for end, path in frontier for a in out_arrows[end]]
    return [path for _, path in frontier]


def _paths_by_pair(q: QuiverPresentation) -> Dict[Tuple[str, str], List[Path]]:
    """Paths of length < N grouped by (source, target); identities included."""
    out_arrows: Dict[str, List[ArrowSpec]] = {o: [] for o in q.objects}
    for a in q.arrows:
        out_arrows[a.source].append(a)
    by_pair: Dict[Tuple[str, str], List[Path]] = {(a, b): [] for a in q.objects for b in q.objects}
    for start in q.objects:
        frontier: List[Tuple[str, Path]] = [(start, ())]
        for _ in range(q.nilpotency):
            for end, path in frontier:
                by_pair[(start, end)].append(path)
            frontier = [(a.target, path + (a.name,)) for end, path in frontier for a in out_arrows[end]]
    return by_pair


def _path_key(path: Path) -> Tuple[int, Path]:
    return len(path), path


def build_category(q: QuiverPresentation) -> CategoryData:
    """Hom spaces are paths of length < N modulo the truncated two-sided relation ideal."""
    p, n = q.prime, q.nilpotency
    arrows = {a.name: a for a in q.arrows}
    by_pair = _paths_by_pair(q)

    columns: Dict[Tuple[str, str], Tuple[Path, ...]] = {
        pair: tuple(sorted(paths, key=_path_key, reverse=True)) for pair, paths in by_pair.items()
    }
    index = {pair: {path: i for i, path in enumerate(cols)} for pair, cols in columns.items()}

    generators: Dict[Tuple[str, str], List[np.ndarray]] = {pair: [] for pair in columns}
    for relation in q.relations:
        s, t = _path_ends(relation.terms[0].path, arrows, None, None)
        for a in q.objects:
            for w in by_pair[(a, s)]:
                for b in q.objects:
                    for u in by_pair[(t, b)]:
                        vec = np.zeros(len(columns[(a, b)]), dtype=np.int64)
                        for term in relation.terms:
                            full = w + term.path + u
                            if len(full) < n:
                                vec[index[(a, b)][full]] += term.coefficient
                        vec %= p
                        if np.any(vec):
                            generators[(a, b)].append(vec)

    spaces: Dict[Tuple[str, str], _PathSpace] = {}
    for pair, cols in columns.items():
        ideal = Subspace.span(generators[pair], len(cols), p)
        survivors = sorted(ideal.nonpivots, key=lambda c: _path_key(cols[c]))
        spaces[pair] = _PathSpace(paths=cols, ideal=ideal, basis_columns=tuple(survivors))

    tables: Dict[Tuple[str, str, str], np.ndarray] = {}
    for a, b, c in itertools.product(q.objects, repeat=3):
        sab, sbc, sac = spaces[(a, b)], spaces[(b, c)], spaces[(a, c)]
        table = np.zeros((len(sac.basis_columns), len(sbc.basis_columns), len(sab.basis_columns)), dtype=np.int64)
        for i, gi in enumerate(sbc.basis_columns):
            for j, fj in enumerate(sab.basis_columns):
                full = sab.paths[fj] + sbc.paths[gi]
                if len(full) < n:
                    vec = np.zeros(len(sac.paths), dtype=np.int64)
                    vec[index[(a, c)][full]] = 1
                    table[:, i, j] = sac.normal_form(vec)
        tables[(a, b, c)] = table

    cat = CategoryData(presentation=q, spaces=spaces, tables=tables)
    logger.debug("built category with Hom dimensions %s", cat.hom_table())
    return cat


def load_category(path: str) -> CategoryData:
    with open(path, "r", encoding="utf-8") as fh:
        return build_category(parse_category(fh.read()))


def enumerate_morphisms(cat: CategoryData, a: str, b: str, cap: Optional[int] = None) -> List[Morphism]:
    """Every morphism a -> b, in lexicographic coordinate order."""
    limit = config.GLW_CAP if cap is None else cap
    return [Morphism(a, b, coords) for coords in enumerate_vectors(cat.dim(a, b), cat.p, limit)]


def compose(cat: CategoryData, g: Morphism, f: Morphism) -> Morphism:
    """g o f (f applied first)."""
    if f.target != g.source:
        raise NotComposableError(f"cannot compose {f.source}->{f.target} with {g.source}->{g.target}")
    coords = cat.compose_coords(f.source, f.target, g.target, g.vector, f.vector)
    return Morphism(f.source, g.target, tuple(int(x) for x in coords))


def morphism_label(cat: CategoryData, m: Morphism) -> str:
    parts = []
    for coef, path in zip(m.coords, cat.basis(m.source, m.target)):
        if coef:
            word = path_label(path)
            parts.append(word if coef == 1 else f"{coef}*{word}")
    return " + ".join(parts) if parts else "0"


def parse_morphism(cat: CategoryData, source: str, text: str) -> Morphism:
    """Parse a path combination such as ``b2.a2 + 2*a1.b1`` as a morphism out of ``source``."""
    terms = parse_terms(text, cat.p)
    arrows = {a.name: a for a in cat.arrows}
    targets = set()
    for term in terms:
        if term.path:
            start, end = _path_ends(term.path, arrows, None, None)
            if start != source:
                raise PresentationError(f"path {path_label(term.path)} does not start at {source}")
            targets.add(end)
        else:
            targets.add(source)
    if len(targets) > 1:
        raise PresentationError(f"'{text}' mixes morphisms with different targets")
    if not targets:
        raise PresentationError(f"'{text}' has no nonzero term")
    return cat.morphism(source, targets.pop(), terms)
