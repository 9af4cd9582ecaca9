"""C-modules: functors from a presented category to finite-dimensional F_p-spaces.

A module stores one dimension per object and one matrix per arrow, with
columns indexed by the source fiber. Path evaluation multiplies along the
path, so M(g o f) = M(g) @ M(f).
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core import config
from glw import linalg
from glw.errors import CapExceededError, GlwError, ModuleError
from glw.linalg import Subspace
from glw.presentation import CategoryData, Morphism, Path, path_label, relation_label

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CModule:
    category: CategoryData
    dims: Dict[str, int]
    action: Dict[str, np.ndarray] = field(repr=False)

    @property
    def p(self) -> int:
        return self.category.p

    @property
    def objects(self) -> Tuple[str, ...]:
        return self.category.objects

    def dim(self, obj: str) -> int:
        return self.dims[obj]

    def dim_vector(self) -> Tuple[int, ...]:
        return tuple(self.dims[o] for o in self.objects)

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    def is_zero(self) -> bool:
        return self.total_dim == 0

    def evaluate_path(self, source: str, path: Path) -> np.ndarray:
        mat = linalg.identity(self.dims[source])
        for name in path:
            mat = linalg.matmul(self.action[name], mat, self.p)
        return mat

    @cached_property
    def _basis_images(self) -> Dict[Tuple[str, str], List[np.ndarray]]:
        return {}

    def basis_images(self, a: str, b: str) -> List[np.ndarray]:
        """M applied to each basis morphism of Hom(a, b)."""
        key = (a, b)
        if key not in self._basis_images:
            self._basis_images[key] = [self.evaluate_path(a, path) for path in self.category.basis(a, b)]
        return self._basis_images[key]

    def evaluate(self, h: Morphism) -> np.ndarray:
        out = linalg.zeros(self.dims[h.target], self.dims[h.source])
        for coef, mat in zip(h.coords, self.basis_images(h.source, h.target)):
            if coef:
                out = out + coef * mat
        return out % self.p

    def evaluation_map(self, c: str, x: np.ndarray, target: str) -> np.ndarray:
        """Matrix of Hom(c, target) -> M(target), h -> M(h) x."""
        images = self.basis_images(c, target)
        if not images:
            return linalg.zeros(self.dims[target], 0)
        return np.stack([linalg.matmul(mat, x, self.p) for mat in images], axis=1)


def validate_module(module: CModule) -> CModule:
    cat = module.category
    for arrow in cat.arrows:
        shape = (module.dims[arrow.target], module.dims[arrow.source])
        if module.action[arrow.name].shape != shape:
            raise ModuleError(
                f"map {arrow.name} has shape {module.action[arrow.name].shape}, expected {shape}"
            )
    for relation in cat.presentation.relations:
        source = cat.presentation.arrow(relation.terms[0].path[0]).source
        total = None
        for term in relation.terms:
            value = term.coefficient * module.evaluate_path(source, term.path)
            total = value if total is None else total + value
        if np.any(total % module.p):
            raise ModuleError(f"relation {relation_label(relation)} violated")
    for path in cat.max_paths:
        source = cat.presentation.arrow(path[0]).source
        if np.any(module.evaluate_path(source, path)):
            raise ModuleError(f"path {path_label(path)} of nilpotency length does not vanish")
    return module


def make_module(
    cat: CategoryData,
    dims: Mapping[str, int],
    action: Mapping[str, object],
    validate: bool = True,
) -> CModule:
    """Normalize shapes (missing objects have dimension 0, missing maps are zero) and validate."""
    for obj in dims:
        if obj not in cat.objects:
            raise ModuleError(f"unknown object '{obj}'")
    full_dims = {o: int(dims.get(o, 0)) for o in cat.objects}
    matrices: Dict[str, np.ndarray] = {}
    arrow_names = {a.name for a in cat.arrows}
    for name in action:
        if name not in arrow_names:
            raise ModuleError(f"unknown arrow '{name}'")
    for arrow in cat.arrows:
        rows, cols = full_dims[arrow.target], full_dims[arrow.source]
        if arrow.name in action:
            try:
                matrices[arrow.name] = linalg.as_matrix(action[arrow.name], cat.p, rows, cols)
            except GlwError as exc:
                raise ModuleError(f"map {arrow.name}: {exc}") from None
        else:
            matrices[arrow.name] = linalg.zeros(rows, cols)
    module = CModule(category=cat, dims=full_dims, action=matrices)
    return validate_module(module) if validate else module


def zero_module(cat: CategoryData) -> CModule:
    return make_module(cat, {}, {}, validate=False)


_SPACE = re.compile(r"^space\s+(?P<obj>\S+)\s+dim\s+(?P<dim>\d+)$")
_MAP = re.compile(r"^map\s+(?P<arrow>\S+)\s*=\s*(?P<matrix>.+)$")


def parse_module(text: str, cat: CategoryData) -> CModule:
    """Parse the ``.gmod`` format and validate the result."""
    dims: Dict[str, int] = {}
    action: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("module over"):
            continue
        m = _SPACE.match(line)
        if m:
            if m.group("obj") not in cat.objects:
                raise ModuleError(f"unknown object '{m.group('obj')}'", lineno)
            dims[m.group("obj")] = int(m.group("dim"))
            continue
        m = _MAP.match(line)
        if m:
            try:
                action[m.group("arrow")] = json.loads(m.group("matrix"))
            except json.JSONDecodeError:
                raise ModuleError(f"cannot parse matrix '{m.group('matrix')}'", lineno) from None
            continue
        raise ModuleError(f"cannot parse '{line}'", lineno)
    return make_module(cat, dims, action)


def load_module(path: str, cat: CategoryData) -> CModule:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_module(fh.read(), cat)


def format_module(module: CModule, catfile: str = "category.gcat") -> str:
    lines = [f"module over {catfile}"]
    lines += [f"space {o} dim {module.dims[o]}" for o in module.objects if module.dims[o]]
    for arrow in module.category.arrows:
        mat = module.action[arrow.name]
        if mat.size and np.any(mat):
            lines.append(f"map {arrow.name} = {json.dumps(mat.tolist())}")
    return "\n".join(lines) + "\n"


@lru_cache(maxsize=None)
def representable(cat: CategoryData, c: str) -> CModule:
    """Hom(c, -) with arrows acting by postcomposition."""
    if c not in cat.objects:
        raise ModuleError(f"unknown object '{c}'")
    dims = {x: cat.dim(c, x) for x in cat.objects}
    action = {a.name: cat.postcompose_matrix(cat.arrow(a.name), c) for a in cat.arrows}
    return make_module(cat, dims, action, validate=False)


def direct_sum(modules: Sequence[CModule]) -> CModule:
    cat = modules[0].category
    dims = {o: sum(m.dims[o] for m in modules) for o in cat.objects}
    action = {}
    for arrow in cat.arrows:
        mat = linalg.zeros(dims[arrow.target], dims[arrow.source])
        r = c = 0
        for m in modules:
            block = m.action[arrow.name]
            mat[r : r + block.shape[0], c : c + block.shape[1]] = block
            r += block.shape[0]
            c += block.shape[1]
        action[arrow.name] = mat
    return make_module(cat, dims, action, validate=False)


# ---------------------------------------------------------------------------
# Natural transformations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NatTransform:
    source: CModule
    target: CModule
    components: Dict[str, np.ndarray] = field(repr=False)

    @property
    def p(self) -> int:
        return self.source.p

    def at(self, obj: str) -> np.ndarray:
        return self.components[obj]

    def is_natural(self) -> bool:
        cat = self.source.category
        for arrow in cat.arrows:
            left = linalg.matmul(self.components[arrow.target], self.source.action[arrow.name], self.p)
            right = linalg.matmul(self.target.action[arrow.name], self.components[arrow.source], self.p)
            if not np.array_equal(left, right):
                return False
        return True

    def is_zero(self) -> bool:
        return all(not np.any(m) for m in self.components.values())

    def equals(self, other: "NatTransform") -> bool:
        return all(np.array_equal(self.components[o], other.components[o]) for o in self.components)

    def is_injective(self) -> bool:
        return all(linalg.rank(m, self.p) == m.shape[1] for m in self.components.values())

    def is_surjective(self) -> bool:
        return all(linalg.rank(m, self.p) == m.shape[0] for m in self.components.values())

    def is_iso(self) -> bool:
        return self.is_injective() and self.is_surjective()


def compose_nat(g: NatTransform, f: NatTransform) -> NatTransform:
    """g o f."""
    return NatTransform(
        source=f.source,
        target=g.target,
        components={o: linalg.matmul(g.components[o], f.components[o], f.p) for o in f.components},
    )


def identity_nat(module: CModule) -> NatTransform:
    return NatTransform(module, module, {o: linalg.identity(module.dims[o]) for o in module.objects})


def zero_nat(source: CModule, target: CModule) -> NatTransform:
    return NatTransform(
        source, target, {o: linalg.zeros(target.dims[o], source.dims[o]) for o in source.objects}
    )


def yoneda_element(module: CModule, c: str, x: Sequence[int]) -> NatTransform:
    """The transformation Hom(c, -) -> M sending h to M(h) x."""
    vec = np.array(x, dtype=np.int64) % module.p
    if vec.shape != (module.dims[c],):
        raise ModuleError(f"element has length {vec.shape[0]}, expected dim M({c}) = {module.dims[c]}")
    rep = representable(module.category, c)
    components = {X: module.evaluation_map(c, vec, X) for X in module.objects}
    return NatTransform(rep, module, components)


@dataclass(frozen=True, eq=False)
class NatSpace:
    """The space Nat(source, target), as an RREF basis over the stacked component entries."""

    source: CModule
    target: CModule
    basis: np.ndarray = field(repr=False)
    offsets: Dict[str, int] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def pivots(self) -> Tuple[int, ...]:
        return Subspace.from_matrix(self.basis, self.source.p).pivots if self.dim else ()

    def vectorize(self, eta: NatTransform) -> np.ndarray:
        return np.concatenate(
            [eta.components[o].reshape(-1) for o in self.source.objects] or [np.zeros(0, dtype=np.int64)]
        ).astype(np.int64)

    def element(self, coeffs: Sequence[int]) -> NatTransform:
        vec = (np.array(coeffs, dtype=np.int64) @ self.basis) % self.source.p if self.dim else np.zeros(
            self.basis.shape[1], dtype=np.int64
        )
        components = {}
        for o in self.source.objects:
            rows, cols = self.target.dims[o], self.source.dims[o]
            start = self.offsets[o]
            components[o] = vec[start : start + rows * cols].reshape(rows, cols)
        return NatTransform(self.source, self.target, components)

    def transforms(self) -> List[NatTransform]:
        return [self.element(row) for row in linalg.identity(self.dim)]

    def coordinates(self, eta: NatTransform) -> np.ndarray:
        vec = self.vectorize(eta) % self.source.p
        if not self.dim:
            if np.any(vec):
                raise GlwError("transformation is not in the space")
            return np.zeros(0, dtype=np.int64)
        coords = vec[list(self.pivots)]
        if not np.array_equal((coords @ self.basis) % self.source.p, vec):
            raise GlwError("transformation is not natural")
        return coords


def nat_space(source: CModule, target: CModule) -> NatSpace:
    """Solve eta_D M(a) = N(a) eta_C over the generating arrows."""
    if source.category is not target.category:
        raise GlwError("modules live over different categories")
    cat, p = source.category, source.p
    offsets: Dict[str, int] = {}
    size = 0
    for o in cat.objects:
        offsets[o] = size
        size += target.dims[o] * source.dims[o]
    blocks = []
    for arrow in cat.arrows:
        c, d = arrow.source, arrow.target
        m_a, n_a = source.action[arrow.name], target.action[arrow.name]
        rows = target.dims[d] * source.dims[c]
        if rows == 0:
            continue
        eq = linalg.zeros(rows, size)
        if source.dims[d]:
            block = np.kron(linalg.identity(target.dims[d]), m_a.T)
            eq[:, offsets[d] : offsets[d] + block.shape[1]] += block
        if target.dims[c]:
            block = np.kron(n_a, linalg.identity(source.dims[c]))
            eq[:, offsets[c] : offsets[c] + block.shape[1]] -= block
        blocks.append(eq % p)
    if size == 0:
        basis = linalg.zeros(0, 0)
    elif blocks:
        null = linalg.nullspace(np.vstack(blocks), p)
        basis = linalg.rref(null, p)[0] if null.shape[0] else null
    else:
        basis = linalg.identity(size)
    return NatSpace(source=source, target=target, basis=basis, offsets=offsets)


def nat_hom(source: CModule, target: CModule) -> List[NatTransform]:
    return nat_space(source, target).transforms()


# ---------------------------------------------------------------------------
# Subfunctors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Subfunctor:
    parent: CModule
    spaces: Tuple[Subspace, ...]  # aligned with the category's objects

    def at(self, obj: str) -> Subspace:
        return self.spaces[self.parent.objects.index(obj)]

    def dim_vector(self) -> Tuple[int, ...]:
        return tuple(s.dim for s in self.spaces)

    @property
    def total_dim(self) -> int:
        return sum(s.dim for s in self.spaces)

    def sort_key(self):
        return self.total_dim, tuple(s.rows for s in self.spaces)

    def is_closed(self) -> bool:
        module = self.parent
        for arrow in module.category.arrows:
            src, dst = self.at(arrow.source), self.at(arrow.target)
            for row in src.rows:
                if not dst.contains(linalg.matmul(module.action[arrow.name], np.array(row), module.p)):
                    return False
        return True

    def issubfunctor(self, other: "Subfunctor") -> bool:
        return all(a.issubspace(b) for a, b in zip(self.spaces, other.spaces))

    def is_full(self) -> bool:
        return all(s.is_full for s in self.spaces)

    def is_zero(self) -> bool:
        return all(s.is_zero for s in self.spaces)

    @cached_property
    def _module(self) -> Tuple[CModule, NatTransform]:
        module = self.parent
        dims = {o: self.at(o).dim for o in module.objects}
        action = {}
        for arrow in module.category.arrows:
            src, dst = self.at(arrow.source), self.at(arrow.target)
            moved = linalg.matmul(module.action[arrow.name], src.basis.T, module.p)
            action[arrow.name] = linalg.matmul(dst.coordinate_matrix(), moved, module.p)
        sub = make_module(module.category, dims, action, validate=False)
        inclusion = NatTransform(sub, module, {o: self.at(o).basis.T.copy() for o in module.objects})
        return sub, inclusion

    def as_module(self) -> Tuple[CModule, NatTransform]:
        """The subfunctor as a module in its RREF bases, with its inclusion into the parent."""
        return self._module


def full_subfunctor(module: CModule) -> Subfunctor:
    return Subfunctor(module, tuple(Subspace.full(module.dims[o], module.p) for o in module.objects))


def zero_subfunctor(module: CModule) -> Subfunctor:
    return Subfunctor(module, tuple(Subspace.zero(module.dims[o], module.p) for o in module.objects))


def _checked(sub: Subfunctor) -> Subfunctor:
    if not sub.is_closed():
        raise GlwError("constructed family is not closed under the module action")
    return sub


def kernel(f: NatTransform) -> Subfunctor:
    return _checked(
        Subfunctor(f.source, tuple(linalg.kernel(f.components[o], f.p) if f.source.dims[o] else
                                   Subspace.zero(0, f.p) for o in f.source.objects))
    )


def image(f: NatTransform) -> Subfunctor:
    return _checked(Subfunctor(f.target, tuple(linalg.image(f.components[o], f.p) for o in f.source.objects)))


def sub_generated(module: CModule, elements: Iterable[Tuple[str, Sequence[int]]]) -> Subfunctor:
    """Smallest subfunctor containing the given (object, vector) elements."""
    vectors: Dict[str, List[Sequence[int]]] = {o: [] for o in module.objects}
    for obj, vec in elements:
        if len(vec) != module.dims[obj]:
            raise ModuleError(f"element of length {len(vec)} does not lie in M({obj})")
        vectors[obj].append(vec)
    spaces = {o: Subspace.span(vectors[o], module.dims[o], module.p) for o in module.objects}
    changed = True
    while changed:
        changed = False
        for arrow in module.category.arrows:
            pushed = linalg.image(module.action[arrow.name], module.p, spaces[arrow.source])
            grown = linalg.join(spaces[arrow.target], pushed)
            if grown != spaces[arrow.target]:
                spaces[arrow.target] = grown
                changed = True
    return _checked(Subfunctor(module, tuple(spaces[o] for o in module.objects)))


def sub_meet(s: Subfunctor, t: Subfunctor) -> Subfunctor:
    if s.parent is not t.parent:
        raise GlwError("subfunctors of different modules")
    return _checked(Subfunctor(s.parent, tuple(linalg.meet(a, b) for a, b in zip(s.spaces, t.spaces))))


def sub_join(s: Subfunctor, t: Subfunctor) -> Subfunctor:
    if s.parent is not t.parent:
        raise GlwError("subfunctors of different modules")
    return _checked(Subfunctor(s.parent, tuple(linalg.join(a, b) for a, b in zip(s.spaces, t.spaces))))


def quotient(module: CModule, sub: Subfunctor) -> Tuple[CModule, NatTransform]:
    """M / S in the coordinates left free by the RREF basis of each S(X), with the projection."""
    p = module.p
    projections: Dict[str, np.ndarray] = {}
    sections = quotient_section(module, sub)
    for o in module.objects:
        space, n = sub.at(o), module.dims[o]
        free = list(space.nonpivots)
        reducer = (linalg.identity(n) - space.basis.T @ space.coordinate_matrix()) % p
        projections[o] = reducer[free, :] if free else linalg.zeros(0, n)
    dims = {o: projections[o].shape[0] for o in module.objects}
    action = {}
    for arrow in module.category.arrows:
        moved = linalg.matmul(module.action[arrow.name], sections[arrow.source], p)
        action[arrow.name] = linalg.matmul(projections[arrow.target], moved, p)
    quot = make_module(module.category, dims, action, validate=False)
    return quot, NatTransform(module, quot, projections)


def quotient_section(module: CModule, sub: Subfunctor) -> Dict[str, np.ndarray]:
    """Per-object linear sections of the projection built by ``quotient``."""
    sections = {}
    for o in module.objects:
        free = list(sub.at(o).nonpivots)
        section = linalg.zeros(module.dims[o], len(free))
        for i, c in enumerate(free):
            section[c, i] = 1
        sections[o] = section
    return sections


def cokernel(f: NatTransform) -> Tuple[CModule, NatTransform]:
    return quotient(f.target, image(f))


def submodule_lattice(
    module: CModule, cap: Optional[int] = None, lattice_cap: Optional[int] = None
) -> List[Subfunctor]:
    """Every subfunctor of ``module``: joins of cyclic subfunctors, canonically ordered."""
    cap = config.GLW_CAP if cap is None else cap
    lattice_cap = config.GLW_LATTICE_CAP if lattice_cap is None else lattice_cap
    cyclic: Dict[tuple, Subfunctor] = {}
    zero = zero_subfunctor(module)
    cyclic[zero.spaces] = zero
    for obj in module.objects:
        for vec in linalg.enumerate_vectors(module.dims[obj], module.p, cap):
            if any(vec):
                sub = sub_generated(module, [(obj, vec)])
                cyclic.setdefault(sub.spaces, sub)
    if len(cyclic) > lattice_cap:
        raise CapExceededError(f"more than {lattice_cap} submodules")
    found: Dict[tuple, Subfunctor] = dict(cyclic)
    queue = list(found.values())
    while queue:
        current = queue.pop()
        for gen in cyclic.values():
            joined = sub_join(current, gen)
            if joined.spaces not in found:
                found[joined.spaces] = joined
                queue.append(joined)
                if len(found) > lattice_cap:
                    raise CapExceededError(f"more than {lattice_cap} submodules")
    return sorted(found.values(), key=lambda s: s.sort_key())


# ---------------------------------------------------------------------------
# Random sampling
# ---------------------------------------------------------------------------


def random_module(cat: CategoryData, rng: np.random.Generator, dmax: int = 3, attempts: int = 64) -> CModule:
    """A random valid module with every fiber of dimension <= dmax.

    Half of the draws sample arrow matrices uniformly and keep them when the
    relations hold; the other half present the module as a quotient of a sum
    of representables by a random generated subfunctor.
    """
    p = cat.p
    for _ in range(attempts):
        if rng.random() < 0.5:
            dims = {o: int(rng.integers(0, dmax + 1)) for o in cat.objects}
            action = {
                a.name: rng.integers(0, p, size=(dims[a.target], dims[a.source])) for a in cat.arrows
            }
            try:
                return make_module(cat, dims, action)
            except ModuleError:
                continue
        tops = [cat.objects[int(i)] for i in rng.integers(0, len(cat.objects), size=int(rng.integers(1, 3)))]
        cover = direct_sum([representable(cat, c) for c in tops])
        if any(cover.dims[o] > 0 for o in cat.objects):
            sub = random_submodule(cover, rng, max_generators=2)
            module, _ = quotient(cover, sub)
            if max(module.dim_vector()) <= dmax:
                return module
    logger.debug("random_module fell back to the zero module after %d attempts", attempts)
    return zero_module(cat)


def random_element(module: CModule, obj: str, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, module.p, size=module.dims[obj]).astype(np.int64)


def random_submodule(module: CModule, rng: np.random.Generator, max_generators: int = 2) -> Subfunctor:
    supported = [o for o in module.objects if module.dims[o]]
    if not supported:
        return zero_subfunctor(module)
    count = int(rng.integers(0, max_generators + 1))
    elements = []
    for _ in range(count):
        obj = supported[int(rng.integers(0, len(supported)))]
        elements.append((obj, random_element(module, obj, rng)))
    return sub_generated(module, elements)


def random_nat(source: CModule, target: CModule, rng: np.random.Generator) -> NatTransform:
    space = nat_space(source, target)
    return space.element(rng.integers(0, source.p, size=space.dim))
