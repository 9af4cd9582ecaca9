"""Prelocalization L, the canonical map phi, and Gabriel localization G.

A filter with finitely many ideals per object has a least member I0(c) at
every object, so L(M)(c) is computed as Nat(I0(c), M). ``prelocalize_by_colimit``
builds the directed colimit over all of F_c and is used to cross-check that.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from glw import linalg
from glw.cmodule import (
    CModule,
    NatSpace,
    NatTransform,
    Subfunctor,
    compose_nat,
    format_module,
    make_module,
    nat_space,
    quotient,
    quotient_section,
)
from glw.errors import GlwError, NotClosedError
from glw.filters import Filter, LeftIdeal, colon, require_axioms, torsion_radical
from glw.models import ClosedReport, LocalizationReport
from glw.presentation import Morphism

logger = logging.getLogger(__name__)


def _ideal_module(ideal: LeftIdeal) -> CModule:
    return ideal.body.as_module()[0]


def hom_from_ideal(ideal: LeftIdeal, module: CModule) -> NatSpace:
    """Nat(I, M), with I taken as a module in the RREF coordinates of its fibers."""
    return nat_space(_ideal_module(ideal), module)


def transport(h: Morphism, ideal: LeftIdeal, onto: LeftIdeal, eta: NatTransform) -> NatTransform:
    """The transformation f -> eta(f o h) on ``onto``, which must lie inside (ideal : h)."""
    if not onto.issubideal(colon(ideal, h)):
        raise GlwError(f"ideal at {onto.base} is not contained in the colon ideal along {h.source} -> {h.target}")
    cat = eta.source.category
    p = cat.p
    components = {}
    for X in cat.objects:
        into = ideal.at(X).coordinate_matrix()
        moved = linalg.matmul(cat.precompose_matrix(h, X), onto.at(X).basis.T, p)
        components[X] = linalg.matmul(eta.components[X], linalg.matmul(into, moved, p), p)
    return NatTransform(_ideal_module(onto), eta.target, components)


def _matrix_of(source: NatSpace, target: NatSpace, image_of) -> np.ndarray:
    """Matrix (columns indexed by the basis of ``source``) of a linear map between Nat spaces."""
    columns = [target.coordinates(image_of(eta)) for eta in source.transforms()]
    if not columns:
        return linalg.zeros(target.dim, 0)
    return np.stack(columns, axis=1) % source.source.p


def restriction_matrix(larger: LeftIdeal, smaller: LeftIdeal, module: CModule) -> np.ndarray:
    """Nat(J, M) -> Nat(I, M), eta -> eta restricted to I, for I inside J."""
    if larger.base != smaller.base:
        raise GlwError("restriction between ideals at different objects")
    identity = module.category.identity(larger.base)
    return _matrix_of(
        hom_from_ideal(larger, module),
        hom_from_ideal(smaller, module),
        lambda eta: transport(identity, larger, smaller, eta),
    )


@dataclass(frozen=True, eq=False)
class PrelocalizedModule:
    source: CModule
    filter: Filter
    minimal: Dict[str, LeftIdeal] = field(repr=False)
    spaces: Dict[str, NatSpace] = field(repr=False)  # fiber c of L(M) is spaces[c], in its basis
    module: CModule = field(repr=False)
    phi: NatTransform = field(repr=False)


def _phi(module: CModule, minimal: Dict[str, LeftIdeal], spaces: Dict[str, NatSpace], target: CModule) -> NatTransform:
    p = module.p
    components = {}
    for c in module.objects:
        ideal, space = minimal[c], spaces[c]
        columns = []
        for x in linalg.identity(module.dims[c]):
            comps = {
                X: linalg.matmul(module.evaluation_map(c, x, X), ideal.at(X).basis.T, p) for X in module.objects
            }
            columns.append(space.coordinates(NatTransform(space.source, module, comps)))
        components[c] = np.stack(columns, axis=1) if columns else linalg.zeros(space.dim, 0)
    return NatTransform(module, target, components)


def prelocalize(module: CModule, F: Filter) -> PrelocalizedModule:
    """L(M)(c) = Nat(I0(c), M); h: c -> b acts by eta -> (f -> eta(f o h)) restricted to I0(b)."""
    if module.category is not F.category:
        raise GlwError("module and filter live over different categories")
    require_axioms(F, gabriel=False)
    if not F.report.gabriel:
        logger.warning("prelocalizing along a filter that fails T4")
    cat = module.category
    minimal = {c: F.minimal_ideal(c) for c in cat.objects}
    spaces = {c: hom_from_ideal(minimal[c], module) for c in cat.objects}
    action = {}
    for arrow in cat.arrows:
        h = cat.arrow(arrow.name)
        action[arrow.name] = _matrix_of(
            spaces[arrow.source],
            spaces[arrow.target],
            lambda eta, h=h, a=arrow: transport(h, minimal[a.source], minimal[a.target], eta),
        )
    result = make_module(cat, {c: spaces[c].dim for c in cat.objects}, action)
    phi = _phi(module, minimal, spaces, result)
    if not phi.is_natural():
        raise GlwError("canonical map into the prelocalization is not natural")
    logger.debug("prelocalized %s -> %s", module.dim_vector(), result.dim_vector())
    return PrelocalizedModule(module, F, minimal, spaces, result, phi)


def phi(module: CModule, F: Filter) -> NatTransform:
    return prelocalize(module, F).phi


def prelocalize_map(
    eta: NatTransform,
    F: Filter,
    source: Optional[PrelocalizedModule] = None,
    target: Optional[PrelocalizedModule] = None,
) -> NatTransform:
    """L(eta): beta -> eta o beta on each Nat(I0(c), -)."""
    source = source or prelocalize(eta.source, F)
    target = target or prelocalize(eta.target, F)
    components = {
        c: _matrix_of(source.spaces[c], target.spaces[c], lambda beta: compose_nat(eta, beta))
        for c in eta.source.objects
    }
    return NatTransform(source.module, target.module, components)


@dataclass(frozen=True, eq=False)
class ColimitCheck:
    """Directed colimit of Nat(I, M) over F_c compared with Nat(I0(c), M)."""

    dims: Dict[str, int]
    isomorphic: Dict[str, bool]
    structure_maps_agree: bool

    @property
    def agrees(self) -> bool:
        return all(self.isomorphic.values()) and self.structure_maps_agree


def prelocalize_by_colimit(module: CModule, F: Filter, pre: Optional[PrelocalizedModule] = None) -> ColimitCheck:
    """Sum of Nat(I, M) over I in F_c, modulo eta ~ eta|_I for I inside J."""
    pre = pre or prelocalize(module, F)
    cat, p = module.category, module.p
    dims: Dict[str, int] = {}
    isomorphic: Dict[str, bool] = {}
    for c in cat.objects:
        lattice = F.lattice(c)
        members = sorted(F.at(c))
        spaces = {i: hom_from_ideal(lattice.ideals[i], module) for i in members}
        offsets, total = {}, 0
        for i in members:
            offsets[i] = total
            total += spaces[i].dim
        relations = []
        for j in members:
            for i in members:
                if i != j and lattice.leq[i][j]:
                    restrict = restriction_matrix(lattice.ideals[j], lattice.ideals[i], module)
                    for col in range(spaces[j].dim):
                        rel = linalg.zeros(1, total)[0]
                        rel[offsets[j] + col] = 1
                        rel[offsets[i] : offsets[i] + spaces[i].dim] -= restrict[:, col]
                        relations.append(rel % p)
        relation_space = linalg.Subspace.span(relations, total, p)
        dims[c] = total - relation_space.dim
        low = F.minimal_index(c)
        blocks = [restriction_matrix(lattice.ideals[i], lattice.ideals[low], module) for i in members]
        psi = np.hstack(blocks) if total else linalg.zeros(pre.spaces[c].dim, 0)
        onto = linalg.rank(psi, p) == pre.spaces[c].dim
        isomorphic[c] = onto and linalg.kernel(psi, p) == relation_space if total else pre.spaces[c].dim == 0
    agree = True
    for arrow in cat.arrows:
        h = cat.arrow(arrow.name)
        c, b = arrow.source, arrow.target
        lattice_c, lattice_b = F.lattice(c), F.lattice(b)
        for i in sorted(F.at(c)):
            ideal = lattice_c.ideals[i]
            pushed = lattice_b.ideals[lattice_b.index_of(colon(ideal, h))]
            for eta in hom_from_ideal(ideal, module).transforms():
                moved = transport(h, ideal, pushed, eta)
                via_colimit = pre.spaces[b].coordinates(transport(cat.identity(b), pushed, pre.minimal[b], moved))
                at_c = pre.spaces[c].coordinates(transport(cat.identity(c), ideal, pre.minimal[c], eta))
                via_minimum = linalg.matmul(pre.module.action[arrow.name], at_c, p)
                if not np.array_equal(via_colimit % p, via_minimum):
                    agree = False
    return ColimitCheck(dims=dims, isomorphic=isomorphic, structure_maps_agree=agree)


@dataclass(frozen=True, eq=False)
class LocalizationResult:
    source: CModule
    radical: Subfunctor
    quotient: CModule
    projection: NatTransform
    prelocalized: PrelocalizedModule
    delta: NatTransform

    @property
    def module(self) -> CModule:
        return self.prelocalized.module

    def delta_kernel_dims(self) -> List[int]:
        return [self.source.dims[o] - linalg.rank(self.delta.at(o), self.source.p) for o in self.source.objects]

    def delta_cokernel_dims(self) -> List[int]:
        return [self.module.dims[o] - linalg.rank(self.delta.at(o), self.source.p) for o in self.source.objects]

    def report(self, catfile: str = "category.gcat") -> LocalizationReport:
        return LocalizationReport(
            source_dims=list(self.source.dim_vector()),
            radical_dims=list(self.radical.dim_vector()),
            quotient_dims=list(self.quotient.dim_vector()),
            localized_dims=list(self.module.dim_vector()),
            delta_kernel_dims=self.delta_kernel_dims(),
            delta_cokernel_dims=self.delta_cokernel_dims(),
            module=format_module(self.module, catfile),
        )


def gabriel_localize(module: CModule, F: Filter) -> LocalizationResult:
    """G(M) = L(M / t(M)) with Delta = phi_{M/t(M)} o pi."""
    require_axioms(F, gabriel=True)
    radical = torsion_radical(module, F)
    quot, projection = quotient(module, radical)
    pre = prelocalize(quot, F)
    return LocalizationResult(module, radical, quot, projection, pre, compose_nat(pre.phi, projection))


def induced_on_quotients(eta: NatTransform, source: LocalizationResult, target: LocalizationResult) -> NatTransform:
    """M/t(M) -> N/t(N) induced by eta: M -> N."""
    p = eta.p
    sections = quotient_section(source.source, source.radical)
    components = {
        o: linalg.matmul(target.projection.at(o), linalg.matmul(eta.at(o), sections[o], p), p)
        for o in eta.source.objects
    }
    return NatTransform(source.quotient, target.quotient, components)


def gabriel_localize_map(
    eta: NatTransform,
    F: Filter,
    source: Optional[LocalizationResult] = None,
    target: Optional[LocalizationResult] = None,
) -> NatTransform:
    source = source or gabriel_localize(eta.source, F)
    target = target or gabriel_localize(eta.target, F)
    bar = induced_on_quotients(eta, source, target)
    return prelocalize_map(bar, F, source.prelocalized, target.prelocalized)


def is_closed(module: CModule, F: Filter) -> ClosedReport:
    """Restriction Nat(P_c, M) -> Nat(I, M) is bijective for every I in F_c."""
    require_axioms(F, gabriel=False)
    radical = torsion_radical(module, F)
    for c, space in zip(module.objects, radical.spaces):
        if not space.is_zero:
            return ClosedReport(
                closed=False, object=c, injective=False, detail=f"torsion radical is nonzero at {c}"
            )
    p = module.p
    for c in module.objects:
        lattice = F.lattice(c)
        top = lattice.ideals[lattice.top]
        for i in sorted(F.at(c)):
            mat = restriction_matrix(top, lattice.ideals[i], module)
            r = linalg.rank(mat, p)
            injective, surjective = r == mat.shape[1], r == mat.shape[0]
            if not (injective and surjective):
                return ClosedReport(
                    closed=False, object=c, ideal=i, injective=injective, surjective=surjective,
                    detail=f"restriction to ideal {i} at {c} is not bijective",
                )
    return ClosedReport(closed=True)


def check_adjunction(module: CModule, closed: CModule, F: Filter, result: Optional[LocalizationResult] = None) -> bool:
    """alpha -> alpha o Delta_M is a bijection Nat(G(M), N) -> Nat(M, N)."""
    report = is_closed(closed, F)
    if not report.closed:
        raise NotClosedError(f"target module is not closed: {report.detail}")
    result = result or gabriel_localize(module, F)
    source = nat_space(result.module, closed)
    target = nat_space(module, closed)
    mat = _matrix_of(source, target, lambda alpha: compose_nat(alpha, result.delta))
    if source.dim != target.dim:
        return False
    return source.dim == 0 or linalg.rank(mat, module.p) == source.dim
