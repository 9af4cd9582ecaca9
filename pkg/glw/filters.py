"""Left ideals of representable functors, filters of ideals, and the torsion theory they define.

Every ideal of Hom(c, -) is identified by its index in the canonical
``ideal_lattice(cat, c)``. A ``Filter`` is one set of such indices per object.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel

from core import config
from glw import linalg
from glw.cmodule import (
    CModule,
    Subfunctor,
    quotient,
    representable,
    sub_generated,
    sub_join,
    sub_meet,
    submodule_lattice,
    zero_subfunctor,
)
from glw.errors import AxiomError, CapExceededError, EmptyFilterError, FilterError, GlwError
from glw.linalg import Subspace
from glw.models import AxiomReport, AxiomVerdict, AxiomWitness, FilterDescription
from glw.presentation import CategoryData, Morphism, compose, enumerate_morphisms, morphism_label, parse_morphism

logger = logging.getLogger(__name__)

COMPLETION_MODES = ("upclose", "upclose+meet", "gabriel")


@dataclass(frozen=True)
class LeftIdeal:
    """A subfunctor of the representable Hom(base, -)."""

    base: str
    body: Subfunctor

    def at(self, obj: str) -> Subspace:
        return self.body.at(obj)

    def dim_vector(self) -> Tuple[int, ...]:
        return self.body.dim_vector()

    def contains_morphism(self, h: Morphism) -> bool:
        return self.body.at(h.target).contains(h.vector)

    def issubideal(self, other: "LeftIdeal") -> bool:
        return self.body.issubfunctor(other.body)


def _ideal(cat: CategoryData, c: str, spaces: Iterable[Subspace]) -> LeftIdeal:
    body = Subfunctor(representable(cat, c), tuple(spaces))
    if not body.is_closed():
        raise GlwError(f"family at {c} is not closed under postcomposition")
    return LeftIdeal(c, body)


def annihilator(module: CModule, c: str, x) -> LeftIdeal:
    """Ann(x, -): the morphisms h out of c with M(h) x = 0."""
    vec = np.array(x, dtype=np.int64) % module.p
    return _ideal(
        module.category,
        c,
        (linalg.kernel(module.evaluation_map(c, vec, X), module.p) for X in module.objects),
    )


def colon(ideal: LeftIdeal, h: Morphism) -> LeftIdeal:
    """(I : h) = {f : f o h in I}, an ideal of Hom(h.target, -)."""
    if h.source != ideal.base:
        raise GlwError(f"morphism starts at {h.source}, ideal lives at {ideal.base}")
    cat = ideal.body.parent.category
    return _ideal(
        cat,
        h.target,
        (linalg.preimage(cat.precompose_matrix(h, X), ideal.at(X)) for X in cat.objects),
    )


def generated_ideal(cat: CategoryData, c: str, morphisms: Iterable[Morphism]) -> LeftIdeal:
    gens = []
    for h in morphisms:
        if h.source != c:
            raise GlwError(f"generator starts at {h.source}, expected {c}")
        gens.append((h.target, h.coords))
    return LeftIdeal(c, sub_generated(representable(cat, c), gens))


def ideal_generators(cat: CategoryData, ideal: LeftIdeal) -> List[Morphism]:
    """A small generating set: greedy over RREF basis vectors, then pruned."""
    rep = representable(cat, ideal.base)
    gens: List[Tuple[str, Tuple[int, ...]]] = []
    current = zero_subfunctor(rep)
    for X in cat.objects:
        for row in ideal.at(X).rows:
            if not current.at(X).contains(row):
                gens.append((X, row))
                current = sub_generated(rep, gens)
    for g in list(gens):
        rest = [x for x in gens if x != g]
        if sub_generated(rep, rest).spaces == ideal.body.spaces:
            gens = rest
    return [Morphism(ideal.base, X, row) for X, row in gens]


@dataclass(frozen=True, eq=False)
class IdealLattice:
    category: CategoryData
    base: str
    ideals: Tuple[LeftIdeal, ...]
    leq: Tuple[Tuple[bool, ...], ...]
    hasse: Tuple[Tuple[int, int], ...]  # (lower, upper) covering pairs

    def __len__(self) -> int:
        return len(self.ideals)

    @cached_property
    def _index(self) -> Dict[tuple, int]:
        return {ideal.body.spaces: i for i, ideal in enumerate(self.ideals)}

    def index_of(self, ideal: LeftIdeal) -> int:
        if ideal.base != self.base:
            raise FilterError(f"ideal at {ideal.base} looked up in the lattice at {self.base}")
        try:
            return self._index[ideal.body.spaces]
        except KeyError:
            raise FilterError(f"ideal is not a member of the lattice at {self.base}") from None

    @property
    def top(self) -> int:
        return len(self.ideals) - 1

    @cached_property
    def _meets(self) -> Dict[Tuple[int, int], int]:
        return {}

    def meet(self, i: int, j: int) -> int:
        key = (min(i, j), max(i, j))
        if key not in self._meets:
            body = sub_meet(self.ideals[i].body, self.ideals[j].body)
            self._meets[key] = self._index[body.spaces]
        return self._meets[key]

    def join(self, i: int, j: int) -> int:
        return self._index[sub_join(self.ideals[i].body, self.ideals[j].body).spaces]

    def up_set(self, i: int) -> FrozenSet[int]:
        return frozenset(j for j in range(len(self)) if self.leq[i][j])

    def dims(self, i: int) -> List[int]:
        return list(self.ideals[i].dim_vector())


def ideal_lattice(cat: CategoryData, c: str) -> IdealLattice:
    """All left ideals of Hom(c, -), ordered by total dimension then RREF bases."""
    return _ideal_lattice(cat, c, config.GLW_CAP, config.GLW_LATTICE_CAP)


@lru_cache(maxsize=None)
def _ideal_lattice(cat: CategoryData, c: str, cap: int, lattice_cap: int) -> IdealLattice:
    subs = submodule_lattice(representable(cat, c), cap=cap, lattice_cap=lattice_cap)
    ideals = tuple(LeftIdeal(c, s) for s in subs)
    leq = tuple(tuple(a.issubfunctor(b) for b in subs) for a in subs)
    order = nx.DiGraph()
    order.add_nodes_from(range(len(subs)))
    order.add_edges_from((i, j) for i in range(len(subs)) for j in range(len(subs)) if i != j and leq[i][j])
    hasse = tuple(sorted(nx.transitive_reduction(order).edges()))
    logger.debug("lattice at %s: %d ideals, %d covers", c, len(ideals), len(hasse))
    return IdealLattice(category=cat, base=c, ideals=ideals, leq=leq, hasse=hasse)


# ---------------------------------------------------------------------------
# Filters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Filter:
    category: CategoryData
    members: Tuple[FrozenSet[int], ...]  # aligned with the category's objects

    def at(self, c: str) -> FrozenSet[int]:
        return self.members[self.category.objects.index(c)]

    def lattice(self, c: str) -> IdealLattice:
        return ideal_lattice(self.category, c)

    def contains(self, c: str, index: int) -> bool:
        return index in self.at(c)

    def admits(self, c: str, index: int) -> bool:
        """Some member is contained in the ideal; equals ``contains`` once T1 holds."""
        leq = self.lattice(c).leq
        return any(leq[m][index] for m in self.at(c))

    def admits_ideal(self, c: str, ideal: LeftIdeal) -> bool:
        return self.admits(c, self.lattice(c).index_of(ideal))

    def minimal_index(self, c: str) -> int:
        lattice = self.lattice(c)
        members = sorted(self.at(c))
        low = members[0]
        for m in members[1:]:
            low = lattice.meet(low, m)
        return low

    def minimal_ideal(self, c: str) -> LeftIdeal:
        return self.lattice(c).ideals[self.minimal_index(c)]

    @cached_property
    def report(self) -> AxiomReport:
        return check_axioms(self.category, self)

    def describe(self) -> FilterDescription:
        return FilterDescription(
            members={c: sorted(self.at(c)) for c in self.category.objects},
            dims={c: [self.lattice(c).dims(i) for i in sorted(self.at(c))] for c in self.category.objects},
        )


def make_filter(cat: CategoryData, members: Mapping[str, Iterable[int]]) -> Filter:
    sets = []
    for c in cat.objects:
        chosen = frozenset(members.get(c, ()))
        if not chosen:
            raise EmptyFilterError(f"filter has no ideal at object {c}")
        size = len(ideal_lattice(cat, c))
        bad = [i for i in chosen if not 0 <= i < size]
        if bad:
            raise FilterError(f"ideal indices {bad} out of range at {c} (lattice has {size} ideals)")
        sets.append(chosen)
    return Filter(cat, tuple(sets))


def trivial_filter(cat: CategoryData) -> Filter:
    return make_filter(cat, {c: [ideal_lattice(cat, c).top] for c in cat.objects})


def improper_filter(cat: CategoryData) -> Filter:
    return make_filter(cat, {c: range(len(ideal_lattice(cat, c))) for c in cat.objects})


def _colon_index(cat: CategoryData, c: str, i: int, b: str, coords: Tuple[int, ...]) -> int:
    return _cached_colon_index(cat, c, i, b, coords, config.GLW_CAP, config.GLW_LATTICE_CAP)


@lru_cache(maxsize=None)
def _cached_colon_index(cat: CategoryData, c: str, i: int, b: str, coords: Tuple[int, ...], *caps: int) -> int:
    ideal = ideal_lattice(cat, c).ideals[i]
    return ideal_lattice(cat, b).index_of(colon(ideal, Morphism(c, b, coords)))


def _elements(ideal: LeftIdeal, b: str) -> List[Tuple[int, ...]]:
    return [tuple(int(x) for x in v) for v in ideal.at(b).elements(config.GLW_CAP)]


def _t1(cat: CategoryData, F: Filter) -> Optional[AxiomWitness]:
    for c in cat.objects:
        lattice = F.lattice(c)
        for i in sorted(F.at(c)):
            for j in range(len(lattice)):
                if lattice.leq[i][j] and j not in F.at(c):
                    return AxiomWitness(
                        object=c, member=i, missing=j, missing_object=c,
                        detail=f"ideal {j} contains member {i} but is not in F_{c}",
                    )
    return None


def _t2(cat: CategoryData, F: Filter) -> Optional[AxiomWitness]:
    for c in cat.objects:
        lattice = F.lattice(c)
        members = sorted(F.at(c))
        for a, i in enumerate(members):
            for j in members[a + 1:]:
                k = lattice.meet(i, j)
                if k not in F.at(c):
                    return AxiomWitness(
                        object=c, member=i, partner=j, missing=k, missing_object=c,
                        detail=f"meet of members {i} and {j} is ideal {k}, not in F_{c}",
                    )
    return None


def _t3(cat: CategoryData, F: Filter) -> Optional[AxiomWitness]:
    for c in cat.objects:
        for i in sorted(F.at(c)):
            for b in cat.objects:
                for h in enumerate_morphisms(cat, c, b):
                    k = _colon_index(cat, c, i, b, h.coords)
                    if k not in F.at(b):
                        label = morphism_label(cat, h)
                        return AxiomWitness(
                            object=c, member=i, missing=k, missing_object=b,
                            morphism=label, morphism_coords=list(h.coords),
                            detail=f"colon of member {i} by {label}: {c} -> {b} is ideal {k}, not in F_{b}",
                        )
    return None


def _forced_by(cat: CategoryData, F: Filter, c: str, j: int, i: int) -> bool:
    """Every colon (I : h) with h in J lies in the filter."""
    member = F.lattice(c).ideals[j]
    return all(
        _colon_index(cat, c, i, b, h) in F.at(b) for b in cat.objects for h in _elements(member, b)
    )


def _t4(cat: CategoryData, F: Filter) -> Optional[AxiomWitness]:
    for c in cat.objects:
        lattice = F.lattice(c)
        for j in sorted(F.at(c)):
            for i in range(len(lattice)):
                if i not in F.at(c) and _forced_by(cat, F, c, j, i):
                    return AxiomWitness(
                        object=c, member=j, missing=i, missing_object=c,
                        detail=f"every colon of ideal {i} by elements of member {j} is in the filter, "
                        f"but ideal {i} is not in F_{c}",
                    )
    return None


_CHECKS = (("T1", _t1), ("T2", _t2), ("T3", _t3), ("T4", _t4))


def check_axioms(cat: CategoryData, F: Filter) -> AxiomReport:
    verdicts = []
    for name, check in _CHECKS:
        witness = check(cat, F)
        verdicts.append(AxiomVerdict(axiom=name, passed=witness is None, witness=witness))
    linear = all(v.passed for v in verdicts[:3])
    return AxiomReport(verdicts=verdicts, linear=linear, gabriel=linear and verdicts[3].passed)


def recheck_witness(cat: CategoryData, F: Filter, verdict: AxiomVerdict) -> bool:
    """Independently confirm that a failing verdict's witness is a violation."""
    w = verdict.witness
    if verdict.passed or w is None:
        return False
    c, lattice = w.object, F.lattice(w.object)
    if w.member not in F.at(c) or w.missing in F.at(w.missing_object):
        return False
    if verdict.axiom == "T1":
        return lattice.ideals[w.member].issubideal(lattice.ideals[w.missing])
    if verdict.axiom == "T2":
        if w.partner is None or w.partner not in F.at(c):
            return False
        body = sub_meet(lattice.ideals[w.member].body, lattice.ideals[w.partner].body)
        return body.spaces == lattice.ideals[w.missing].body.spaces
    if verdict.axiom == "T3":
        b = w.missing_object
        h = Morphism(c, b, tuple(w.morphism_coords or ()))
        member, target = lattice.ideals[w.member], F.lattice(b).ideals[w.missing]
        if colon(member, h).body.spaces != target.body.spaces:
            return False
        return all(
            member.contains_morphism(compose(cat, f, h)) == target.contains_morphism(f)
            for X in cat.objects
            for f in enumerate_morphisms(cat, b, X)
        )
    if verdict.axiom == "T4":
        member, candidate = lattice.ideals[w.member], lattice.ideals[w.missing]
        for b in cat.objects:
            for v in member.at(b).elements(config.GLW_CAP):
                if not F.admits_ideal(b, colon(candidate, Morphism(c, b, tuple(int(x) for x in v)))):
                    return False
        return True
    return False


def require_axioms(F: Filter, gabriel: bool) -> None:
    report = F.report
    needed = report.gabriel if gabriel else report.linear
    if not needed:
        failed = [v.axiom for v in report.verdicts if not v.passed]
        kind = "a Gabriel filter (T1-T4)" if gabriel else "a linear filter (T1-T3)"
        raise AxiomError(f"filter is not {kind}; failing axioms: {', '.join(failed)}")


def complete_filter(cat: CategoryData, generators: Mapping[str, Iterable[int]], mode: str) -> Filter:
    """Smallest family containing ``generators`` closed under the operations of ``mode``."""
    if mode not in COMPLETION_MODES:
        raise FilterError(f"unknown completion mode '{mode}'")
    sets: Dict[str, Set[int]] = {c: set(generators.get(c, ())) for c in cat.objects}
    changed = True
    while changed:
        before = {c: len(s) for c, s in sets.items()}
        for c in cat.objects:
            lattice = ideal_lattice(cat, c)
            grew = True
            while grew:
                grew = False
                for i in list(sets[c]):
                    sets[c] |= lattice.up_set(i)
                if mode != "upclose":
                    for i in list(sets[c]):
                        for j in list(sets[c]):
                            k = lattice.meet(i, j)
                            if k not in sets[c]:
                                sets[c].add(k)
                                grew = True
        if mode == "gabriel":
            for c in cat.objects:
                for i in list(sets[c]):
                    for b in cat.objects:
                        for h in enumerate_morphisms(cat, c, b):
                            sets[b].add(_colon_index(cat, c, i, b, h.coords))
            for c in cat.objects:
                lattice = ideal_lattice(cat, c)
                for j in list(sets[c]):
                    member = lattice.ideals[j]
                    for i in range(len(lattice)):
                        if i not in sets[c] and all(
                            _colon_index(cat, c, i, b, h) in sets[b]
                            for b in cat.objects
                            for h in _elements(member, b)
                        ):
                            sets[c].add(i)
        changed = mode == "gabriel" and any(len(sets[c]) != before[c] for c in cat.objects)
    return make_filter(cat, sets)


# ---------------------------------------------------------------------------
# Torsion
# ---------------------------------------------------------------------------


def _same_category(module: CModule, F: Filter) -> None:
    if module.category is not F.category:
        raise GlwError("module and filter live over different categories")


def torsion_witness(module: CModule, F: Filter) -> Optional[Tuple[str, np.ndarray]]:
    """First element (in object and lexicographic order) whose annihilator is not in the filter."""
    _same_category(module, F)
    for c in module.objects:
        for coords in linalg.enumerate_vectors(module.dims[c], module.p, config.GLW_CAP):
            x = np.array(coords, dtype=np.int64)
            if not F.admits_ideal(c, annihilator(module, c, x)):
                return c, x
    return None


def is_torsion(module: CModule, F: Filter) -> bool:
    return torsion_witness(module, F) is None


def torsion_radical(module: CModule, F: Filter) -> Subfunctor:
    """t(M)(c) = {x in M(c) : Ann(x, -) in F_c}."""
    _same_category(module, F)
    spaces = []
    for c in module.objects:
        members = []
        for coords in linalg.enumerate_vectors(module.dims[c], module.p, config.GLW_CAP):
            if F.admits_ideal(c, annihilator(module, c, coords)):
                members.append(coords)
        space = Subspace.span(members, module.dims[c], module.p)
        if len(members) != module.p ** space.dim:
            raise GlwError(f"torsion elements at {c} do not form a subspace; the filter is not linear")
        spaces.append(space)
    radical = Subfunctor(module, tuple(spaces))
    if not radical.is_closed():
        raise GlwError("torsion elements are not closed under the action; the filter is not linear")
    return radical


def filter_of_torsion_class(cat: CategoryData, is_member: Callable[[CModule], bool]) -> Filter:
    """F_c = {I : Hom(c, -)/I belongs to the class}."""
    members = {}
    for c in cat.objects:
        rep = representable(cat, c)
        members[c] = [
            i for i, ideal in enumerate(ideal_lattice(cat, c).ideals) if is_member(quotient(rep, ideal.body)[0])
        ]
    return make_filter(cat, members)


def preradical_of_class(module: CModule, is_member: Callable[[CModule], bool]) -> Subfunctor:
    """Sum of all submodules of ``module`` that belong to the class."""
    total = zero_subfunctor(module)
    for sub in submodule_lattice(module):
        if is_member(sub.as_module()[0]):
            total = sub_join(total, sub)
    return total


def class_of_preradical(radical: Callable[[CModule], Subfunctor]) -> Callable[[CModule], bool]:
    """The class {M : t(M) = M}."""
    return lambda module: radical(module).is_full()


# ---------------------------------------------------------------------------
# Census
# ---------------------------------------------------------------------------


def enumerate_filters(cat: CategoryData, gabriel: bool = True, budget: Optional[int] = None) -> List[Filter]:
    """Every linear (or Gabriel) filter, each determined by its least ideal per object.

    Up-closed, meet-closed subsets of a finite lattice are the principal
    up-sets, so the search assigns a least ideal per object and prunes on the
    colon condition between assigned objects.
    """
    limit = config.GLW_CENSUS_BUDGET if budget is None else budget
    objects = cat.objects
    lattices = {c: ideal_lattice(cat, c) for c in objects}
    choice: Dict[str, int] = {}
    found: List[Filter] = []
    nodes = 0

    def stable(c: str, b: str) -> bool:
        return all(
            lattices[b].leq[choice[b]][_colon_index(cat, c, choice[c], b, h.coords)]
            for h in enumerate_morphisms(cat, c, b)
        )

    def extend(k: int) -> None:
        nonlocal nodes
        if k == len(objects):
            F = make_filter(cat, {c: lattices[c].up_set(choice[c]) for c in objects})
            if F.report.linear and (F.report.gabriel or not gabriel):
                found.append(F)
            return
        c = objects[k]
        for m in reversed(range(len(lattices[c]))):
            nodes += 1
            if nodes > limit:
                raise CapExceededError(f"filter census exceeded its budget of {limit} nodes")
            choice[c] = m
            if all(stable(c, b) and stable(b, c) for b in objects[: k + 1]):
                extend(k + 1)
            del choice[c]

    extend(0)
    logger.debug("census found %d filters after %d nodes", len(found), nodes)
    return found


def enumerate_gabriel_filters(cat: CategoryData, budget: Optional[int] = None) -> List[Filter]:
    return enumerate_filters(cat, gabriel=True, budget=budget)


def enumerate_linear_filters(cat: CategoryData, budget: Optional[int] = None) -> List[Filter]:
    return enumerate_filters(cat, gabriel=False, budget=budget)


# ---------------------------------------------------------------------------
# .gfil parsing
# ---------------------------------------------------------------------------


class FilterSpec(BaseModel):
    generators: Dict[str, List[int]]  # Object -> lattice indices, as written
    complete: Optional[str] = None  # Completion mode, if requested


_BLOCK = re.compile(r"^at\s+(?P<obj>\S+)\s*:\s*\{(?P<body>.*)\}$")


def _split_top_level(text: str) -> List[str]:
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    tail = "".join(current).strip()
    if tail:
        parts.append(tail)
    return parts


def parse_ideal(cat: CategoryData, c: str, text: str) -> LeftIdeal:
    """``full``, ``zero`` or ``gen(<morphism>, ...)`` at object c."""
    text = text.strip()
    rep = representable(cat, c)
    if text == "full":
        return ideal_lattice(cat, c).ideals[-1]
    if text == "zero":
        return LeftIdeal(c, zero_subfunctor(rep))
    if text.startswith("gen(") and text.endswith(")"):
        exprs = _split_top_level(text[4:-1])
        return generated_ideal(cat, c, [parse_morphism(cat, c, e) for e in exprs])
    raise FilterError(f"cannot parse ideal '{text}'")


def parse_filter(text: str, cat: CategoryData) -> FilterSpec:
    generators: Dict[str, List[int]] = {}
    complete = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("filter over"):
            continue
        if line.startswith("complete"):
            complete = line[len("complete"):].strip()
            if complete not in COMPLETION_MODES:
                raise FilterError(f"unknown completion mode '{complete}'", lineno)
            continue
        m = _BLOCK.match(line)
        if m is None:
            raise FilterError(f"cannot parse '{line}'", lineno)
        c = m.group("obj")
        if c not in cat.objects:
            raise FilterError(f"unknown object '{c}'", lineno)
        lattice = ideal_lattice(cat, c)
        indices = generators.setdefault(c, [])
        for spec in _split_top_level(m.group("body")):
            try:
                index = lattice.index_of(parse_ideal(cat, c, spec))
            except GlwError as exc:
                raise FilterError(str(exc), lineno) from None
            if index not in indices:
                indices.append(index)
    return FilterSpec(generators=generators, complete=complete)


def build_filter(cat: CategoryData, spec: FilterSpec) -> Filter:
    if spec.complete:
        return complete_filter(cat, spec.generators, spec.complete)
    return make_filter(cat, spec.generators)


def load_filter(path: str, cat: CategoryData) -> Filter:
    with open(path, "r", encoding="utf-8") as fh:
        return build_filter(cat, parse_filter(fh.read(), cat))
