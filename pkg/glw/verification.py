"""Randomized checks of the localization theorems on sampled modules.

Every check runs over the same seeded sample of modules and reports the first
counterexample it meets. Checks that rely on T4 are skipped for filters that
are only linear.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from core import config
from glw import linalg
from glw.cmodule import (
    CModule,
    NatTransform,
    Subfunctor,
    compose_nat,
    cokernel,
    format_module,
    image,
    kernel,
    nat_space,
    quotient,
    quotient_section,
    random_module,
    random_nat,
    random_submodule,
)
from glw.errors import VerificationFailure
from glw.filters import Filter, enumerate_gabriel_filters, is_torsion, require_axioms, torsion_radical
from glw.localization import (
    LocalizationResult,
    PrelocalizedModule,
    check_adjunction,
    gabriel_localize,
    gabriel_localize_map,
    is_closed,
    prelocalize,
    prelocalize_by_colimit,
    prelocalize_map,
    restriction_matrix,
)
from glw.models import CensusVerificationReport, CheckResult, VerificationReport
from glw.presentation import CategoryData

logger = logging.getLogger(__name__)

Witness = Optional[Dict[str, object]]


@dataclass(eq=False)
class _Bench:
    """Sampled modules plus memoized constructions on them."""

    filter: Filter
    modules: List[CModule]
    rng: np.random.Generator
    _pre: Dict[int, PrelocalizedModule] = field(default_factory=dict)
    _loc: Dict[int, LocalizationResult] = field(default_factory=dict)

    def pre(self, k: int) -> PrelocalizedModule:
        if k not in self._pre:
            self._pre[k] = prelocalize(self.modules[k], self.filter)
        return self._pre[k]

    def loc(self, k: int) -> LocalizationResult:
        if k not in self._loc:
            self._loc[k] = gabriel_localize(self.modules[k], self.filter)
        return self._loc[k]

    def partner(self, k: int) -> int:
        return (k + 1) % len(self.modules)


def _dims(module: CModule) -> List[int]:
    return list(module.dim_vector())


def _witness(module: CModule, **extra) -> Dict[str, object]:
    return {"module": format_module(module), **extra}


def _phi_kernel(bench: _Bench, k: int) -> Witness:
    module = bench.modules[k]
    ker = kernel(bench.pre(k).phi)
    radical = torsion_radical(module, bench.filter)
    if ker.spaces != radical.spaces:
        return _witness(module, kernel_dims=list(ker.dim_vector()), radical_dims=list(radical.dim_vector()))
    return None


def _phi_natural(bench: _Bench, k: int) -> Witness:
    j = bench.partner(k)
    source, target = bench.modules[k], bench.modules[j]
    eta = random_nat(source, target, bench.rng)
    left = compose_nat(prelocalize_map(eta, bench.filter, bench.pre(k), bench.pre(j)), bench.pre(k).phi)
    right = compose_nat(bench.pre(j).phi, eta)
    if not left.equals(right):
        return _witness(source, target=format_module(target))
    return None


def _colimit(bench: _Bench, k: int) -> Witness:
    result = prelocalize_by_colimit(bench.modules[k], bench.filter, bench.pre(k))
    expected = list(bench.pre(k).module.dim_vector())
    got = [result.dims[c] for c in bench.modules[k].objects]
    if not result.agrees or got != expected:
        return _witness(bench.modules[k], colimit_dims=got, minimum_dims=expected,
                        structure_maps_agree=result.structure_maps_agree)
    return None


def _left_exact(bench: _Bench, k: int) -> Witness:
    module, F, p = bench.modules[k], bench.filter, bench.modules[k].p
    sub = random_submodule(module, bench.rng)
    small, inclusion = sub.as_module()
    quot, projection = quotient(module, sub)
    pre_s, pre_q = prelocalize(small, F), prelocalize(quot, F)
    l_inc = prelocalize_map(inclusion, F, pre_s, bench.pre(k))
    l_proj = prelocalize_map(projection, F, bench.pre(k), pre_q)
    if not l_inc.is_injective() or not compose_nat(l_proj, l_inc).is_zero():
        return _witness(module, submodule_dims=list(sub.dim_vector()))
    for c in module.objects:
        ker_dim = bench.pre(k).module.dims[c] - linalg.rank(l_proj.at(c), p)
        if ker_dim != linalg.rank(l_inc.at(c), p):
            return _witness(module, submodule_dims=list(sub.dim_vector()), object=c)
    return None


def _restriction_injective(bench: _Bench, k: int) -> Witness:
    loc = bench.loc(k) if bench.filter.report.gabriel else None
    module = loc.quotient if loc else bench.modules[k]
    if not torsion_radical(module, bench.filter).is_zero():
        return None
    p = module.p
    for c in module.objects:
        lattice = bench.filter.lattice(c)
        low = bench.filter.minimal_index(c)
        for j in sorted(bench.filter.at(c)):
            mat = restriction_matrix(lattice.ideals[j], lattice.ideals[low], module)
            if linalg.rank(mat, p) != mat.shape[1]:
                return _witness(module, object=c, larger=j, smaller=low)
    return None


def _torsion_iff_zero(bench: _Bench, k: int) -> Witness:
    module = bench.modules[k]
    torsion = is_torsion(module, bench.filter)
    if torsion != bench.pre(k).module.is_zero():
        return _witness(module, torsion=torsion, prelocalized_dims=_dims(bench.pre(k).module))
    return None


def _cokernel_torsion(bench: _Bench, k: int) -> Witness:
    coker, _ = cokernel(bench.pre(k).phi)
    if not is_torsion(coker, bench.filter):
        return _witness(bench.modules[k], cokernel_dims=_dims(coker))
    return None


def _double_prelocalization(bench: _Bench, k: int) -> Witness:
    module, F, p = bench.modules[k], bench.filter, bench.modules[k].p
    loc, pre = bench.loc(k), bench.pre(k)
    sections = quotient_section(module, loc.radical)
    gamma = NatTransform(
        loc.quotient, pre.module, {c: linalg.matmul(pre.phi.at(c), sections[c], p) for c in module.objects}
    )
    if not gamma.is_natural():
        return _witness(module, detail="phi does not factor through the torsion quotient")
    twice = prelocalize(pre.module, F)
    induced = prelocalize_map(gamma, F, loc.prelocalized, twice)
    if not induced.is_natural() or not induced.is_iso():
        return _witness(module, localized_dims=_dims(loc.module), twice_dims=_dims(twice.module))
    return None


def _quotient_invariance(bench: _Bench, k: int) -> Witness:
    loc = bench.loc(k)
    again = gabriel_localize(loc.quotient, bench.filter)
    induced = gabriel_localize_map(loc.projection, bench.filter, loc, again)
    if not induced.is_iso():
        return _witness(bench.modules[k], localized_dims=_dims(loc.module), quotient_localized_dims=_dims(again.module))
    return None


def _torsion_free_stays(bench: _Bench, k: int) -> Witness:
    localized = bench.loc(k).module
    if not torsion_radical(localized, bench.filter).is_zero():
        return _witness(bench.modules[k], localized=format_module(localized))
    return None


def _radical_quotient(bench: _Bench, k: int) -> Witness:
    loc = bench.loc(k)
    if not torsion_radical(loc.quotient, bench.filter).is_zero():
        return _witness(bench.modules[k], radical_dims=list(loc.radical.dim_vector()))
    return None


def _closed(bench: _Bench, k: int) -> Witness:
    report = is_closed(bench.loc(k).module, bench.filter)
    if not report.closed:
        return _witness(bench.modules[k], object=report.object, ideal=report.ideal, detail=report.detail)
    return None


def _adjunction(bench: _Bench, k: int) -> Witness:
    closed = bench.loc(bench.partner(k)).module
    if not check_adjunction(bench.modules[k], closed, bench.filter, bench.loc(k)):
        return _witness(bench.modules[k], closed=format_module(closed))
    return None


def _hom_vanishing(bench: _Bench, k: int) -> Witness:
    torsion_part, _ = bench.loc(k).radical.as_module()
    closed = bench.loc(bench.partner(k)).module
    dim = nat_space(torsion_part, closed).dim
    if dim:
        return _witness(bench.modules[k], closed=format_module(closed), nat_dim=dim)
    return None


def sequence_defect(
    module: CModule, sub: Subfunctor, F: Filter, localized: Optional[LocalizationResult] = None
) -> Witness:
    """Where 0 -> G(S) -> G(M) -> G(M/S) -> 0 fails to be exact in the closed modules.

    G(iota) must be injective and ker G(pi) = im G(iota) objectwise. G(pi) need
    not be onto in Mod(C): its cokernel only has to vanish under G.
    """
    small, inclusion = sub.as_module()
    quot, projection = quotient(module, sub)
    loc_m = localized or gabriel_localize(module, F)
    loc_s, loc_q = gabriel_localize(small, F), gabriel_localize(quot, F)
    g_inc = gabriel_localize_map(inclusion, F, loc_s, loc_m)
    g_proj = gabriel_localize_map(projection, F, loc_m, loc_q)
    witness = _witness(
        module,
        submodule_dims=list(sub.dim_vector()),
        localized_dims={
            c: [loc_s.module.dims[c], loc_m.module.dims[c], loc_q.module.dims[c]] for c in module.objects
        },
    )
    if not g_inc.is_injective():
        return {**witness, "detail": "G(iota) is not injective"}
    for c, a, b in zip(module.objects, kernel(g_proj).spaces, image(g_inc).spaces):
        if a != b:
            return {**witness, "detail": "ker G(pi) differs from im G(iota)", "object": c}
    coker, _ = cokernel(g_proj)
    if not gabriel_localize(coker, F).module.is_zero():
        return {**witness, "detail": "cokernel of G(pi) is not torsion", "cokernel_dims": _dims(coker)}
    return None


def _exact(bench: _Bench, k: int) -> Witness:
    module = bench.modules[k]
    return sequence_defect(module, random_submodule(module, bench.rng), bench.filter, bench.loc(k))


def _kernel_is_torsion_class(bench: _Bench, k: int) -> Witness:
    module = bench.modules[k]
    torsion = is_torsion(module, bench.filter)
    if torsion != bench.loc(k).module.is_zero():
        return _witness(module, torsion=torsion, localized_dims=_dims(bench.loc(k).module))
    radical_module, _ = bench.loc(k).radical.as_module()
    if not gabriel_localize(radical_module, bench.filter).module.is_zero():
        return _witness(module, detail="torsion radical does not localize to zero")
    return None


@dataclass(frozen=True)
class Check:
    name: str
    statement: str
    run: Callable[[_Bench, int], Witness]
    needs_gabriel: bool = True


CHECKS = (
    Check("phi_kernel", "the kernel of phi_M is the torsion radical t(M)", _phi_kernel, needs_gabriel=False),
    Check("phi_natural", "L(eta) o phi_M = phi_N o eta for eta: M -> N", _phi_natural, needs_gabriel=False),
    Check("colimit_oracle", "L(M)(c) equals the directed colimit of Nat(I, M) over F_c", _colimit, needs_gabriel=False),
    Check("prelocalization_left_exact", "L preserves kernels of short exact sequences", _left_exact, needs_gabriel=False),
    Check("restriction_injective", "restriction Nat(J, M) -> Nat(I, M) is injective when t(M) = 0",
          _restriction_injective, needs_gabriel=False),
    Check("torsion_iff_prelocalization_zero", "M is torsion iff L(M) = 0", _torsion_iff_zero),
    Check("cokernel_phi_torsion", "the cokernel of phi_M is torsion", _cokernel_torsion),
    Check("radical_of_quotient", "t(M / t(M)) = 0", _radical_quotient),
    Check("double_prelocalization", "L(gamma_M): G(M) -> L(L(M)) is an isomorphism", _double_prelocalization),
    Check("quotient_invariance", "G(pi_M): G(M) -> G(M / t(M)) is an isomorphism", _quotient_invariance),
    Check("torsion_free_prelocalization", "t(M) = 0 implies t(L(M)) = 0", _torsion_free_stays),
    Check("localization_closed", "G(M) is closed", _closed),
    Check("adjunction", "alpha -> alpha o Delta_M is a bijection Nat(G(M), N) -> Nat(M, N) for closed N", _adjunction),
    Check("hom_vanishing", "Nat(T, N) = 0 for torsion T and closed N", _hom_vanishing),
    Check("localization_exact", "G carries 0 -> S -> M -> M/S -> 0 to a sequence exact in the closed modules", _exact),
    Check("kernel_of_localization", "G(M) = 0 iff M is torsion", _kernel_is_torsion_class),
)


def sample_modules(cat: CategoryData, rng: np.random.Generator, samples: int, dmax: int) -> List[CModule]:
    return [random_module(cat, rng, dmax=dmax) for _ in range(samples)]


def verify_theorems(
    cat: CategoryData,
    F: Filter,
    samples: int = 50,
    dmax: int = 3,
    seed: Optional[int] = None,
    fail_fast: bool = False,
) -> VerificationReport:
    seed = config.GLW_SEED if seed is None else seed
    rng = np.random.default_rng(seed)
    bench = _Bench(filter=F, modules=sample_modules(cat, rng, samples, dmax), rng=rng)
    logger.debug("sampled module dims: %s", [m.dim_vector() for m in bench.modules])
    gabriel = F.report.gabriel
    require_axioms(F, gabriel=False)
    results = []
    for check in CHECKS:
        started = time.perf_counter()
        if check.needs_gabriel and not gabriel:
            logger.info("skipping %s: filter fails T4", check.name)
            status, witness = "skipped", None
        else:
            status, witness = "passed", None
            for k in range(len(bench.modules)):
                witness = check.run(bench, k)
                if witness is not None:
                    status = "failed"
                    break
        results.append(
            CheckResult(
                name=check.name,
                statement=check.statement,
                status=status,
                witness=witness,
                seed=seed,
                samples=len(bench.modules),
                seconds=round(time.perf_counter() - started, 3),
            )
        )
        if status == "failed" and fail_fast:
            raise VerificationFailure(f"check {check.name} failed", witness)
    return VerificationReport(filter=F.describe(), seed=seed, samples=samples, dmax=dmax, checks=results)


def verify_census(
    cat: CategoryData,
    samples: int = 50,
    dmax: int = 3,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
) -> CensusVerificationReport:
    """Run every check against each Gabriel filter of the category, all on the same seed."""
    seed = config.GLW_SEED if seed is None else seed
    reports = []
    for i, F in enumerate(enumerate_gabriel_filters(cat, budget=budget)):
        report = verify_theorems(cat, F, samples=samples, dmax=dmax, seed=seed)
        if not report.passed:
            logger.warning("census filter #%d failed: %s", i, [c.name for c in report.checks if c.status == "failed"])
        reports.append(report)
    return CensusVerificationReport(objects=list(cat.objects), reports=reports)
