from pydantic import BaseModel
from typing import Dict, List, Optional


class HomReport(BaseModel):
    objects: List[str]
    dims: Dict[str, List[int]]  # Source object -> dim Hom(source, target) over the targets
    bases: Dict[str, Dict[str, List[str]]]  # Source -> target -> basis paths


class AxiomWitness(BaseModel):
    """Concrete data exhibiting a filter axiom violation"""
    object: str  # Object c whose filter F_c is involved
    member: int  # Lattice index of the filter member used (I for T1-T3, J for T4)
    partner: Optional[int] = None  # Second member (T2 only)
    missing: int  # Lattice index (at missing_object) of the ideal that should belong to the filter
    missing_object: str
    morphism: Optional[str] = None  # T3 only: the morphism h, as a path combination
    morphism_coords: Optional[List[int]] = None
    detail: str


class AxiomVerdict(BaseModel):
    axiom: str  # "T1" .. "T4"
    passed: bool
    witness: Optional[AxiomWitness] = None


class AxiomReport(BaseModel):
    verdicts: List[AxiomVerdict]
    linear: bool  # T1-T3 hold
    gabriel: bool  # T1-T4 hold

    def verdict(self, axiom: str) -> AxiomVerdict:
        return next(v for v in self.verdicts if v.axiom == axiom)


class IdealRow(BaseModel):
    index: int
    dims: List[int]  # Dimension vector over the category's objects
    generators: List[str]  # Minimal generating morphisms, as path combinations
    contains: List[int]  # Indices of the ideals it covers in the Hasse diagram


class LatticeReport(BaseModel):
    object: str
    objects: List[str]
    ideals: List[IdealRow]
    hasse: List[List[int]]  # Covering pairs [lower, upper]


class FilterDescription(BaseModel):
    members: Dict[str, List[int]]  # Object -> lattice indices
    dims: Dict[str, List[List[int]]]  # Object -> dimension vectors of the members


class CensusReport(BaseModel):
    objects: List[str]
    lattice_sizes: Dict[str, int]
    gabriel: bool  # False when linear filters (T1-T3) were enumerated
    filters: List[FilterDescription]


class TorsionReport(BaseModel):
    torsion: bool
    radical_dims: List[int]
    witness_object: Optional[str] = None  # Element whose annihilator is not in the filter
    witness_vector: Optional[List[int]] = None


class LocalizationReport(BaseModel):
    source_dims: List[int]
    radical_dims: List[int]
    quotient_dims: List[int]
    localized_dims: List[int]  # G(M)
    delta_kernel_dims: List[int]
    delta_cokernel_dims: List[int]
    module: str  # G(M) in .gmod text


class ClosedReport(BaseModel):
    closed: bool
    object: Optional[str] = None
    ideal: Optional[int] = None
    injective: Optional[bool] = None
    surjective: Optional[bool] = None
    detail: Optional[str] = None


class CheckResult(BaseModel):
    name: str
    statement: str  # The property being checked, in words
    status: str  # "passed", "failed" or "skipped"
    witness: Optional[Dict[str, object]] = None
    seed: int
    samples: int
    seconds: float


class VerificationReport(BaseModel):
    filter: FilterDescription
    seed: int
    samples: int
    dmax: int
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.status != "failed" for c in self.checks)


class CensusVerificationReport(BaseModel):
    objects: List[str]
    reports: List[VerificationReport]  # One per Gabriel filter, in census order

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def failed_filters(self) -> List[int]:
        return [i for i, r in enumerate(self.reports) if not r.passed]


class CandidateReport(BaseModel):
    name: str
    filter: FilterDescription
    axioms: AxiomReport
    localized_dims: Optional[List[int]] = None  # G(P_v2) when the candidate is a Gabriel filter
    representable_torsion: Optional[bool] = None
    witnesses_confirmed: bool  # Every failing witness re-validated as a violation


class ExampleReport(BaseModel):
    lattice: LatticeReport
    candidates: List[CandidateReport]
