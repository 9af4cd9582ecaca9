import argparse
import json
import logging
import os
import sys
from typing import Callable, List, Optional

from pydantic import BaseModel

from core import config
from glw import models
from glw.cmodule import CModule, load_module, representable
from glw.dot import dim_label, emit_dot
from glw.errors import GlwError, VerificationFailure
from glw.filters import (
    Filter,
    complete_filter,
    enumerate_filters,
    ideal_generators,
    ideal_lattice,
    is_torsion,
    load_filter,
    make_filter,
    parse_filter,
    recheck_witness,
    torsion_radical,
    torsion_witness,
)
from glw.localization import gabriel_localize, is_closed
from glw.presentation import CategoryData, load_category, morphism_label
from glw.verification import verify_census, verify_theorems

logger = logging.getLogger(__name__)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
EXAMPLE_OBJECT = "v2"

SCHEMAS = {
    "homs": models.HomReport,
    "ideals": models.LatticeReport,
    "check-filter": models.AxiomReport,
    "filters": models.CensusReport,
    "torsion": models.TorsionReport,
    "localize": models.LocalizationReport,
    "closed": models.ClosedReport,
    "verify": models.VerificationReport,
    "verify-census": models.CensusVerificationReport,
    "example": models.ExampleReport,
}


def _loading(path: str, loader: Callable):
    """Run a loader and prefix any input error with the file it came from."""
    try:
        return loader(path)
    except GlwError as exc:
        exc.args = (f"{path}: {exc}",)
        raise


def _category(path: str) -> CategoryData:
    return _loading(path, load_category)


def _filter(path: str, cat: CategoryData) -> Filter:
    return _loading(path, lambda p: load_filter(p, cat))


def _module(path: str, cat: CategoryData) -> CModule:
    return _loading(path, lambda p: load_module(p, cat))


# ---------------------------------------------------------------------------
# Report builders
# ---------------------------------------------------------------------------


def hom_report(cat: CategoryData) -> models.HomReport:
    return models.HomReport(
        objects=list(cat.objects),
        dims={a: [cat.dim(a, b) for b in cat.objects] for a in cat.objects},
        bases={a: {b: cat.basis_labels(a, b) for b in cat.objects} for a in cat.objects},
    )


def lattice_report(cat: CategoryData, c: str) -> models.LatticeReport:
    lattice = ideal_lattice(cat, c)
    rows = []
    for i, ideal in enumerate(lattice.ideals):
        rows.append(
            models.IdealRow(
                index=i,
                dims=lattice.dims(i),
                generators=[morphism_label(cat, h) for h in ideal_generators(cat, ideal)],
                contains=[lower for lower, upper in lattice.hasse if upper == i],
            )
        )
    return models.LatticeReport(
        object=c, objects=list(cat.objects), ideals=rows, hasse=[list(edge) for edge in lattice.hasse]
    )


def census_report(cat: CategoryData, gabriel: bool) -> models.CensusReport:
    found = enumerate_filters(cat, gabriel=gabriel)
    return models.CensusReport(
        objects=list(cat.objects),
        lattice_sizes={c: len(ideal_lattice(cat, c)) for c in cat.objects},
        gabriel=gabriel,
        filters=[F.describe() for F in found],
    )


def torsion_report(module: CModule, F: Filter) -> models.TorsionReport:
    witness = torsion_witness(module, F)
    return models.TorsionReport(
        torsion=witness is None,
        radical_dims=list(torsion_radical(module, F).dim_vector()),
        witness_object=witness[0] if witness else None,
        witness_vector=[int(x) for x in witness[1]] if witness else None,
    )


def _candidate(name: str, cat: CategoryData, F: Filter) -> models.CandidateReport:
    report = F.report
    confirmed = all(recheck_witness(cat, F, v) for v in report.verdicts if not v.passed)
    if not confirmed:
        logger.error("candidate %s produced a witness that does not re-check", name)
    candidate = models.CandidateReport(name=name, filter=F.describe(), axioms=report, witnesses_confirmed=confirmed)
    if report.gabriel:
        rep = representable(cat, EXAMPLE_OBJECT)
        candidate.localized_dims = list(gabriel_localize(rep, F).module.dim_vector())
        candidate.representable_torsion = is_torsion(rep, F)
    return candidate


def example_report() -> models.ExampleReport:
    cat = _category(os.path.join(FIXTURES, "w5.gcat"))
    path = os.path.join(FIXTURES, "window_filter.gfil")
    with open(path, "r", encoding="utf-8") as fh:
        spec = _loading(path, lambda _: parse_filter(fh.read(), cat))
    candidates = [
        _candidate("literal", cat, make_filter(cat, spec.generators)),
        _candidate("upclose", cat, complete_filter(cat, spec.generators, "upclose")),
        _candidate("upclose+meet", cat, complete_filter(cat, spec.generators, "upclose+meet")),
        _candidate("gabriel", cat, complete_filter(cat, spec.generators, "gabriel")),
    ]
    return models.ExampleReport(lattice=lattice_report(cat, EXAMPLE_OBJECT), candidates=candidates)


# ---------------------------------------------------------------------------
# Text rendering
# ---------------------------------------------------------------------------


def _text_homs(report: models.HomReport) -> str:
    width = max(len(o) for o in report.objects) + 2
    lines = ["Hom(row, column)", " " * width + "".join(o.rjust(width) for o in report.objects)]
    for a in report.objects:
        lines.append(a.ljust(width) + "".join(str(d).rjust(width) for d in report.dims[a]))
    lines.append("")
    for a in report.objects:
        for b in report.objects:
            if report.bases[a][b]:
                lines.append(f"{a} -> {b}: " + ", ".join(report.bases[a][b]))
    return "\n".join(lines)


def _text_lattice(report: models.LatticeReport) -> str:
    lines = [f"{len(report.ideals)} ideals of Hom({report.object}, -) over ({', '.join(report.objects)})"]
    for row in report.ideals:
        gens = ", ".join(row.generators) if row.generators else "-"
        covers = ", ".join(str(i) for i in row.contains) if row.contains else "-"
        lines.append(f"  [{row.index}] dims {dim_label(row.dims)}  generated by {gens}  covers {covers}")
    lines.append("hasse: " + " ".join(f"{lo}<{hi}" for lo, hi in report.hasse))
    return "\n".join(lines)


def _text_axioms(report: models.AxiomReport, indent: str = "") -> List[str]:
    lines = []
    for v in report.verdicts:
        if v.passed:
            lines.append(f"{indent}{v.axiom} pass")
        else:
            lines.append(f"{indent}{v.axiom} FAIL at {v.witness.object}: {v.witness.detail}")
    lines.append(f"{indent}linear: {'yes' if report.linear else 'no'}, gabriel: {'yes' if report.gabriel else 'no'}")
    return lines


def _text_filter(desc: models.FilterDescription) -> str:
    return "; ".join(
        f"{c}: " + " ".join(dim_label(d) for d in desc.dims[c]) for c in desc.members
    )


def _text_census(report: models.CensusReport) -> str:
    kind = "Gabriel" if report.gabriel else "linear"
    sizes = ", ".join(f"{c}:{n}" for c, n in report.lattice_sizes.items())
    lines = [f"{len(report.filters)} {kind} filters (lattice sizes {sizes})"]
    for i, desc in enumerate(report.filters):
        lines.append(f"  #{i}  {_text_filter(desc)}")
    return "\n".join(lines)


def _text_torsion(report: models.TorsionReport) -> str:
    lines = [f"torsion: {'yes' if report.torsion else 'no'}", f"radical dims: {dim_label(report.radical_dims)}"]
    if report.witness_object is not None:
        vec = "".join(str(x) for x in report.witness_vector)
        lines.append(f"witness: x = {vec} in M({report.witness_object}) has annihilator outside the filter")
    return "\n".join(lines)


def _text_localize(report: models.LocalizationReport) -> str:
    return "\n".join(
        [
            f"M:          {dim_label(report.source_dims)}",
            f"t(M):       {dim_label(report.radical_dims)}",
            f"M/t(M):     {dim_label(report.quotient_dims)}",
            f"G(M):       {dim_label(report.localized_dims)}",
            f"ker Delta:  {dim_label(report.delta_kernel_dims)}",
            f"coker Delta: {dim_label(report.delta_cokernel_dims)}",
            "",
            report.module.rstrip(),
        ]
    )


def _text_closed(report: models.ClosedReport) -> str:
    if report.closed:
        return "closed: yes"
    return f"closed: no ({report.detail})"


def _text_verify(report: models.VerificationReport) -> str:
    lines = [f"seed {report.seed}, {report.samples} samples, fiber dims <= {report.dmax}"]
    for check in report.checks:
        lines.append(f"  {check.status:<7} {check.name}: {check.statement}")
        if check.witness:
            for key, value in check.witness.items():
                lines.append(f"      {key}: {value}")
    lines.append("all checks passed" if report.passed else "verification FAILED")
    return "\n".join(lines)


def _text_verify_census(report: models.CensusVerificationReport) -> str:
    first = report.reports[0] if report.reports else None
    header = f"{len(report.reports)} Gabriel filters"
    if first is not None:
        header += f", seed {first.seed}, {first.samples} samples, fiber dims <= {first.dmax}"
    lines = [header]
    for i, r in enumerate(report.reports):
        lines.append(f"  #{i}  {'passed' if r.passed else 'FAILED'}  {_text_filter(r.filter)}")
        for check in r.checks:
            if check.status == "failed":
                lines.append(f"      {check.name}: {check.witness}")
    failed = report.failed_filters()
    lines.append("all filters passed" if not failed else "verification FAILED on " + " ".join(f"#{i}" for i in failed))
    return "\n".join(lines)


def _text_example(report: models.ExampleReport) -> str:
    lines = [_text_lattice(report.lattice), ""]
    for cand in report.candidates:
        lines.append(f"candidate {cand.name}: {_text_filter(cand.filter)}")
        lines += _text_axioms(cand.axioms, indent="  ")
        if not cand.witnesses_confirmed:
            lines.append("  warning: a witness did not re-check")
        if cand.localized_dims is not None:
            zero = not any(cand.localized_dims)
            lines.append(
                f"  G(P_{EXAMPLE_OBJECT}) dims {dim_label(cand.localized_dims)}"
                f" ({'zero' if zero else 'nonzero'}; P_{EXAMPLE_OBJECT} torsion: "
                f"{'yes' if cand.representable_torsion else 'no'})"
            )
        lines.append("")
    return "\n".join(lines).rstrip()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _emit(report: BaseModel, fmt: str, text: Callable[[BaseModel], str]) -> None:
    if fmt == "json":
        print(report.model_dump_json(indent=2))
    else:
        print(text(report))


def cmd_homs(args) -> int:
    _emit(hom_report(_category(args.category)), args.format, _text_homs)
    return 0


def cmd_ideals(args) -> int:
    cat = _category(args.category)
    if args.object not in cat.objects:
        raise GlwError(f"unknown object '{args.object}'")
    if args.dot or args.format == "dot":
        print(emit_dot(ideal_lattice(cat, args.object)), end="")
    else:
        _emit(lattice_report(cat, args.object), args.format, _text_lattice)
    return 0


def cmd_check_filter(args) -> int:
    cat = _category(args.category)
    report = _filter(args.filter, cat).report
    _emit(report, args.format, lambda r: "\n".join(_text_axioms(r)))
    return 0


def cmd_filters(args) -> int:
    _emit(census_report(_category(args.category), gabriel=not args.linear), args.format, _text_census)
    return 0


def cmd_torsion(args) -> int:
    cat = _category(args.category)
    _emit(torsion_report(_module(args.module, cat), _filter(args.filter, cat)), args.format, _text_torsion)
    return 0


def cmd_localize(args) -> int:
    cat = _category(args.category)
    result = gabriel_localize(_module(args.module, cat), _filter(args.filter, cat))
    _emit(result.report(os.path.basename(args.category)), args.format, _text_localize)
    return 0


def cmd_closed(args) -> int:
    cat = _category(args.category)
    _emit(is_closed(_module(args.module, cat), _filter(args.filter, cat)), args.format, _text_closed)
    return 0


def cmd_verify(args) -> int:
    cat = _category(args.category)
    if args.census == (args.filter is not None):
        raise GlwError("verify takes either a filter file or --census")
    if args.census:
        census = verify_census(cat, samples=args.samples, dmax=args.dmax, seed=args.seed)
        _emit(census, args.format, _text_verify_census)
        return 0 if census.passed else 1
    report = verify_theorems(cat, _filter(args.filter, cat), samples=args.samples, dmax=args.dmax, seed=args.seed)
    _emit(report, args.format, _text_verify)
    return 0 if report.passed else 1


def cmd_example(args) -> int:
    report = example_report()
    _emit(report, args.format, _text_example)
    return 0 if all(c.witnesses_confirmed for c in report.candidates) else 1


def cmd_schema(args) -> int:
    if args.name is None:
        print("\n".join(sorted(SCHEMAS)))
        return 0
    if args.name not in SCHEMAS:
        raise GlwError(f"no schema named '{args.name}'; choose from {', '.join(sorted(SCHEMAS))}")
    print(json.dumps(SCHEMAS[args.name].model_json_schema(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "dot"), default="text")
    common.add_argument("--cap", type=int, default=None, help="Max vectors enumerated per fiber (env GLW_CAP)")

    parser = argparse.ArgumentParser(prog="glw", description="Gabriel localization workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("homs", parents=[common], help="Hom dimensions and bases")
    p.add_argument("category")
    p.set_defaults(handler=cmd_homs)

    p = sub.add_parser("ideals", parents=[common], help="Lattice of left ideals of Hom(object, -)")
    p.add_argument("category")
    p.add_argument("--object", required=True)
    p.add_argument("--dot", action="store_true", help="Emit graphviz DOT")
    p.set_defaults(handler=cmd_ideals)

    p = sub.add_parser("check-filter", parents=[common], help="Check T1-T4 with witnesses")
    p.add_argument("category")
    p.add_argument("filter")
    p.set_defaults(handler=cmd_check_filter)

    p = sub.add_parser("filters", parents=[common], help="Census of Gabriel filters")
    p.add_argument("category")
    p.add_argument("--linear", action="store_true", help="Enumerate filters satisfying T1-T3 only")
    p.set_defaults(handler=cmd_filters)

    for name, handler, help_text in (
        ("torsion", cmd_torsion, "Torsion verdict and radical"),
        ("localize", cmd_localize, "Gabriel localization G(M)"),
        ("closed", cmd_closed, "Closedness of a module"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("category")
        p.add_argument("filter")
        p.add_argument("module")
        p.set_defaults(handler=handler)

    p = sub.add_parser("verify", parents=[common], help="Randomized theorem checks")
    p.add_argument("category")
    p.add_argument("filter", nargs="?")
    p.add_argument("--census", action="store_true", help="Check every Gabriel filter of the category")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (env GLW_SEED)")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--dmax", type=int, default=3)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("example", parents=[common], help="Worked example on the bundled window category")
    p.set_defaults(handler=cmd_example)

    p = sub.add_parser("schema", parents=[common], help="JSON schema of a command's report")
    p.add_argument("name", nargs="?")
    p.set_defaults(handler=cmd_schema)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(
        level=config.GLW_LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )
    if args.format == "dot" and args.command != "ideals":
        print("error: --format dot is only available for 'ideals'", file=sys.stderr)
        return 2
    cap = config.GLW_CAP
    if args.cap is not None:
        config.GLW_CAP = args.cap
    try:
        return args.handler(args)
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except GlwError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        config.GLW_CAP = cap


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
