"""
Export an ideal lattice as a graphviz digraph.

Nodes are ideals labeled by their dimension vectors, grouped in ranks by
total dimension; edges are Hasse covers drawn from the smaller ideal up.

    glw ideals w5.gcat --object v2 --dot > lattice.gv
    dot -Tpng -O lattice.gv
"""
from typing import Dict, List

from glw.filters import IdealLattice


def dim_label(dims) -> str:
    return "(" + ",".join(str(d) for d in dims) + ")"


def emit_dot(lattice: IdealLattice) -> str:
    lines = [f'digraph "ideals_{lattice.base}" {{', "\trankdir = BT;", "\tnode [shape = box];"]
    layers: Dict[int, List[int]] = {}
    for index, ideal in enumerate(lattice.ideals):
        layers.setdefault(ideal.body.total_dim, []).append(index)
    for total in sorted(layers):
        lines.append("\t{")
        lines.append("\t\trank = same;")
        for index in layers[total]:
            lines.append(f'\t\t"{index}" [label="{dim_label(lattice.ideals[index].dim_vector())}"];')
        lines.append("\t}")
    for lower, upper in lattice.hasse:
        lines.append(f'\t"{lower}" -> "{upper}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
