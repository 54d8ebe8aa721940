"""Line-oriented text dump of LP/MILP problems for external cross-checking.

Format, one variable or constraint per line::

    problem <min|max>
    var <name> <lower> <upper> <obj> [int]
    row <name> <rel> <rhs> <j>:<coef> ...
    end

Floats are written with ``repr`` so a dump/parse round-trip is exact.
Bounds use ``-inf``/``inf`` literals.
"""
from __future__ import annotations

import numpy as np

from ..errors import MalformedProblemError
from .model import LinearProgram, MilpProblem


def dump_problem(problem: LinearProgram | MilpProblem) -> str:
    if isinstance(problem, MilpProblem):
        lp, integer = problem.lp, problem.integer
    else:
        lp, integer = problem, np.zeros(problem.n_vars, dtype=bool)
    lines = [f"problem {lp.sense}"]
    for j in range(lp.n_vars):
        tag = " int" if integer[j] else ""
        lines.append(
            f"var {lp._vname(j)} {float(lp.lower[j])!r} {float(lp.upper[j])!r} "
            f"{float(lp.obj[j])!r}{tag}"
        )
    for i in range(lp.n_rows):
        name = lp.row_names[i] if lp.row_names else f"r{i}"
        terms = " ".join(
            f"{j}:{float(lp.a[i, j])!r}" for j in np.nonzero(lp.a[i])[0]
        )
        lines.append(f"row {name} {lp.relations[i]} {float(lp.rhs[i])!r} {terms}".rstrip())
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_problem(text: str) -> MilpProblem:
    sense = None
    names, lowers, uppers, objs, ints = [], [], [], [], []
    row_names, relations, rhs, rows = [], [], [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "problem":
            sense = parts[1]
        elif parts[0] == "var":
            names.append(parts[1])
            lowers.append(float(parts[2]))
            uppers.append(float(parts[3]))
            objs.append(float(parts[4]))
            ints.append(len(parts) > 5 and parts[5] == "int")
        elif parts[0] == "row":
            row_names.append(parts[1])
            relations.append(parts[2])
            rhs.append(float(parts[3]))
            terms = []
            for tok in parts[4:]:
                j, coef = tok.split(":")
                terms.append((int(j), float(coef)))
            rows.append(terms)
        elif parts[0] == "end":
            break
        else:
            raise MalformedProblemError(f"unrecognized dump line: {raw!r}")
    if sense is None:
        raise MalformedProblemError("dump is missing the problem line")
    n = len(names)
    a = np.zeros((len(rows), n))
    for i, terms in enumerate(rows):
        for j, coef in terms:
            a[i, j] = coef
    lp = LinearProgram(
        sense=sense,
        obj=np.array(objs),
        lower=np.array(lowers),
        upper=np.array(uppers),
        a=a,
        relations=relations,
        rhs=np.array(rhs),
        var_names=names,
        row_names=row_names,
    )
    milp = MilpProblem(lp=lp, integer=np.array(ints, dtype=bool))
    milp.validate()
    return milp
