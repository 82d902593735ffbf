"""Exact linear programming over the rationals.

A two-phase tableau simplex with Bland's rule. Rows are kept as sparse
dictionaries, which suits the very sparse constraint systems built by the
amalgamation and Ramsey modules. Arithmetic uses ``gmpy2.mpq`` when it is
installed and :class:`fractions.Fraction` otherwise; results are always
returned as ``Fraction``.

Variables are nonnegative unless bounds say otherwise; ``(None, None)``
declares a free variable.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

try:
    if os.environ.get("FRAISSE_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError
    from gmpy2 import mpq as _Q
except ImportError:
    _Q = Fraction

__all__ = ["LinearProgram", "LPOutcome", "LPError", "solve", "feasible"]

_RELATIONS = ("<=", "=", ">=")
_ZERO = _Q(0)


class LPError(ValueError):
    """Malformed program: unknown variable, bad relation, bad bounds."""


@dataclass
class Constraint:
    coeffs: dict[str, Fraction]
    relation: str
    rhs: Fraction


@dataclass
class LinearProgram:
    variables: list[str] = field(default_factory=list)
    objective: dict[str, Fraction] = field(default_factory=dict)
    sense: str = "min"
    constraints: list[Constraint] = field(default_factory=list)
    bounds: dict[str, tuple[Fraction | None, Fraction | None]] = field(default_factory=dict)

    def add_variable(self, name: str, lo=0, hi=None) -> str:
        if name in self.bounds:
            raise LPError(f"duplicate variable {name!r}")
        self.variables.append(name)
        self.bounds[name] = (None if lo is None else Fraction(lo),
                             None if hi is None else Fraction(hi))
        return name

    def add_constraint(self, coeffs: Mapping[str, object], relation: str, rhs) -> None:
        self.constraints.append(Constraint({k: Fraction(v) for k, v in coeffs.items()},
                                           relation, Fraction(rhs)))

    def minimize(self, coeffs: Mapping[str, object]) -> None:
        self.sense = "min"
        self.objective = {k: Fraction(v) for k, v in coeffs.items()}

    def maximize(self, coeffs: Mapping[str, object]) -> None:
        self.sense = "max"
        self.objective = {k: Fraction(v) for k, v in coeffs.items()}

    def check(self) -> None:
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise LPError("duplicate variable names")
        if self.sense not in ("min", "max"):
            raise LPError(f"unknown sense {self.sense!r}")
        for name in self.objective:
            if name not in declared:
                raise LPError(f"objective references undeclared variable {name!r}")
        for k, con in enumerate(self.constraints):
            if con.relation not in _RELATIONS:
                raise LPError(f"constraint {k}: unknown relation {con.relation!r}")
            for name in con.coeffs:
                if name not in declared:
                    raise LPError(f"constraint {k} references undeclared variable {name!r}")
        for name, (lo, hi) in self.bounds.items():
            if name not in declared:
                raise LPError(f"bounds given for undeclared variable {name!r}")
            if lo is not None and hi is not None and lo > hi:
                raise LPError(f"empty bounds for {name!r}")

    def evaluate(self, assignment: Mapping[str, Fraction]) -> Fraction:
        return sum((c * assignment[v] for v, c in self.objective.items()), Fraction(0))

    def satisfied_by(self, assignment: Mapping[str, Fraction]) -> bool:
        """Exact re-check of every constraint and bound."""
        for name in self.variables:
            lo, hi = self.bounds.get(name, (Fraction(0), None))
            x = assignment[name]
            if (lo is not None and x < lo) or (hi is not None and x > hi):
                return False
        for con in self.constraints:
            lhs = sum((c * assignment[v] for v, c in con.coeffs.items()), Fraction(0))
            if con.relation == "<=" and lhs > con.rhs:
                return False
            if con.relation == ">=" and lhs < con.rhs:
                return False
            if con.relation == "=" and lhs != con.rhs:
                return False
        return True


@dataclass(frozen=True)
class LPOutcome:
    status: str
    optimum: Fraction | None = None
    assignment: dict[str, Fraction] | None = None
    pivots: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Sparse simplex tableau in the form  B^-1 A x = B^-1 b,  x >= 0."""

    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows          # list[dict[col, Q]]
        self.rhs = rhs            # list[Q]
        self.basis = basis        # list[col]
        self.ncols = ncols
        self.pivots = 0

    def pivot(self, r: int, q: int, obj: dict, objval: list) -> None:
        row = self.rows[r]
        piv = row[q]
        if piv != 1:
            inv = 1 / piv
            for c in row:
                row[c] = row[c] * inv
            self.rhs[r] = self.rhs[r] * inv
        row[q] = _Q(1)
        b = self.rhs[r]
        items = list(row.items())
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(q)
            if f is None:
                continue
            for c, v in items:
                nv = other.get(c, _ZERO) - f * v
                if nv:
                    other[c] = nv
                else:
                    other.pop(c, None)
            other.pop(q, None)
            self.rhs[i] = self.rhs[i] - f * b
        f = obj.get(q)
        if f is not None:
            for c, v in items:
                nv = obj.get(c, _ZERO) - f * v
                if nv:
                    obj[c] = nv
                else:
                    obj.pop(c, None)
            obj.pop(q, None)
            objval[0] = objval[0] - f * b
        self.basis[r] = q
        self.pivots += 1

    def run(self, obj: dict, objval: list, allowed) -> str:
        """Minimize with reduced costs ``obj``; Bland's rule on column order."""
        while True:
            q = None
            for c in sorted(obj):
                if obj[c] < 0 and allowed(c):
                    q = c
                    break
            if q is None:
                return "optimal"
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(q)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], q, obj, objval)


def _standard_form(lp: LinearProgram):
    """Map to  A x' (<=,=,>=) b,  x' >= 0.

    Returns (rows, rels, rhs, ncols, recover, objective) where ``recover`` maps
    a column-value vector back to the original variables.
    """
    col_of: dict[str, list[tuple[int, int]]] = {}
    shift: dict[str, Fraction] = {}
    ncols = 0
    extra_rows = []
    for name in lp.variables:
        lo, hi = lp.bounds.get(name, (Fraction(0), None))
        if lo is not None:
            col_of[name] = [(ncols, 1)]
            shift[name] = lo
            if hi is not None:
                extra_rows.append(({ncols: _Q(1)}, "<=", _Q(hi - lo)))
            ncols += 1
        elif hi is not None:
            col_of[name] = [(ncols, -1)]
            shift[name] = hi
            ncols += 1
        else:
            col_of[name] = [(ncols, 1), (ncols + 1, -1)]
            shift[name] = Fraction(0)
            ncols += 2

    def translate(coeffs: Mapping[str, Fraction]):
        row: dict[int, object] = {}
        const = Fraction(0)
        for name, a in coeffs.items():
            if not a:
                continue
            const += a * shift[name]
            for col, sgn in col_of[name]:
                v = row.get(col, _ZERO) + _Q(a) * sgn
                if v:
                    row[col] = v
                else:
                    row.pop(col, None)
        return row, const

    rows, rels, rhs = [], [], []
    for con in lp.constraints:
        row, const = translate(con.coeffs)
        rows.append(row)
        rels.append(con.relation)
        rhs.append(_Q(con.rhs - const))
    for row, rel, b in extra_rows:
        rows.append(row)
        rels.append(rel)
        rhs.append(b)
    sign = 1 if lp.sense == "min" else -1
    obj, obj_const = translate({k: v * sign for k, v in lp.objective.items()})

    def recover(values: dict[int, object]) -> dict[str, Fraction]:
        out = {}
        for name in lp.variables:
            x = shift[name]
            for col, sgn in col_of[name]:
                v = values.get(col)
                if v is not None:
                    x += Fraction(int(v.numerator), int(v.denominator)) * sgn
            out[name] = x
        return out

    return rows, rels, rhs, ncols, recover, obj


def _phase_one(lp: LinearProgram):
    rows, rels, rhs, ncols, recover, obj = _standard_form(lp)
    m = len(rows)
    trows, trhs, basis = [], [], []
    col = ncols
    slack_cols = []
    for i in range(m):
        row = dict(rows[i])
        rel = rels[i]
        b = rhs[i]
        if b < 0:
            row = {c: -v for c, v in row.items()}
            b = -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        if rel == "<=":
            row[col] = _Q(1)
            basis.append(col)
            slack_cols.append(col)
            col += 1
        elif rel == ">=":
            row[col] = _Q(-1)
            slack_cols.append(col)
            col += 1
            basis.append(None)
        else:
            basis.append(None)
        trows.append(row)
        trhs.append(b)
    first_art = col
    for i in range(m):
        if basis[i] is None:
            trows[i][col] = _Q(1)
            basis[i] = col
            col += 1
    tab = _Tableau(trows, trhs, basis, col)
    # phase-one objective: sum of artificials, expressed in nonbasic terms
    w: dict[int, object] = {}
    wval = [_ZERO]
    for i in range(m):
        if basis[i] >= first_art:
            for c, v in trows[i].items():
                if c < first_art:
                    nv = w.get(c, _ZERO) - v
                    if nv:
                        w[c] = nv
                    else:
                        w.pop(c, None)
            wval[0] -= trhs[i]
    status = tab.run(w, wval, lambda c: True)
    assert status == "optimal"
    if -wval[0] > 0:
        return None, tab, recover, obj, first_art
    # drive remaining artificials out of the basis; drop redundant rows
    r = 0
    while r < len(tab.rows):
        if tab.basis[r] >= first_art:
            q = next((c for c in sorted(tab.rows[r]) if c < first_art), None)
            if q is None:
                del tab.rows[r]
                del tab.rhs[r]
                del tab.basis[r]
                continue
            tab.pivot(r, q, {}, [_ZERO])
        r += 1
    for row in tab.rows:
        for c in [c for c in row if c >= first_art]:
            del row[c]
    return True, tab, recover, obj, first_art


def _values(tab: _Tableau) -> dict[int, object]:
    return {b: v for b, v in zip(tab.basis, tab.rhs)}


def feasible(lp: LinearProgram) -> LPOutcome:
    """Phase one only: a feasible point, or ``infeasible``."""
    lp.check()
    ok, tab, recover, _, _ = _phase_one(lp)
    if ok is None:
        return LPOutcome("infeasible", pivots=tab.pivots)
    x = recover(_values(tab))
    return LPOutcome("optimal", lp.evaluate(x), x, tab.pivots)


def solve(lp: LinearProgram) -> LPOutcome:
    """Exact optimum of ``lp``. Deterministic for a fixed input."""
    lp.check()
    ok, tab, recover, obj, first_art = _phase_one(lp)
    if ok is None:
        return LPOutcome("infeasible", pivots=tab.pivots)
    # reduced costs of the real objective w.r.t. the current basis
    z = {c: v for c, v in obj.items()}
    zval = [_ZERO]
    for r, b in enumerate(tab.basis):
        f = z.get(b)
        if f is None:
            continue
        for c, v in tab.rows[r].items():
            nv = z.get(c, _ZERO) - f * v
            if nv:
                z[c] = nv
            else:
                z.pop(c, None)
        z.pop(b, None)
        zval[0] -= f * tab.rhs[r]
    status = tab.run(z, zval, lambda c: c < first_art)
    if status == "unbounded":
        return LPOutcome("unbounded", pivots=tab.pivots)
    x = recover(_values(tab))
    return LPOutcome("optimal", lp.evaluate(x), x, tab.pivots)
