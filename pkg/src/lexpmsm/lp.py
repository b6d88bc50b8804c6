"""Exact rational linear programming (two-phase simplex, Bland's rule).

Small and dense on purpose: the systems produced by Farkas reduction of
degree-1 templates have at most a few hundred columns, and every answer here
feeds an exactness claim, so floats are not an option.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .poly import ONE, Polynomial, linear_form

ZERO = Fraction(0)


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    values: dict = field(default_factory=dict)
    objective: Optional[Fraction] = None

    @property
    def feasible(self) -> bool:
        return self.status in ("optimal", "unbounded")


class _Tableau:
    """Maximisation tableau; row `obj` holds reduced costs (negative = improving)."""

    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols
        self.obj = [ZERO] * ncols
        self.obj_val = ZERO

    def set_objective(self, costs):
        obj = [-c for c in costs]
        val = ZERO
        for r, b in enumerate(self.basis):
            cb = costs[b]
            if cb:
                row = self.rows[r]
                for j, a in row.items():
                    obj[j] += cb * a
                val += cb * self.rhs[r]
        self.obj = obj
        self.obj_val = val

    def pivot(self, r, c):
        prow = self.rows[r]
        piv = prow[c]
        if piv != 1:
            inv = 1 / piv
            for j in prow:
                prow[j] *= inv
            self.rhs[r] *= inv
        items = list(prow.items())
        prhs = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(c)
            if not f:
                continue
            for j, a in items:
                v = row.get(j, ZERO) - f * a
                if v:
                    row[j] = v
                else:
                    row.pop(j, None)
            self.rhs[i] -= f * prhs
        f = self.obj[c]
        if f:
            for j, a in items:
                self.obj[j] -= f * a
            self.obj_val -= f * prhs
        self.basis[r] = c

    def run(self, allowed=None) -> str:
        while True:
            enter = None
            for j in range(self.ncols):
                if self.obj[j] < 0 and (allowed is None or allowed[j]):
                    enter = j
                    break
            if enter is None:
                return "optimal"
            leave = None
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(enter)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                return "unbounded"
            self.pivot(leave, enter)


def _simplex(A: Sequence[dict], senses: Sequence[str], b: Sequence[Fraction],
             c: Sequence[Fraction], n: int):
    """max c.y s.t. A y (sense) b, y >= 0. Returns (status, y, value)."""
    rows, rhs, basis = [], [], []
    ncols = n
    art_cols = []
    pending = []
    for a, s, bi in zip(A, senses, b):
        a = dict(a)
        if bi < 0:
            a = {j: -v for j, v in a.items()}
            bi = -bi
            s = {"<=": ">=", ">=": "<=", "==": "=="}[s]
        pending.append((a, s, bi))
    for a, s, bi in pending:
        row = {j: Fraction(v) for j, v in a.items() if v}
        if s == "<=":
            row[ncols] = Fraction(1)
            basis.append(ncols)
            ncols += 1
        else:
            if s == ">=":
                row[ncols] = Fraction(-1)
                ncols += 1
            row[ncols] = Fraction(1)
            basis.append(ncols)
            art_cols.append(ncols)
            ncols += 1
        rows.append(row)
        rhs.append(Fraction(bi))
    tab = _Tableau(rows, rhs, basis, ncols)
    is_art = [False] * ncols
    for j in art_cols:
        is_art[j] = True
    if art_cols:
        costs = [ZERO] * ncols
        for j in art_cols:
            costs[j] = Fraction(-1)
        tab.set_objective(costs)
        tab.run()
        if tab.obj_val < 0:
            return "infeasible", None, None
        # drive remaining artificials out of the basis
        r = 0
        while r < len(tab.rows):
            if is_art[tab.basis[r]]:
                col = next((j for j in sorted(tab.rows[r]) if not is_art[j]), None)
                if col is None:
                    del tab.rows[r], tab.rhs[r], tab.basis[r]
                    continue
                tab.pivot(r, col)
            r += 1
        for row in tab.rows:
            for j in art_cols:
                row.pop(j, None)
    costs = [ZERO] * ncols
    for j in range(n):
        costs[j] = Fraction(c[j]) if j < len(c) else ZERO
    tab.set_objective(costs)
    allowed = [not x for x in is_art]
    status = tab.run(allowed)
    y = [ZERO] * n
    for r, bv in enumerate(tab.basis):
        if bv < n:
            y[bv] = tab.rhs[r]
    if status == "unbounded":
        return "unbounded", y, None
    return "optimal", y, tab.obj_val


def solve_lp(variables: Sequence[str], rows: Iterable[tuple], objective: Mapping[str, Fraction] | None = None,
             lower: Mapping[str, Fraction] | None = None, upper: Mapping[str, Fraction] | None = None) -> LPResult:
    """Maximise `objective` subject to rows (coeffs: dict, sense, rhs).

    sense is one of "<=", ">=", "==", "<", ">". Variables are free unless a
    bound is given. Strict rows are handled by maximising a common slack
    first; a witness with that slack fixed to half its optimum is then
    optimised for the real objective.
    """
    variables = list(variables)
    lower = dict(lower or {})
    upper = dict(upper or {})
    rows = [(dict(a), s, Fraction(r)) for a, s, r in rows]
    strict = any(s in ("<", ">") for _, s, _ in rows)
    if strict:
        delta = "__delta"
        base = [(a, s, r) for a, s, r in rows]
        relaxed = []
        for a, s, r in base:
            if s == "<":
                a = dict(a)
                a[delta] = Fraction(1)
                relaxed.append((a, "<=", r))
            elif s == ">":
                a = dict(a)
                a[delta] = Fraction(-1)
                relaxed.append((a, ">=", r))
            else:
                relaxed.append((a, s, r))
        lo = dict(lower)
        up = dict(upper)
        lo[delta] = ZERO
        up[delta] = Fraction(1)
        probe = _solve_nonstrict(variables + [delta], relaxed, {delta: Fraction(1)}, lo, up)
        if probe.status != "optimal" or probe.objective <= 0:
            return LPResult("infeasible")
        if not objective:
            vals = {v: probe.values[v] for v in variables}
            return LPResult("optimal", vals, ZERO)
        fixed = probe.objective / 2
        lo[delta] = fixed
        up[delta] = fixed
        res = _solve_nonstrict(variables + [delta], relaxed, objective, lo, up)
        if res.status == "infeasible":  # cannot happen, kept for safety
            return res
        res.values.pop(delta, None)
        return res
    return _solve_nonstrict(variables, rows, objective or {}, lower, upper)


def _solve_nonstrict(variables, rows, objective, lower, upper) -> LPResult:
    # y-columns: each variable maps to (col, sign, shift) pieces
    cols = []  # list of (var, sign)
    shift = {}
    expand = {}
    for v in variables:
        lo = lower.get(v)
        if lo is not None:
            shift[v] = Fraction(lo)
            expand[v] = [(len(cols), 1)]
            cols.append((v, 1))
        else:
            shift[v] = ZERO
            expand[v] = [(len(cols), 1), (len(cols) + 1, -1)]
            cols.append((v, 1))
            cols.append((v, -1))
    A, S, B = [], [], []
    for a, s, r in rows:
        row = {}
        rr = Fraction(r)
        for v, coef in a.items():
            coef = Fraction(coef)
            if not coef:
                continue
            if v not in expand:
                raise KeyError(f"undeclared LP variable {v!r}")
            rr -= coef * shift[v]
            for j, sg in expand[v]:
                row[j] = row.get(j, ZERO) + sg * coef
        A.append(row)
        S.append(s)
        B.append(rr)
    for v, hi in upper.items():
        if hi is None:
            continue
        row = {j: Fraction(sg) for j, sg in expand[v]}
        A.append(row)
        S.append("<=")
        B.append(Fraction(hi) - shift[v])
    c = [ZERO] * len(cols)
    for v, coef in (objective or {}).items():
        for j, sg in expand[v]:
            c[j] += sg * Fraction(coef)
    status, y, val = _simplex(A, S, B, c, len(cols))
    if status == "infeasible":
        return LPResult("infeasible")
    values = {}
    for v in variables:
        values[v] = shift[v] + sum((sg * y[j] for j, sg in expand[v]), ZERO)
    if status == "unbounded":
        return LPResult("unbounded", values, None)
    const = sum((Fraction(coef) * shift[v] for v, coef in (objective or {}).items()), ZERO)
    return LPResult("optimal", values, val + const)


_OPS = {">=": ">=", ">": ">", "==": "==", "=": "==", "<=": "<=", "<": "<"}


def solve_constraints(constraints: Iterable[tuple], variables: Sequence[str] | None = None,
                      objective: Polynomial | None = None, lower=None, upper=None) -> LPResult:
    """Constraints are (poly, op) meaning `poly op 0` with `poly` linear."""
    cons = list(constraints)
    if variables is None:
        vs = set()
        for p, _ in cons:
            vs |= p.variables()
        if objective is not None:
            vs |= objective.variables()
        variables = sorted(vs)
    variables = list(variables)
    rows = []
    for p, op in cons:
        coeffs, const = linear_form(p, variables)
        if not const.is_constant() or any(not q.is_constant() for q in coeffs.values()):
            raise ValueError(f"constraint {p} mentions undeclared variables")
        row = {v: q.constant_term for v, q in coeffs.items()}
        rows.append((row, _OPS[op], -const.constant_term))
    obj = None
    if objective is not None:
        coeffs, _ = linear_form(objective, variables)
        obj = {v: q.constant_term for v, q in coeffs.items()}
    return solve_lp(variables, rows, obj, lower, upper)


def solve_linear(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction]:
    """Exact Gauss-Jordan for a square nonsingular system."""
    n = len(matrix)
    M = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        if p != 1:
            M[col] = [x / p for x in M[col]]
        prow = M[col]
        nz = [j for j in range(col, n + 1) if prow[j]]
        for r in range(n):
            if r != col:
                f = M[r][col]
                if f:
                    row = M[r]
                    for j in nz:
                        row[j] -= f * prow[j]
    return [M[i][n] for i in range(n)]


def is_linear(p: Polynomial, among: Iterable[str] | None = None) -> bool:
    return p.degree(among) <= 1


__all__ = ["LPResult", "solve_lp", "solve_constraints", "solve_linear", "is_linear", "ONE"]
