"""Polynomial quantified entailments and how they get solved.

A PQE reads  forall x. /\\ p_i(t, x) rel_i 0  =>  q(t, x) rel 0  with
unknown parameters t. The linear fragment (degree <= 1 in x) is compiled
to an existential system over t plus Farkas multipliers and solved exactly
in-house; anything else is emitted as SMT-LIB and handed to an external
solver.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .lp import solve_constraints
from .model import Atom, Rel
from .poly import ONE, Polynomial, as_fraction, fraction_str

SOLVER_ENV = "LEXPMSM_SOLVER_CMD"


class NotLinear(ValueError):
    pass


@dataclass(frozen=True)
class Pqe:
    universals: tuple
    antecedent: tuple  # of Atom
    consequent: Atom
    label: str = ""

    def __post_init__(self):
        if self.consequent.rel not in (Rel.GE, Rel.GT):
            raise ValueError("consequent relation must be >= or >")

    def parameters(self) -> list[str]:
        u = set(self.universals)
        ps = set()
        for a in self.antecedent + (self.consequent,):
            ps |= a.poly.variables() - u
        return sorted(ps)

    def is_linear(self) -> bool:
        return all(a.poly.degree(self.universals) <= 1 for a in self.antecedent + (self.consequent,))

    def instantiate(self, model: Mapping[str, Fraction]) -> "Pqe":
        m = {k: v for k, v in model.items() if k not in self.universals}
        return Pqe(self.universals, tuple(a.subs(m) for a in self.antecedent), self.consequent.subs(m), self.label)

    def holds_at(self, env: Mapping) -> bool:
        """Implication evaluated at one point (parameters must be in env)."""
        if all(a.holds(env) for a in self.antecedent):
            return self.consequent.holds(env)
        return True

    def __str__(self):
        ante = " && ".join(str(a) for a in self.antecedent) or "true"
        return f"forall {', '.join(self.universals)}. {ante} => {self.consequent}"


@dataclass
class ParamSystem:
    parameters: list
    constraints: list  # Atom over parameters only
    objective: Optional[Polynomial] = None
    lower: dict = field(default_factory=dict)
    upper: dict = field(default_factory=dict)
    raw: list = field(default_factory=list)  # PQEs kept quantified (nonlinear fallback)

    def extend(self, other: "ParamSystem") -> "ParamSystem":
        seen = set(self.parameters)
        for p in other.parameters:
            if p not in seen:
                self.parameters.append(p)
                seen.add(p)
        self.constraints.extend(other.constraints)
        self.lower.update(other.lower)
        self.upper.update(other.upper)
        self.raw.extend(other.raw)
        return self

    def is_linear(self) -> bool:
        return not self.raw and all(a.poly.degree() <= 1 for a in self.constraints) and \
            (self.objective is None or self.objective.degree() <= 1)

    def check_declared(self):
        declared = set(self.parameters)
        for a in self.constraints:
            extra = a.poly.variables() - declared
            if extra:
                raise ValueError(f"constraint mentions undeclared parameters {sorted(extra)}")


def _linear_parts(p: Polynomial, universals: Sequence[str]) -> dict:
    """Coefficient (polynomial in parameters) of each universal monomial 1, x_1..x_n."""
    out = {}
    for mono, coeff in p.split(universals).items():
        if mono != () and not (len(mono) == 1 and mono[0][1] == 1):
            raise NotLinear(f"{p} has degree > 1 in {list(universals)}")
        key = None if mono == () else mono[0][0]
        out[key] = coeff
    return out


def antecedent_feasible(atoms: Sequence[Atom], universals: Sequence[str]) -> bool:
    cons = [(a.poly, a.rel.value) for a in atoms]
    if not cons:
        return True
    return solve_constraints(cons, list(universals)).feasible


def farkas_reduce(pqe: Pqe, prefix: str = "lam") -> ParamSystem:
    """Existential system over parameters and multipliers equivalent to the PQE.

    Parameter-free antecedents are first checked for feasibility; an empty
    antecedent makes the PQE vacuous and yields the empty system. With a
    feasible antecedent, strict rows may be relaxed to their closures when
    the consequent is non-strict; a strict consequent needs the slack or a
    strict row to carry positive weight.
    """
    U = tuple(pqe.universals)
    if not pqe.is_linear():
        raise NotLinear(f"PQE {pqe.label or pqe} is not linear in its universals")
    params = pqe.parameters()
    ante_params = set()
    for a in pqe.antecedent:
        ante_params |= a.poly.variables() - set(U)
    if not ante_params and not antecedent_feasible(pqe.antecedent, U):
        return ParamSystem(list(params), [])
    lam0 = f"{prefix}_0"
    lams = [f"{prefix}_{i + 1}" for i in range(len(pqe.antecedent))]
    combo: dict = {}
    slack_terms = Polynomial.var(lam0)
    lower = {lam0: Fraction(0)}
    for lam, a in zip(lams, pqe.antecedent):
        if a.rel is not Rel.EQ:
            lower[lam] = Fraction(0)
        for k, c in _linear_parts(a.poly, U).items():
            combo[k] = combo.get(k, Polynomial()) + c * Polynomial.var(lam)
    target = _linear_parts(pqe.consequent.poly, U)
    cons = []
    for k in sorted(set(combo) | set(target) | {None}, key=lambda k: (k is not None, k or "")):
        lhs = target.get(k, Polynomial())
        rhs = combo.get(k, Polynomial())
        if k is None:
            rhs = rhs + slack_terms
        cons.append(Atom(lhs - rhs, Rel.EQ))
    if pqe.consequent.rel is Rel.GT:
        strict = Polynomial.var(lam0)
        for lam, a in zip(lams, pqe.antecedent):
            if a.rel is Rel.GT:
                strict = strict + Polynomial.var(lam)
        cons.append(Atom(strict, Rel.GT))
    return ParamSystem(list(params) + [lam0] + lams, cons, lower=dict(lower))


# -- SMT-LIB emission --------------------------------------------------------

def smt_number(q) -> str:
    q = as_fraction(q)
    if q < 0:
        return f"(- {smt_number(-q)})"
    if q.denominator == 1:
        return f"{q.numerator}.0"
    return f"(/ {q.numerator}.0 {q.denominator}.0)"


def _smt_name(v: str) -> str:
    return v if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v) else f"|{v}|"


def smt_poly(p: Polynomial) -> str:
    if not p.terms:
        return "0.0"
    terms = []
    for mono in sorted(p.terms, key=lambda m: (len(m), m)):
        c = p.terms[mono]
        factors = []
        for v, e in mono:
            factors.extend([_smt_name(v)] * e)
        if not factors:
            terms.append(smt_number(c))
        elif c == 1:
            terms.append(factors[0] if len(factors) == 1 else f"(* {' '.join(factors)})")
        else:
            terms.append(f"(* {smt_number(c)} {' '.join(factors)})")
    return terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"


def smt_atom(a: Atom) -> str:
    op = {Rel.GE: ">=", Rel.GT: ">", Rel.EQ: "="}[a.rel]
    return f"({op} {smt_poly(a.poly)} 0.0)"


def smt_pqe(q: Pqe) -> str:
    body_cons = smt_atom(q.consequent)
    if q.antecedent:
        ante = " ".join(smt_atom(a) for a in q.antecedent)
        body = f"(=> (and {ante}) {body_cons})" if len(q.antecedent) > 1 else f"(=> {ante} {body_cons})"
    else:
        body = body_cons
    if not q.universals:
        return body
    binders = " ".join(f"({_smt_name(x)} Real)" for x in q.universals)
    return f"(forall ({binders}) {body})"


def linear_constraints(system: ParamSystem) -> bool:
    return all(a.poly.degree() <= 1 for a in system.constraints)


def emit_smt(system, optimize: bool = False) -> str:
    """SMT-LIB2 text for a ParamSystem or a list of raw PQEs."""
    if not isinstance(system, ParamSystem):
        pqes = list(system)
        params = []
        seen = set()
        for q in pqes:
            for p in q.parameters():
                if p not in seen:
                    seen.add(p)
                    params.append(p)
        system = ParamSystem(params, [], raw=pqes)
    linear = system.is_linear()
    if system.raw:
        flat = all(a.poly.degree() <= 1 for q in system.raw for a in (q.consequent,) + q.antecedent)
        logic = "LRA" if flat and linear_constraints(system) else "NRA"
    else:
        logic = "QF_LRA" if linear else "QF_NRA"
    lines = [f"(set-logic {logic})", "(set-option :produce-models true)"]
    for p in system.parameters:
        lines.append(f"(declare-const {_smt_name(p)} Real)")
    for p in system.parameters:
        if p in system.lower and system.lower[p] is not None:
            lines.append(f"(assert (>= {_smt_name(p)} {smt_number(system.lower[p])}))")
        if p in system.upper and system.upper[p] is not None:
            lines.append(f"(assert (<= {_smt_name(p)} {smt_number(system.upper[p])}))")
    for a in system.constraints:
        lines.append(f"(assert {smt_atom(a)})")
    for q in system.raw:
        if q.label:
            lines.append(f"; {q.label}")
        lines.append(f"(assert {smt_pqe(q)})")
    if system.objective is not None:
        if optimize:
            lines.append(f"(maximize {smt_poly(system.objective)})")
        else:
            lines.append(f"(assert (> {smt_poly(system.objective)} 0.0))")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# -- solver bridge -----------------------------------------------------------

@dataclass
class SolverResult:
    status: str  # "sat" | "unsat" | "unknown"
    model: dict = field(default_factory=dict)
    diagnostics: str = ""
    seconds: float = 0.0


def _tokenize(text: str):
    return re.findall(r"\(|\)|\|[^|]*\||[^\s()]+", text)


def parse_sexprs(text: str) -> list:
    toks = _tokenize(text)
    pos = 0

    def one():
        nonlocal pos
        t = toks[pos]
        pos += 1
        if t == "(":
            out = []
            while toks[pos] != ")":
                out.append(one())
            pos += 1
            return out
        if t == ")":
            raise ValueError("unbalanced parenthesis")
        return t

    out = []
    while pos < len(toks):
        out.append(one())
    return out


def _value(expr) -> Fraction:
    if isinstance(expr, str):
        if re.fullmatch(r"-?\d+(\.\d+)?", expr):
            return Fraction(expr)
        raise ValueError(f"cannot read value {expr!r}")
    head = expr[0]
    if head == "-" and len(expr) == 2:
        return -_value(expr[1])
    if head == "-" and len(expr) == 3:
        return _value(expr[1]) - _value(expr[2])
    if head == "/" and len(expr) == 3:
        return _value(expr[1]) / _value(expr[2])
    if head == "+":
        return sum((_value(e) for e in expr[1:]), Fraction(0))
    if head == "*":
        out = Fraction(1)
        for e in expr[1:]:
            out *= _value(e)
        return out
    raise ValueError(f"cannot read value {expr!r}")


def parse_model(text: str) -> dict:
    model = {}
    for top in parse_sexprs(text):
        if not isinstance(top, list):
            continue
        items = top[1:] if top and top[0] == "model" else top
        for d in items:
            if isinstance(d, list) and len(d) == 5 and d[0] == "define-fun" and d[2] == [] and d[3] == "Real":
                name = d[1].strip("|")
                model[name] = _value(d[4])
    return model


def default_solver_cmd() -> Optional[str]:
    return os.environ.get(SOLVER_ENV) or None


def run_solver(document: str, command: str = "z3 -smt2 {file}", timeout: float = 60.0) -> SolverResult:
    t0 = time.perf_counter()
    fd, path = tempfile.mkstemp(suffix=".smt2", prefix="lexpmsm_")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(document)
        if "{file}" in command:
            argv = shlex.split(command.replace("{file}", shlex.quote(path)))
        else:
            argv = shlex.split(command) + [path]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        except subprocess.TimeoutExpired:
            return SolverResult("unknown", diagnostics=f"timeout after {timeout}s", seconds=time.perf_counter() - t0)
        except OSError as exc:
            return SolverResult("unknown", diagnostics=f"cannot run solver: {exc}", seconds=time.perf_counter() - t0)
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass
    out = proc.stdout.strip()
    secs = time.perf_counter() - t0
    first = out.split("\n", 1)[0].strip() if out else ""
    if first == "unsat":
        return SolverResult("unsat", seconds=secs)
    if first == "sat":
        try:
            model = parse_model(out.split("\n", 1)[1] if "\n" in out else "")
        except (ValueError, IndexError) as exc:
            return SolverResult("unknown", diagnostics=f"model parse failure: {exc}", seconds=secs)
        return SolverResult("sat", model=model, seconds=secs)
    diag = (proc.stderr.strip() or out or f"exit code {proc.returncode}")[:2000]
    return SolverResult("unknown", diagnostics=diag, seconds=secs)


def validate_model(system: ParamSystem, model: Mapping[str, Fraction]) -> tuple[bool, list]:
    """Exact substitution; returns (ok, violated constraint descriptions)."""
    env = {p: as_fraction(model.get(p, 0)) for p in system.parameters}
    bad = []
    for a in system.constraints:
        if not a.holds(env):
            bad.append(f"{a} evaluates to {fraction_str(a.poly.evaluate(env))}")
    for p, lo in system.lower.items():
        if env.get(p, Fraction(0)) < lo:
            bad.append(f"{p} below {lo}")
    for p, hi in system.upper.items():
        if env.get(p, Fraction(0)) > hi:
            bad.append(f"{p} above {hi}")
    return (not bad), bad


# -- backends ----------------------------------------------------------------

@dataclass
class Entailment:
    status: str  # "valid" | "invalid" | "unknown"
    witness: Optional[dict] = None
    reason: str = ""


class BuiltinBackend:
    """Exact rational LP; answers `unknown` on anything nonlinear."""

    name = "builtin-lp"
    supports_opt = True

    def solve(self, system: ParamSystem, optimize: bool = True) -> SolverResult:
        t0 = time.perf_counter()
        if not system.is_linear():
            return SolverResult("unknown", diagnostics="builtin backend handles linear systems only")
        cons = [(a.poly, a.rel.value) for a in system.constraints]
        obj = system.objective
        if obj is not None and not optimize:
            cons.append((obj, ">"))
            obj = None
        res = solve_constraints(cons, system.parameters, obj, system.lower, system.upper)
        secs = time.perf_counter() - t0
        if res.status == "infeasible":
            return SolverResult("unsat", seconds=secs)
        if res.status == "unbounded":
            return SolverResult("unknown", model=res.values, diagnostics="objective unbounded", seconds=secs)
        return SolverResult("sat", model=res.values, seconds=secs)

    def entails(self, pqe: Pqe) -> Entailment:
        return _entails_lp(pqe)


class SmtBackend:
    """External SMT-LIB solver driven through a subprocess."""

    def __init__(self, command: str, timeout: float = 60.0, supports_opt: bool = True):
        self.command = command
        self.timeout = timeout
        self.supports_opt = supports_opt
        self.name = f"smt:{command.split()[0] if command.split() else command}"

    def solve(self, system: ParamSystem, optimize: bool = True) -> SolverResult:
        doc = emit_smt(system, optimize=optimize and self.supports_opt)
        res = run_solver(doc, self.command, self.timeout)
        if res.status == "sat":
            model = {p: res.model.get(p, Fraction(0)) for p in system.parameters}
            ok, bad = validate_model(system, model)
            if not ok:
                return SolverResult("unknown", model, "solver model fails exact validation: " + "; ".join(bad[:3]),
                                    res.seconds)
            res.model = model
        return res

    def entails(self, pqe: Pqe) -> Entailment:
        if pqe.is_linear():
            return _entails_lp(pqe)
        return _entails_smt(pqe, self.command, self.timeout)


def default_backend():
    cmd = default_solver_cmd()
    return SmtBackend(cmd) if cmd else BuiltinBackend()


def _negation(a: Atom) -> Atom:
    return Atom(-a.poly, Rel.GT if a.rel is Rel.GE else Rel.GE)


def _entails_lp(pqe: Pqe) -> Entailment:
    if pqe.parameters():
        raise ValueError(f"entailment check needs a parameter-free PQE, found {pqe.parameters()}")
    if not pqe.is_linear():
        return Entailment("unknown", reason="nonlinear entailment needs an external solver")
    cons = [(a.poly, a.rel.value) for a in pqe.antecedent]
    neg = _negation(pqe.consequent)
    cons.append((neg.poly, neg.rel.value))
    res = solve_constraints(cons, list(pqe.universals))
    if res.feasible:
        return Entailment("invalid", witness={v: res.values.get(v, Fraction(0)) for v in pqe.universals})
    return Entailment("valid")


def _entails_smt(pqe: Pqe, command: str, timeout: float) -> Entailment:
    lines = ["(set-logic QF_NRA)", "(set-option :produce-models true)"]
    for v in pqe.universals:
        lines.append(f"(declare-const {_smt_name(v)} Real)")
    for a in pqe.antecedent:
        lines.append(f"(assert {smt_atom(a)})")
    lines.append(f"(assert {smt_atom(_negation(pqe.consequent))})")
    lines += ["(check-sat)", "(get-model)"]
    res = run_solver("\n".join(lines) + "\n", command, timeout)
    if res.status == "unsat":
        return Entailment("valid")
    if res.status == "sat":
        w = {v: res.model.get(v, Fraction(0)) for v in pqe.universals}
        if not pqe.holds_at(w):
            return Entailment("invalid", witness=w)
        return Entailment("unknown", reason="solver witness does not reproduce exactly")
    return Entailment("unknown", reason=res.diagnostics)


def check_entailment(pqe: Pqe, backend=None) -> Entailment:
    """Decide a parameter-free PQE; linear ones exactly, others via the backend."""
    if pqe.is_linear():
        return _entails_lp(pqe)
    backend = backend or default_backend()
    if hasattr(backend, "entails") and isinstance(backend, SmtBackend):
        return backend.entails(pqe)
    return _entails_sampling(pqe)


def _entails_sampling(pqe: Pqe, tries: int = 4000) -> Entailment:
    import random

    rng = random.Random(0)
    for _ in range(tries):
        env = {v: Fraction(rng.randint(-400, 400), rng.choice([1, 2, 3, 4, 8])) for v in pqe.universals}
        if not pqe.holds_at(env):
            return Entailment("invalid", witness=env)
    return Entailment("unknown", reason="nonlinear entailment: no counterexample among samples, no SMT solver set")
