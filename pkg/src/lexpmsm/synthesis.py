"""Iterative synthesis of LexPMSM maps.

For each block j the inner loop repeatedly asks for templates that are
non-increasing on every active region and strictly decreasing on as many
as possible; regions that decrease strictly (re-verified exactly) leave the
active set T. Odd priorities 2j-1 must all be gone when block j closes.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .certificates import STAR, LexPmsMap, SymbolicSystem, check_lexpmsm_map
from .lp import solve_constraints
from .model import FiniteChain, Pcfg, PriorityPartition
from .pqe import NotLinear, ParamSystem, Pqe, check_entailment, default_backend, farkas_reduce
from .poly import Polynomial, fraction_str
from .symbolic import Feasibility, decrease_pqe, expand, nonneg_pqes, template

log = logging.getLogger(__name__)


@dataclass
class TemplateConfig:
    degree: int = 1
    coeff_bound: Optional[Fraction] = None  # box |c| <= bound on template coefficients
    max_inner: Optional[int] = None  # per block; default |keys| * d
    optimize: bool = True

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("template degree must be >= 0")
        if self.coeff_bound is not None:
            self.coeff_bound = Fraction(self.coeff_bound)
            if self.coeff_bound <= 0:
                raise ValueError("coefficient bound must be positive")


@dataclass
class Round:
    j: int
    k: int  # 0-based inner index
    before: list
    removed: list
    after: list
    status: str  # sat | unsat | unknown
    mode: str  # opt | threshold | exact
    seconds: float
    values: dict = field(default_factory=dict)  # key -> str
    diagnostics: str = ""

    def to_json(self) -> dict:
        return {"j": self.j, "k": self.k, "before": [_kj(x) for x in self.before],
                "removed": [_kj(x) for x in self.removed], "after": [_kj(x) for x in self.after],
                "status": self.status, "mode": self.mode, "seconds": round(self.seconds, 6),
                "values": {str(_kj(k)): v for k, v in sorted(self.values.items(), key=lambda kv: str(kv[0]))},
                "diagnostics": self.diagnostics}


def _kj(k):
    return list(k) if isinstance(k, tuple) else k


@dataclass
class SynthesisTrace:
    rounds: list = field(default_factory=list)
    result: str = ""
    seconds: float = 0.0
    backend: str = ""

    def to_json(self) -> dict:
        return {"result": self.result, "seconds": round(self.seconds, 6), "backend": self.backend,
                "rounds": [r.to_json() for r in self.rounds]}


@dataclass
class NotFound:
    j: int
    stuck: list
    trace: SynthesisTrace
    reason: str = "no LexPMSM map found"


class SynthesisError(RuntimeError):
    """Backend failure (not infeasibility)."""


@dataclass(frozen=True)
class Obligation:
    key: tuple
    pqe: Pqe


# -- constraints -------------------------------------------------------------

def make_templates(pcfg: Pcfg, keys, degree: int) -> tuple[dict, list]:
    temps, params = {}, []
    for idx, key in enumerate(keys):
        poly, names = template(f"tpl_{idx}", pcfg.vars, degree)
        temps[key] = (poly,)
        params.extend(names)
    return temps, params


def build_constraints(pcfg: Pcfg, partition: PriorityPartition, T, templates: dict, cases=None):
    """(c0, c1) as lists of Obligation; c0 also carries non-negativity on every region."""
    cases = cases if cases is not None else expand(pcfg, partition)
    c0, c1 = [], []
    for key in sorted(T):
        for case in cases[key]:
            c0.append(Obligation(key, decrease_pqe(pcfg, case, templates, 0, 0)))
            c1.append(Obligation(key, decrease_pqe(pcfg, case, templates, 0, 1)))
    for q in nonneg_pqes(pcfg, partition, templates, 0):
        c0.append(Obligation(None, q))
    return c0, c1


def streett_template_system(pcfg: Pcfg, partition: PriorityPartition, kind: str = "gssm", degree: int = 1,
                            pair: Optional[int] = None, epsilon=1, M_bound=None) -> ParamSystem:
    """One-shot existential system for a scalar GSSM or SSM template.

    For an SSM the bound M is an extra unknown `ssm_M` in [0, M_bound] (M_bound=None
    leaves it unbounded above). Roles follow pair q: priority <= 2q-2 is B,
    2q-1 is A.
    """
    kind = kind.lower()
    if kind not in ("gssm", "ssm"):
        raise ValueError(f"template system for {kind!r} is not supported")
    q = pair or ((partition.sink_priority + 1) // 2 if partition.sink_priority % 2 else partition.sink_priority // 2)
    keys = partition.keys()
    temps, params = make_templates(pcfg, keys, degree)
    cases = expand(pcfg, partition, keys)
    M = Polynomial.var("ssm_M")
    system = ParamSystem(list(params), [])
    if kind == "ssm":
        system.parameters.append("ssm_M")
        system.lower["ssm_M"] = Fraction(0)
        if M_bound is not None:
            system.upper["ssm_M"] = Fraction(M_bound)
    obligations = list(nonneg_pqes(pcfg, partition, temps, 0))
    for key in keys:
        p = key[1]
        role = "B" if p <= 2 * q - 2 else "A" if p == 2 * q - 1 else "N"
        if role == "B" and kind == "gssm":
            continue
        off = {"A": Polynomial.const(Fraction(epsilon)), "B": -M, "N": Polynomial()}[role]
        obligations += [decrease_pqe(pcfg, case, temps, 0, off) for case in cases[key]]
    for i, ob in enumerate(obligations):
        system.extend(_reduce(ob, f"lam{i}"))
    return system


def _reduce(q: Pqe, prefix: str) -> ParamSystem:
    try:
        return farkas_reduce(q, prefix)
    except NotLinear:
        return ParamSystem(list(q.parameters()), [], raw=[q])


def _eps_name(idx: int) -> str:
    return f"eps_{idx}"


def round_system(c0, c1, params: list, config: TemplateConfig) -> tuple[ParamSystem, dict]:
    """Existential system with one eps in [0, 1] per active key; objective sum of eps."""
    keys = sorted({ob.key for ob in c1})
    eps = {key: _eps_name(i) for i, key in enumerate(keys)}
    system = ParamSystem(list(params), [])
    if config.coeff_bound is not None:
        for p in params:
            system.lower[p] = -config.coeff_bound
            system.upper[p] = config.coeff_bound
    n = 0
    for ob in c0:
        if ob.key is not None and ob.key in eps:
            continue  # implied by the relaxed strict row below
        system.extend(_reduce(ob.pqe, f"lam_{n}"))
        n += 1
    for ob in c1:
        e = Polynomial.var(eps[ob.key])
        q = ob.pqe
        relaxed = Pqe(q.universals, q.antecedent,
                      type(q.consequent)(q.consequent.poly + 1 - e, q.consequent.rel), q.label)
        system.extend(_reduce(relaxed, f"lam_{n}"))
        n += 1
    for name in eps.values():
        if name not in system.parameters:
            system.parameters.append(name)
        system.lower[name] = Fraction(0)
        system.upper[name] = Fraction(1)
    if eps:
        system.objective = sum((Polynomial.var(x) for x in eps.values()), Polynomial())
    return system, eps


def solve_round(c0, c1, params: list, config: TemplateConfig, backend=None):
    """Solve c0 while satisfying as many c1 as possible.

    Returns (status, scaled model, eps by key, mode, diagnostics). Strict
    progress is decided by the caller through exact re-verification.
    """
    backend = backend or default_backend()
    system, eps = round_system(c0, c1, params, config)
    mode = "opt"
    if eps:
        mode = "opt" if (config.optimize and getattr(backend, "supports_opt", False)) else "threshold"
    res = backend.solve(system, optimize=(mode == "opt"))
    if res.status == "unsat" and mode == "threshold":
        return "sat", {p: Fraction(0) for p in params}, {}, mode, "no strict progress possible"
    if res.status != "sat":
        return res.status, None, {}, mode, res.diagnostics
    model = {p: Fraction(res.model.get(p, 0)) for p in system.parameters}
    ev = {key: model.get(name, Fraction(0)) for key, name in eps.items()}
    pos = [v for v in ev.values() if v > 0]
    scale = 1 / min(pos) if pos else Fraction(1)
    scaled = {p: model[p] * scale for p in params}
    return "sat", scaled, ev, mode, res.diagnostics


def _verified(c1, model, backend) -> set:
    ok: dict = {}
    for ob in c1:
        if ok.get(ob.key) is False:
            continue
        r = check_entailment(ob.pqe.instantiate(model), backend)
        ok[ob.key] = r.status == "valid"
    return {k for k, v in ok.items() if v}


# -- main loop ---------------------------------------------------------------

def _assemble(keys, blocks: list, lev: dict, zero) -> tuple:
    shape = tuple(len(b) for b in blocks)
    values = {key: tuple(tuple(comp.get(key, zero) for comp in b) for b in blocks) for key in keys}
    return shape, values


def _loop(keys, priority, d: int, round_fn, config: TemplateConfig, trace: SynthesisTrace, zero):
    T = set(keys)
    lev: dict = {}
    blocks = []
    limit = config.max_inner or max(1, len(keys) * d)
    for j in range(1, math.ceil(d / 2) + 1):
        for key in sorted(k for k in T if priority(k) < 2 * j - 1):
            lev[key] = STAR
            T.discard(key)
        comps = []
        k = 0
        while True:
            before = sorted(T)
            values, removed, rnd = round_fn(j, k, T)
            T -= removed
            rnd.before, rnd.removed, rnd.after = before, sorted(removed), sorted(T)
            trace.rounds.append(rnd)
            log.info("round (%d,%d): removed %s", j, k, sorted(removed))
            if removed:
                comps.append(values)
                for key in removed:
                    lev[key] = (j, len(comps))
            k += 1
            if not removed:
                break
            if k > limit:
                raise SynthesisError(f"inner loop exceeded {limit} rounds at block {j}")
        stuck = sorted(key for key in T if priority(key) == 2 * j - 1)
        if stuck:
            return NotFound(j, stuck, trace)
        blocks.append(comps if comps else [{}])
    for key in T:
        lev[key] = STAR
    shape, values = _assemble(keys, blocks, lev, zero)
    return LexPmsMap(shape, lev, values)


def synthesize(pcfg: Pcfg, partition: PriorityPartition, config: Optional[TemplateConfig] = None,
               backend=None, verify: bool = True):
    """LexPmsMap or NotFound; returns (result, trace)."""
    config = config or TemplateConfig()
    backend = backend or default_backend()
    t0 = time.perf_counter()
    trace = SynthesisTrace(backend=getattr(backend, "name", type(backend).__name__))
    keys = partition.keys()
    feasible = Feasibility(pcfg.vars)
    cases = expand(pcfg, partition, feasible=feasible)
    templates, params = make_templates(pcfg, keys, config.degree)

    def round_fn(j, k, T):
        t1 = time.perf_counter()
        c0, c1 = build_constraints(pcfg, partition, T, templates, cases)
        status, model, ev, mode, diag = solve_round(c0, c1, params, config, backend)
        if status != "sat":
            raise SynthesisError(f"round ({j},{k}): solver returned {status}: {diag}")
        removed = _verified(c1, model, backend) if T else set()
        vals = {key: templates[key][0].subs({p: Polynomial.const(v) for p, v in model.items()}) for key in keys}
        rnd = Round(j, k, [], [], [], status, mode, time.perf_counter() - t1,
                    {key: str(v) for key, v in vals.items()}, diag or "")
        return vals, removed, rnd

    result = _loop(keys, lambda key: key[1], partition.d, round_fn, config, trace, Polynomial())
    trace.seconds = time.perf_counter() - t0
    if isinstance(result, NotFound):
        trace.result = "not-found"
        return result, trace
    if verify:
        v = check_lexpmsm_map(SymbolicSystem(pcfg, partition, backend), result)
        if v.status == "reject":
            raise SynthesisError(f"synthesised map fails re-verification: {v.reason}")
        trace.result = "found" if v.status == "accept" else "found-unverified"
    else:
        trace.result = "found"
    trace.seconds = time.perf_counter() - t0
    return result, trace


def synthesize_finite(chain: FiniteChain, config: Optional[TemplateConfig] = None, verify: bool = True):
    """Same loop with one unknown per state, solved exactly as an LP."""
    from .certificates import check_lexpmsm_map as _check

    config = config or TemplateConfig()
    t0 = time.perf_counter()
    trace = SynthesisTrace(backend="builtin-lp")
    keys = list(chain.states())
    rv = {s: Polynomial.var(f"tpl_{s}") for s in keys}

    def round_fn(j, k, T):
        t1 = time.perf_counter()
        cons = [(rv[s], ">=") for s in keys]
        eps = {s: Polynomial.var(f"eps_{s}") for s in sorted(T)}
        for s in sorted(T):
            nxt = sum((rv[t] * p for t, p in chain.rows[s]), Polynomial())
            cons.append((rv[s] - nxt - eps[s], ">="))
        names = [f"tpl_{s}" for s in keys] + [f"eps_{s}" for s in sorted(T)]
        lower = {f"eps_{s}": Fraction(0) for s in T}
        upper = {f"eps_{s}": Fraction(1) for s in T}
        if config.coeff_bound is not None:
            for s in keys:
                lower[f"tpl_{s}"] = -config.coeff_bound
                upper[f"tpl_{s}"] = config.coeff_bound
        obj = sum(eps.values(), Polynomial()) if eps else None
        res = solve_constraints(cons, names, obj, lower, upper)
        if not res.feasible:
            raise SynthesisError(f"round ({j},{k}): LP status {res.status}")
        ev = {s: res.values.get(f"eps_{s}", Fraction(0)) for s in T}
        pos = [v for v in ev.values() if v > 0]
        scale = 1 / min(pos) if pos else Fraction(1)
        vals = {s: res.values.get(f"tpl_{s}", Fraction(0)) * scale for s in keys}
        removed = set()
        for s in T:
            nxt = sum((vals[t] * p for t, p in chain.rows[s]), Fraction(0))
            if vals[s] - nxt >= 1:
                removed.add(s)
        rnd = Round(j, k, [], [], [], "sat", "exact", time.perf_counter() - t1,
                    {s: fraction_str(v) for s, v in vals.items()})
        return vals, removed, rnd

    d = max(chain.priority)
    result = _loop(keys, lambda s: chain.priority[s], d, round_fn, config, trace, Fraction(0))
    trace.seconds = time.perf_counter() - t0
    if isinstance(result, NotFound):
        trace.result = "not-found"
        return result, trace
    if verify:
        v = _check(chain, result)
        if not v.accepted:
            raise SynthesisError(f"synthesised map fails re-verification: {v.reason}")
    trace.result = "found"
    return result, trace
