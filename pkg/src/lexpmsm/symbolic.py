"""Symbolic next-time expansion over a pCFG with a priority partition.

For a region key (l, i) the successor value X R is a weighted sum over the
branches of the enabled command. Which template a successor reads depends
on the region it lands in, so each branch is split into cases: one per
target region (its guard pulled back through the update) plus one per
disjunct of the complement of the target's regions, where the successor
is in the implicit even sink and contributes 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .lp import solve_constraints
from .model import Atom, Branch, Command, Guard, ModelError, Pcfg, PriorityPartition, Rel, complement
from .poly import Polynomial
from .pqe import Pqe


class AmbiguousRegion(ModelError):
    pass


class Feasibility:
    """Cached exact emptiness test for conjunctions; nonlinear ones count as feasible."""

    def __init__(self, variables: Sequence[str]):
        self.variables = list(variables)
        self.cache: dict = {}

    def __call__(self, atoms) -> bool:
        if isinstance(atoms, Guard):
            atoms = atoms.atoms
        key = frozenset(atoms)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if any(a.is_trivially_false() for a in atoms):
            res = False
        else:
            live = [a for a in atoms if not a.is_trivially_true()]
            if not live:
                res = True
            elif any(a.poly.degree() > 1 for a in live):
                res = True
            else:
                res = solve_constraints([(a.poly, a.rel.value) for a in live], self.variables).feasible
        self.cache[key] = res
        return res


@dataclass(frozen=True)
class Case:
    key: tuple
    antecedent: tuple  # atoms over program variables
    terms: tuple  # (weight, target key or None for the sink, update tuple)
    label: str = ""


def _stay_commands(pcfg: Pcfg, loc: str, feasible) -> list[Command]:
    ident = pcfg.identity_update()
    return [Command(g, (Branch(Fraction(1), loc, ident),)) for g in pcfg.stay_guards(loc, feasible)]


def _branch_options(pcfg, partition, b: Branch, base: tuple, feasible, loc_label):
    subst = dict(zip(pcfg.vars, b.update))
    regs = partition.at(b.target)
    opts = []
    pulled = []
    for r in regs:
        g = r.guard.subs(subst).simplify()
        if g is None:
            continue
        pulled.append((r, g))
        if feasible(base + g.atoms):
            opts.append(((r.location, r.priority), g.atoms))
    # two regions of distinct priority that can both hold for the successor
    for (r1, g1), (r2, g2) in itertools.combinations(pulled, 2):
        if r1.priority != r2.priority and feasible(base + g1.atoms + g2.atoms):
            raise AmbiguousRegion(f"successor region is ambiguous from {loc_label}: target {b.target} "
                                  f"priorities {r1.priority} and {r2.priority} overlap")
    for d in complement([r.guard for r in regs], feasible):
        g = d.subs(subst).simplify()
        if g is None:
            continue
        if feasible(base + g.atoms):
            opts.append((None, g.atoms))
    return opts


def expand(pcfg: Pcfg, partition: PriorityPartition, keys=None, feasible: Optional[Feasibility] = None) -> dict:
    """key -> list of Case covering every state of the region."""
    feasible = feasible or Feasibility(pcfg.vars)
    keys = partition.keys() if keys is None else keys
    out = {}
    for key in keys:
        loc, _ = key
        cases = []
        cmds = list(pcfg.commands_at(loc)) + _stay_commands(pcfg, loc, feasible)
        for pi, piece in enumerate(partition.pieces(key)):
            for ci, cmd in enumerate(cmds):
                g0 = piece.conj(cmd.guard).simplify()
                if g0 is None or not feasible(g0.atoms):
                    continue
                label = f"{loc}/p{key[1]}#{pi} cmd{ci}"
                per_branch = [_branch_options(pcfg, partition, b, g0.atoms, feasible, label) for b in cmd.branches]
                for choice in itertools.product(*per_branch):
                    atoms = list(g0.atoms)
                    for _, extra in choice:
                        for a in extra:
                            if a not in atoms:
                                atoms.append(a)
                    ante = Guard(tuple(atoms)).simplify()
                    if ante is None or not feasible(ante.atoms):
                        continue
                    terms = tuple((b.weight, tk, b.update) for b, (tk, _) in zip(cmd.branches, choice))
                    cases.append(Case(key, ante.atoms, terms, label))
        out[key] = cases
    return out


def next_value(pcfg: Pcfg, case: Case, values: Mapping, component: int = 0) -> Polynomial:
    """X R at the case, for one component of a vector-valued map."""
    total = Polynomial()
    for w, tk, upd in case.terms:
        if tk is None:
            continue
        r = values[tk][component]
        total = total + r.subs(dict(zip(pcfg.vars, upd))) * w
    return total


def decrease_pqe(pcfg: Pcfg, case: Case, values: Mapping, component: int, offset,
                 label: str = "") -> Pqe:
    """forall x. case => R_key(x) - X R(x) - offset >= 0."""
    lhs = values[case.key][component] - next_value(pcfg, case, values, component) - offset
    return Pqe(tuple(pcfg.vars), case.antecedent, Atom(lhs, Rel.GE), label or case.label)


def nonneg_pqes(pcfg: Pcfg, partition: PriorityPartition, values: Mapping, component: int, keys=None) -> list:
    out = []
    for key in (partition.keys() if keys is None else keys):
        for pi, piece in enumerate(partition.pieces(key)):
            out.append(Pqe(tuple(pcfg.vars), piece.atoms, Atom(values[key][component], Rel.GE),
                           f"{key[0]}/p{key[1]}#{pi} nonneg"))
    return out


def monomials(variables: Sequence[str], degree: int) -> list[tuple]:
    """All monomials of total degree <= `degree`, constant first."""
    out = [()]
    for d in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(sorted(variables), d):
            exps: dict = {}
            for v in combo:
                exps[v] = exps.get(v, 0) + 1
            out.append(tuple(sorted(exps.items())))
    return out


def template(prefix: str, variables: Sequence[str], degree: int) -> tuple[Polynomial, list[str]]:
    poly = Polynomial()
    names = []
    for idx, m in enumerate(monomials(variables, degree)):
        name = f"{prefix}_{idx}"
        names.append(name)
        poly = poly + Polynomial({m: 1}) * Polynomial.var(name)
    return poly, names
