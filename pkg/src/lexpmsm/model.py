"""pCFGs, priority partitions, finite chains and acceptance-condition plumbing."""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .poly import Polynomial, as_fraction, fraction_str, parse_poly


class ModelError(ValueError):
    pass


class Rel(Enum):
    GE = ">="
    GT = ">"
    EQ = "=="

    def test(self, v: Fraction) -> bool:
        if self is Rel.GE:
            return v >= 0
        if self is Rel.GT:
            return v > 0
        return v == 0


@dataclass(frozen=True)
class Atom:
    """`poly rel 0`."""

    poly: Polynomial
    rel: Rel

    def holds(self, values: Mapping[str, Fraction]) -> bool:
        return self.rel.test(self.poly.evaluate(values))

    def subs(self, mapping) -> "Atom":
        return Atom(self.poly.subs(mapping), self.rel)

    def negate(self) -> list["Atom"]:
        """Disjunction of atoms equivalent to the negation."""
        if self.rel is Rel.GE:
            return [Atom(-self.poly, Rel.GT)]
        if self.rel is Rel.GT:
            return [Atom(-self.poly, Rel.GE)]
        return [Atom(self.poly, Rel.GT), Atom(-self.poly, Rel.GT)]

    def is_trivially_true(self) -> bool:
        return self.poly.is_constant() and self.rel.test(self.poly.constant_term)

    def is_trivially_false(self) -> bool:
        return self.poly.is_constant() and not self.rel.test(self.poly.constant_term)

    def __str__(self):
        return f"{self.poly} {self.rel.value} 0"


_REL_RE = re.compile(r"(<=|>=|==|!=|<|>|=)")


def parse_atom(text: str, allowed=None) -> Atom:
    parts = _REL_RE.split(text)
    if len(parts) != 3:
        raise ModelError(f"expected exactly one relation in atom {text!r}")
    lhs, op, rhs = parts
    a = parse_poly(lhs, allowed)
    b = parse_poly(rhs, allowed)
    if op == ">=":
        return Atom(a - b, Rel.GE)
    if op == "<=":
        return Atom(b - a, Rel.GE)
    if op == ">":
        return Atom(a - b, Rel.GT)
    if op == "<":
        return Atom(b - a, Rel.GT)
    if op in ("=", "=="):
        return Atom(a - b, Rel.EQ)
    raise ModelError(f"relation {op!r} is not supported in guards")


@dataclass(frozen=True)
class Guard:
    """Conjunction of atoms; the empty conjunction is true."""

    atoms: tuple = ()

    @staticmethod
    def true() -> "Guard":
        return Guard(())

    def holds(self, values) -> bool:
        return all(a.holds(values) for a in self.atoms)

    def conj(self, other: "Guard") -> "Guard":
        return Guard(self.atoms + tuple(a for a in other.atoms if a not in self.atoms))

    def subs(self, mapping) -> "Guard":
        return Guard(tuple(a.subs(mapping) for a in self.atoms))

    def negate(self) -> list["Guard"]:
        """DNF of the negation, one single-atom guard per disjunct."""
        out = []
        for a in self.atoms:
            for n in a.negate():
                out.append(Guard((n,)))
        return out

    def simplify(self) -> Optional["Guard"]:
        """Drop constant-true atoms; None if some atom is constant-false."""
        keep = []
        for a in self.atoms:
            if a.is_trivially_false():
                return None
            if not a.is_trivially_true() and a not in keep:
                keep.append(a)
        return Guard(tuple(keep))

    def variables(self) -> set:
        out = set()
        for a in self.atoms:
            out |= a.poly.variables()
        return out

    @staticmethod
    def parse(spec, allowed=None) -> "Guard":
        if spec is None or spec is True:
            return Guard.true()
        if isinstance(spec, str):
            s = spec.strip()
            if s in ("", "true", "True"):
                return Guard.true()
            items = [x for x in re.split(r"&&|\band\b|,", s) if x.strip()]
        else:
            items = list(spec)
        return Guard(tuple(parse_atom(x, allowed) for x in items))

    def __str__(self):
        if not self.atoms:
            return "true"
        return " && ".join(_atom_text(a) for a in self.atoms)


def _atom_text(a: Atom) -> str:
    op = {Rel.GE: ">=", Rel.GT: ">", Rel.EQ: "=="}[a.rel]
    return f"{a.poly} {op} 0"


def complement(guards: Sequence[Guard], feasible: Callable[[Guard], bool] | None = None) -> list[Guard]:
    """DNF of the complement of a union of guards.

    `feasible` may prune disjuncts that are known to be empty.
    """
    result = [Guard.true()]
    for g in guards:
        neg = g.negate()
        nxt = []
        for d in result:
            for n in neg:
                c = d.conj(n).simplify()
                if c is None:
                    continue
                if feasible is not None and not feasible(c):
                    continue
                nxt.append(c)
        result = nxt
        if not result:
            break
    return result


# -- programs ----------------------------------------------------------------

@dataclass(frozen=True)
class Branch:
    weight: Fraction
    target: str
    update: tuple  # one Polynomial per program variable


@dataclass(frozen=True)
class Command:
    guard: Guard
    branches: tuple

    def __post_init__(self):
        if not self.branches:
            raise ModelError("a command needs at least one branch")
        total = Fraction(0)
        for b in self.branches:
            if not (0 < b.weight <= 1):
                raise ModelError(f"branch weight {b.weight} outside (0, 1]")
            total += b.weight
        if total != 1:
            raise ModelError(f"branch weights sum to {total}, not 1")


@dataclass(frozen=True)
class Pcfg:
    vars: tuple
    locations: tuple
    commands: Mapping  # location -> tuple[Command, ...]

    def __post_init__(self):
        if len(set(self.vars)) != len(self.vars):
            raise ModelError("duplicate variable names")
        for v in self.vars:
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_']*", v):
                raise ModelError(f"bad variable name {v!r}")
            if v.startswith(("tpl_", "lam_", "eps_")):
                raise ModelError(f"variable name {v!r} uses a reserved prefix")
        locs = set(self.locations)
        if len(locs) != len(self.locations):
            raise ModelError("duplicate locations")
        for l, cmds in self.commands.items():
            if l not in locs:
                raise ModelError(f"commands for undeclared location {l!r}")
            for c in cmds:
                for b in c.branches:
                    if b.target not in locs:
                        raise ModelError(f"branch target {b.target!r} is not a declared location")
                    if len(b.update) != len(self.vars):
                        raise ModelError(f"update arity {len(b.update)} != {len(self.vars)} at {l!r}")

    @property
    def var_count(self) -> int:
        return len(self.vars)

    def commands_at(self, loc: str) -> tuple:
        return tuple(self.commands.get(loc, ()))

    def env(self, values: Sequence) -> dict:
        return {v: as_fraction(x) for v, x in zip(self.vars, values)}

    def enabled_command(self, loc: str, values: Sequence) -> Optional[Command]:
        env = self.env(values)
        for c in self.commands_at(loc):
            if c.guard.holds(env):
                return c
        return None

    def successors(self, loc: str, values: Sequence) -> list[tuple]:
        """(weight, location, values) triples; a state with no enabled command stays put."""
        c = self.enabled_command(loc, values)
        vals = tuple(as_fraction(x) for x in values)
        if c is None:
            return [(Fraction(1), loc, vals)]
        env = self.env(vals)
        return [(b.weight, b.target, tuple(u.evaluate(env) for u in b.update)) for b in c.branches]

    def stay_guards(self, loc: str, feasible=None) -> list[Guard]:
        """Where no command is enabled (implicit self-loop)."""
        guards = [c.guard for c in self.commands_at(loc)]
        return complement(guards, feasible)

    def identity_update(self) -> tuple:
        return tuple(Polynomial.var(v) for v in self.vars)


@dataclass(frozen=True)
class Region:
    location: str
    priority: int
    guard: Guard


@dataclass(frozen=True)
class PriorityPartition:
    d: int
    regions: tuple

    def __post_init__(self):
        if self.d < 1:
            raise ModelError("max priority d must be >= 1")
        for r in self.regions:
            if not (1 <= r.priority <= self.d):
                raise ModelError(f"priority {r.priority} outside 1..{self.d}")

    @property
    def sink_priority(self) -> int:
        return self.d if self.d % 2 == 0 else self.d + 1

    @property
    def reduced_blocks(self) -> int:
        return (self.d + 1) // 2

    def keys(self) -> list[tuple]:
        return sorted({(r.location, r.priority) for r in self.regions})

    def pieces(self, key) -> list[Guard]:
        return [r.guard for r in self.regions if (r.location, r.priority) == key]

    def at(self, loc: str) -> list[Region]:
        return [r for r in self.regions if r.location == loc]

    def region_of(self, loc: str, env: Mapping) -> Optional[tuple]:
        """Key of the region containing the state, None for the sink."""
        for r in self.regions:
            if r.location == loc and r.guard.holds(env):
                return (r.location, r.priority)
        return None

    def priority_of(self, loc: str, env: Mapping) -> int:
        k = self.region_of(loc, env)
        return self.sink_priority if k is None else k[1]

    def with_invariant(self, invariant: Mapping[str, Guard]) -> "PriorityPartition":
        regs = []
        for r in self.regions:
            inv = invariant.get(r.location)
            regs.append(Region(r.location, r.priority, r.guard if inv is None else inv.conj(r.guard)))
        return PriorityPartition(self.d, tuple(regs))


# -- finite chains -----------------------------------------------------------

@dataclass(frozen=True)
class FiniteChain:
    rows: tuple  # per state: tuple of (target, Fraction)
    priority: tuple  # per state, >= 1
    labels: tuple = ()

    def __post_init__(self):
        n = len(self.rows)
        if n < 1:
            raise ModelError("a chain needs at least one state")
        if len(self.priority) != n:
            raise ModelError("priority length differs from state count")
        for s, row in enumerate(self.rows):
            if not row:
                raise ModelError(f"state {s} has no successors")
            total = Fraction(0)
            for t, p in row:
                if not (0 <= t < n):
                    raise ModelError(f"state {s} jumps to unknown state {t}")
                if p <= 0:
                    raise ModelError(f"non-positive probability at state {s}")
                total += p
            if total != 1:
                raise ModelError(f"row {s} sums to {total}")
        for p in self.priority:
            if p < 1:
                raise ModelError("priorities start at 1")

    @staticmethod
    def make(rows, priority=None, labels=()) -> "FiniteChain":
        fixed = []
        for row in rows:
            merged: dict = {}
            items = row.items() if isinstance(row, Mapping) else row
            for t, p in items:
                merged[int(t)] = merged.get(int(t), Fraction(0)) + as_fraction(p)
            fixed.append(tuple(sorted(merged.items())))
        if priority is None:
            priority = [2] * len(fixed)
        return FiniteChain(tuple(fixed), tuple(int(p) for p in priority), tuple(labels))

    @property
    def n_states(self) -> int:
        return len(self.rows)

    @property
    def d(self) -> int:
        return max(self.priority)

    def states(self) -> range:
        return range(len(self.rows))

    def with_priority(self, priority) -> "FiniteChain":
        return FiniteChain(self.rows, tuple(priority), self.labels)


# -- acceptance conditions ---------------------------------------------------

@dataclass(frozen=True)
class StreettPair:
    """(A, B): satisfied when A is visited finitely often or B infinitely often.

    Descriptors are frozensets of states (finite chains) or mappings from
    location to a tuple of guards whose union is the set (pCFGs).
    """

    a: object
    b: object


def _le_set(priority: Sequence[int], k: int) -> frozenset:
    return frozenset(s for s, p in enumerate(priority) if p <= k)


def _le_guards(partition: PriorityPartition, k: int) -> dict:
    out: dict = {}
    for r in partition.regions:
        if r.priority <= k:
            out.setdefault(r.location, []).append(r.guard)
    return {l: tuple(g) for l, g in out.items()}


def parity_to_streett(p, d: int | None = None) -> list[StreettPair]:
    """Pairs (S_{<=2i-1}, S_{<=2i-2}) for i = 1..d/2."""
    if isinstance(p, PriorityPartition):
        d = p.d if d is None else d
        if d % 2:
            raise ModelError(f"parity_to_streett needs an even maximum priority, got {d}; pad to {d + 1}")
        if any(r.priority > d for r in p.regions):
            raise ModelError("region priority exceeds d")
        return [StreettPair(_le_guards(p, 2 * i - 1), _le_guards(p, 2 * i - 2)) for i in range(1, d // 2 + 1)]
    pri = list(p)
    if d is None:
        d = max(pri)
    if d % 2:
        raise ModelError(f"parity_to_streett needs an even maximum priority, got {d}; pad to {d + 1}")
    if any(not (1 <= x <= d) for x in pri):
        raise ModelError("priority outside 1..d")
    return [StreettPair(_le_set(pri, 2 * i - 1), _le_set(pri, 2 * i - 2)) for i in range(1, d // 2 + 1)]


def streett_pair_to_parity(a, b, space=None, invariant: Mapping[str, Guard] | None = None, feasible=None):
    """Priority 2 on B, 3 on A minus B, 4 elsewhere (d = 4).

    Finite form: `a`, `b` are state sets and `space` is the state count; a
    priority list is returned. Symbolic form: `a`, `b` map locations to guard
    tuples, `space` lists the locations, and a PriorityPartition comes back.
    """
    if isinstance(a, (set, frozenset)) or isinstance(b, (set, frozenset)):
        n = space if isinstance(space, int) else len(space)
        A, B = frozenset(a), frozenset(b)
        return [2 if s in B else 3 if s in A else 4 for s in range(n)]
    locations = list(space)
    invariant = invariant or {}
    regions = []
    for l in locations:
        inv = invariant.get(l, Guard.true())
        bl = list(b.get(l, ()))
        al = list(a.get(l, ()))
        for g in bl:
            regions.append(Region(l, 2, inv.conj(g)))
        not_b = complement(bl, feasible)
        for g in al:
            for nb in not_b:
                c = inv.conj(g).conj(nb).simplify()
                if c is not None and (feasible is None or feasible(c)):
                    regions.append(Region(l, 3, c))
        for rest in complement(al + bl, feasible):
            c = inv.conj(rest).simplify()
            if c is not None and (feasible is None or feasible(c)):
                regions.append(Region(l, 4, c))
    return PriorityPartition(4, tuple(regions))


def streett_to_priority_partition(pcfg: Pcfg, pairs: Sequence[StreettPair],
                                  invariant: Mapping[str, Guard] | None = None, feasible=None) -> PriorityPartition:
    if len(pairs) != 1:
        raise ModelError(f"only single-pair Streett conditions compile to a partition, got {len(pairs)}; "
                         "supply a priority partition directly")
    for desc in (pairs[0].a, pairs[0].b):
        for l in desc:
            if l not in pcfg.locations:
                raise ModelError(f"Streett descriptor mentions unknown location {l!r}")
    return streett_pair_to_parity(pairs[0].a, pairs[0].b, pcfg.locations, invariant, feasible)


def pcfg_to_finite_chain(pcfg: Pcfg, partition: PriorityPartition, states: Sequence[tuple]) -> FiniteChain:
    """Explicit chain on the listed (location, values) states."""
    norm = [(l, tuple(as_fraction(x) for x in vals)) for l, vals in states]
    index = {s: i for i, s in enumerate(norm)}
    if len(index) != len(norm):
        raise ModelError("duplicate states in the enumeration")
    rows, pri = [], []
    for l, vals in norm:
        row: dict = {}
        for w, t, tv in pcfg.successors(l, vals):
            key = (t, tv)
            if key not in index:
                shown = ", ".join(fraction_str(x) for x in tv)
                raise ModelError(f"successor ({t}, [{shown}]) of ({l}, [{', '.join(fraction_str(x) for x in vals)}]) "
                                 "escapes the enumeration")
            j = index[key]
            row[j] = row.get(j, Fraction(0)) + w
        rows.append(tuple(sorted(row.items())))
        pri.append(partition.priority_of(l, pcfg.env(vals)))
    labels = tuple(f"{l}[{','.join(fraction_str(x) for x in v)}]" for l, v in norm)
    return FiniteChain(tuple(rows), tuple(pri), labels)


@dataclass
class PartitionReport:
    ok: bool
    overlaps: list = field(default_factory=list)  # (location, i, j, witness env)
    pqes: list = field(default_factory=list)
    unknown: list = field(default_factory=list)


def validate_partition(pcfg: Pcfg, partition: PriorityPartition, mode: str = "sample",
                       samples: int = 2000, seed: int = 0, box: int = 8, backend=None) -> PartitionReport:
    """Check that same-location regions with distinct priorities are disjoint."""
    for r in partition.regions:
        if r.location not in pcfg.locations:
            raise ModelError(f"region at unknown location {r.location!r}")
        extra = r.guard.variables() - set(pcfg.vars)
        if extra:
            raise ModelError(f"region guard uses undeclared variables {sorted(extra)}")
    pairs = []
    for l in pcfg.locations:
        regs = partition.at(l)
        for r1, r2 in itertools.combinations(regs, 2):
            if r1.priority != r2.priority:
                pairs.append((l, r1, r2))
    report = PartitionReport(ok=True)
    if mode == "sample":
        rng = random.Random(seed)
        pts = _sample_points(len(pcfg.vars), samples, rng, box)
        for l, r1, r2 in pairs:
            for pt in pts:
                env = pcfg.env(pt)
                if r1.guard.holds(env) and r2.guard.holds(env):
                    report.ok = False
                    report.overlaps.append((l, r1.priority, r2.priority, env))
                    break
        return report
    if mode != "solver":
        raise ModelError(f"unknown validation mode {mode!r}")
    from .pqe import Pqe, check_entailment  # local import: pqe builds on this module

    for l, r1, r2 in pairs:
        q = Pqe(tuple(pcfg.vars), r1.guard.atoms + r2.guard.atoms,
                Atom(Polynomial.const(-1), Rel.GE), label=f"disjoint {l} {r1.priority}/{r2.priority}")
        report.pqes.append(q)
        res = check_entailment(q, backend)
        if res.status == "invalid":
            report.ok = False
            report.overlaps.append((l, r1.priority, r2.priority, res.witness))
        elif res.status != "valid":
            report.ok = False
            report.unknown.append((l, r1.priority, r2.priority, res.reason))
    return report


def _sample_points(n: int, count: int, rng: random.Random, box: int) -> list[tuple]:
    pts = []
    grid = [Fraction(k, 2) for k in range(-2 * box, 2 * box + 1)]
    for _ in range(count):
        if rng.random() < 0.5:
            pts.append(tuple(rng.choice(grid) for _ in range(n)))
        else:
            pts.append(tuple(Fraction(rng.randint(-box * 60, box * 60), 60) for _ in range(n)))
    return pts


Descriptor = Union[frozenset, Mapping]
