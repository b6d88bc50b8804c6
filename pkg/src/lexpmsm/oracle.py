"""Exact analyses of finite Markov chains used as ground truth.

Everything here is rational arithmetic. A state set argument is any
iterable of state indices.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import networkx as nx

from .lexorder import INF
from .lp import solve_linear
from .model import FiniteChain

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class StepExpectation:
    values: tuple  # Fraction, or INF where divergent
    divergent: tuple  # bool per state
    exact: bool = True  # False for finite Kleene iterates (lower bounds)

    def __getitem__(self, s):
        return self.values[s]


@dataclass(frozen=True)
class StepDistribution:
    """Per-state laws of the A-step count, truncated at `horizon`.

    masses[s][m] = P[step = m] for m <= horizon; tails[s] = P[step > horizon]
    (including step = infinity).
    """

    masses: tuple
    tails: tuple
    horizon: int

    def at(self, s: int) -> dict:
        out = {m: p for m, p in enumerate(self.masses[s]) if p}
        if self.tails[s]:
            out["tail"] = self.tails[s]
        return out

    def tail_sum(self, s: int, a: int) -> Fraction:
        """P[step >= a]; beyond the horizon only the tail cell is left."""
        if a <= 0:
            return sum(self.masses[s], ZERO) + self.tails[s]
        if a > self.horizon:
            return self.tails[s]
        return sum(self.masses[s][a:], ZERO) + self.tails[s]

    def total(self, s: int) -> Fraction:
        return sum(self.masses[s], ZERO) + self.tails[s]

    def leq(self, other: "StepDistribution") -> bool:
        """Pointwise stochastic order (tail-sum dominance)."""
        if self.horizon != other.horizon:
            raise ValueError("horizon mismatch")
        n = len(self.masses)
        return all(self.tail_sum(s, a) <= other.tail_sum(s, a)
                   for s in range(n) for a in range(self.horizon + 2))


def _sets(chain: FiniteChain, A, B):
    A = frozenset(A)
    B = frozenset(B)
    n = chain.n_states
    for s in A | B:
        if not (0 <= s < n):
            raise ValueError(f"state {s} outside the chain")
    return A, B


def _classify(chain, A, B):
    kinds = []
    for s in chain.states():
        if s in B:
            kinds.append("B")
        elif s in A:
            kinds.append("A")
        else:
            kinds.append("N")
    return kinds


def ke_step(chain: FiniteChain, A, B, eta: Sequence) -> tuple:
    """One application of K_E."""
    A, B = _sets(chain, A, B)
    out = []
    for s, row in enumerate(chain.rows):
        if s in B:
            out.append(ZERO)
            continue
        x = sum((p * eta[t] for t, p in row), ZERO) if all(eta[t] != INF for t, _ in row) else INF
        if s in A and x != INF:
            x = x + 1
        out.append(x)
    return tuple(out)


def ke_iterate(chain: FiniteChain, A, B, n: int) -> list[StepExpectation]:
    """K_E^1(bot) .. K_E^n(bot), bot = 0."""
    eta = tuple(ZERO for _ in chain.states())
    out = []
    for _ in range(n):
        eta = ke_step(chain, A, B, eta)
        out.append(StepExpectation(eta, tuple(False for _ in eta), exact=False))
    return out


def graph(chain: FiniteChain, drop: Iterable[int] = ()) -> nx.DiGraph:
    drop = set(drop)
    g = nx.DiGraph()
    g.add_nodes_from(s for s in chain.states() if s not in drop)
    for s, row in enumerate(chain.rows):
        if s in drop:
            continue
        for t, _ in row:
            if t not in drop:
                g.add_edge(s, t)
    return g


def bsccs(chain: FiniteChain) -> list[frozenset]:
    g = graph(chain)
    cond = nx.condensation(g)
    out = []
    for c in cond.nodes:
        if cond.out_degree(c) == 0:
            out.append(frozenset(cond.nodes[c]["members"]))
    return sorted(out, key=min)


def _can_reach(g: nx.DiGraph, targets: Iterable[int]) -> set:
    """Nodes of g with a path (possibly empty) into `targets`."""
    targets = [t for t in targets if t in g]
    seen = set(targets)
    rev = g.reverse(copy=False)
    stack = list(targets)
    while stack:
        u = stack.pop()
        for v in rev.successors(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def divergent_states(chain: FiniteChain, A, B) -> frozenset:
    """States with P[step = infinity] > 0."""
    A, B = _sets(chain, A, B)
    bad = [C for C in bsccs(chain) if not (C & B) and (C & A)]
    targets = set().union(*bad) if bad else set()
    g = graph(chain, drop=B)
    return frozenset(_can_reach(g, targets))


def null_recurrent(chain: FiniteChain, A, B) -> tuple:
    """Per state: is the number of A-steps before B almost surely finite."""
    div = divergent_states(chain, A, B)
    return tuple(s not in div for s in chain.states())


def expected_steps_exact(chain: FiniteChain, A, B) -> StepExpectation:
    A, B = _sets(chain, A, B)
    div = divergent_states(chain, A, B)
    g = graph(chain, drop=B)
    live = _can_reach(g, [s for s in A if s not in B])
    W = [s for s in chain.states() if s not in B and s not in div and s in live]
    values = [ZERO] * chain.n_states
    if W:
        pos = {s: i for i, s in enumerate(W)}
        M = [[ZERO] * len(W) for _ in W]
        rhs = [ZERO] * len(W)
        for s in W:
            i = pos[s]
            M[i][i] += 1
            rhs[i] = ONE if s in A else ZERO
            for t, p in chain.rows[s]:
                if t in pos:
                    M[i][pos[t]] -= p
        sol = solve_linear(M, rhs)
        for s in W:
            values[s] = sol[pos[s]]
    for s in div:
        values[s] = INF
    return StepExpectation(tuple(values), tuple(s in div for s in chain.states()), exact=True)


def _kp_apply(chain, kinds, masses, tails, horizon):
    new_m, new_t = [], []
    for s, row in enumerate(chain.rows):
        k = kinds[s]
        if k == "B":
            m = [ZERO] * (horizon + 1)
            m[0] = ONE
            new_m.append(m)
            new_t.append(ZERO)
            continue
        mix = [ZERO] * (horizon + 1)
        tail = ZERO
        for t, p in row:
            mt = masses[t]
            for i in range(horizon + 1):
                if mt[i]:
                    mix[i] += p * mt[i]
            tail += p * tails[t]
        if k == "A":
            tail += mix[horizon]
            mix = [ZERO] + mix[:horizon]
        new_m.append(mix)
        new_t.append(tail)
    return new_m, new_t


def kp_sequence(chain: FiniteChain, A, B, horizon: int, n: int) -> list[StepDistribution]:
    """K_P^1(bot) .. K_P^n(bot) with bot = delta_0, truncated at `horizon`."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    A, B = _sets(chain, A, B)
    kinds = _classify(chain, A, B)
    masses = [[ONE] + [ZERO] * horizon for _ in chain.states()]
    tails = [ZERO for _ in chain.states()]
    out = []
    for _ in range(n):
        masses, tails = _kp_apply(chain, kinds, masses, tails, horizon)
        out.append(StepDistribution(tuple(tuple(m) for m in masses), tuple(tails), horizon))
    return out


def kp_iterate(chain: FiniteChain, A, B, horizon: int = 64, iterations: Optional[int] = None) -> StepDistribution:
    """Law of the A-step count truncated at `horizon`.

    With `iterations=None` the least fixed point is computed exactly by
    solving, for each m, the linear system K_P induces on states outside
    A and B. Otherwise the Kleene iterate K_P^iterations(bot) is returned.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if iterations is not None:
        if iterations < 1:
            return StepDistribution(tuple(tuple([ONE] + [ZERO] * horizon) for _ in chain.states()),
                                    tuple(ZERO for _ in chain.states()), horizon)
        return kp_sequence(chain, A, B, horizon, iterations)[-1]
    A, B = _sets(chain, A, B)
    kinds = _classify(chain, A, B)
    N = [s for s in chain.states() if kinds[s] == "N"]
    gN = graph(chain, drop=[s for s in chain.states() if kinds[s] != "N"])
    exits = [s for s in N if any(kinds[t] != "N" for t, _ in chain.rows[s])]
    leaving = _can_reach(gN, exits)
    Np = [s for s in N if s in leaving]
    pos = {s: i for i, s in enumerate(Np)}
    inv = None
    if Np:
        M = [[ZERO] * len(Np) for _ in Np]
        for s in Np:
            i = pos[s]
            M[i][i] += 1
            for t, p in chain.rows[s]:
                if t in pos:
                    M[i][pos[t]] -= p
        inv = _inverse(M)
    q_prev = None
    cols = []  # cols[m][s]
    for m in range(horizon + 1):
        q = [ZERO] * chain.n_states
        for s in chain.states():
            if kinds[s] == "B":
                q[s] = ONE if m == 0 else ZERO
            elif kinds[s] == "A":
                q[s] = ZERO if m == 0 else sum((p * q_prev[t] for t, p in chain.rows[s]), ZERO)
        if Np:
            rhs = [sum((p * q[t] for t, p in chain.rows[s] if kinds[t] != "N"), ZERO) for s in Np]
            for s in Np:
                i = pos[s]
                q[s] = sum((inv[i][k] * rhs[k] for k in range(len(Np)) if rhs[k]), ZERO)
        cols.append(q)
        q_prev = q
    masses = tuple(tuple(cols[m][s] for m in range(horizon + 1)) for s in chain.states())
    tails = tuple(ONE - sum(masses[s], ZERO) for s in chain.states())
    return StepDistribution(masses, tails, horizon)


def _inverse(M):
    n = len(M)
    cols = []
    for j in range(n):
        e = [ONE if i == j else ZERO for i in range(n)]
        cols.append(solve_linear(M, e))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def reach_probability(chain: FiniteChain, target) -> tuple:
    """Exact probability of eventually visiting `target` (time 0 included)."""
    target = frozenset(target)
    g = graph(chain)
    can = _can_reach(g, target)
    W = [s for s in chain.states() if s in can and s not in target]
    pos = {s: i for i, s in enumerate(W)}
    vals = [ONE if s in target else ZERO for s in chain.states()]
    if W:
        M = [[ZERO] * len(W) for _ in W]
        rhs = [ZERO] * len(W)
        for s in W:
            i = pos[s]
            M[i][i] += 1
            for t, p in chain.rows[s]:
                if t in pos:
                    M[i][pos[t]] -= p
                elif t in target:
                    rhs[i] += p
        sol = solve_linear(M, rhs)
        for s in W:
            vals[s] = sol[pos[s]]
    return tuple(vals)


def almost_sure_parity(chain: FiniteChain) -> tuple:
    """Per state: every BSCC reachable from it has an even minimum priority."""
    g = graph(chain)
    bad = [C for C in bsccs(chain) if min(chain.priority[s] for s in C) % 2 == 1]
    targets = set().union(*bad) if bad else set()
    reach_bad = _can_reach(g, targets)
    return tuple(s not in reach_bad for s in chain.states())


def parity_probability(chain: FiniteChain) -> tuple:
    """Exact probability of satisfying the parity condition from each state."""
    good = [C for C in bsccs(chain) if min(chain.priority[s] for s in C) % 2 == 0]
    return reach_probability(chain, set().union(*good) if good else set())


# -- sampling ----------------------------------------------------------------

@dataclass
class SampleReport:
    count: int
    horizon: int
    b_visits: int = 0  # traces that visit B within the horizon
    min_priority: dict = field(default_factory=dict)  # min priority seen in second half -> count
    steps: dict = field(default_factory=dict)  # A-step count before B within the horizon -> count

    def frequency(self, key) -> float:
        return self.steps.get(key, 0) / self.count


class _Sampler:
    def __init__(self, chain: FiniteChain, rng: random.Random):
        self.rng = rng
        self.tables = []
        for row in chain.rows:
            L = math.lcm(*(p.denominator for _, p in row))
            cum, acc = [], 0
            for t, p in row:
                acc += int(p * L)
                cum.append((acc, t))
            self.tables.append((L, cum))

    def step(self, s: int) -> int:
        L, cum = self.tables[s]
        u = self.rng.randrange(L)
        for acc, t in cum:
            if u < acc:
                return t
        return cum[-1][1]


def sample_traces(chain: FiniteChain, s0: int, horizon: int, count: int, seed: int = 0,
                  A: Iterable[int] = (), B: Iterable[int] = ()) -> SampleReport:
    """Monte-Carlo traces of `horizon` transitions; exact rational sampling."""
    A, B = _sets(chain, A, B)
    rng = random.Random(seed)
    sampler = _Sampler(chain, rng)
    rep = SampleReport(count=count, horizon=horizon)
    for _ in range(count):
        s = s0
        trace = [s]
        for _ in range(horizon):
            s = sampler.step(s)
            trace.append(s)
        steps = 0
        hit = False
        for x in trace:
            if x in B:
                hit = True
                break
            if x in A:
                steps += 1
        rep.b_visits += hit
        rep.steps[steps] = rep.steps.get(steps, 0) + 1
        tail = trace[len(trace) // 2:]
        mp = min(chain.priority[x] for x in tail)
        rep.min_priority[mp] = rep.min_priority.get(mp, 0) + 1
    return rep


# -- generators --------------------------------------------------------------

def random_chain(rng: random.Random, n: int, d: int = 4, denominators=(1, 2, 3, 4), max_out: int = 3) -> FiniteChain:
    """Random chain with probabilities k/den for a den from `denominators`."""
    rows = []
    for _ in range(n):
        den = rng.choice(denominators)
        k = rng.randint(1, min(max_out, den, n))
        cuts = sorted(rng.sample(range(1, den), k - 1)) if k > 1 else []
        parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
        targets = rng.sample(range(n), k)
        rows.append({t: Fraction(p, den) for t, p in zip(targets, parts)})
    pri = [rng.randint(1, d) for _ in range(n)]
    return FiniteChain.make(rows, pri)


def step_count_oracle(chain: FiniteChain, A, B, s0: int, n: int) -> dict:
    """Law of step_{s0,n} by enumerating all paths of n transitions."""
    A, B = _sets(chain, A, B)
    out: dict = {}

    def walk(s, depth, prob, steps):
        if s in B:
            out[steps] = out.get(steps, ZERO) + prob
            return
        if s in A:
            steps += 1
        if depth == n:
            out[steps] = out.get(steps, ZERO) + prob
            return
        for t, p in chain.rows[s]:
            walk(t, depth + 1, prob * p, steps)

    walk(s0, 0, ONE, 0)
    return out
