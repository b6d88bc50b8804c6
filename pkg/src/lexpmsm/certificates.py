"""Certificate types, checkers and the translations between them.

Every checker runs on either a finite chain (exact pointwise evaluation,
levels may differ from state to state) or a symbolic pCFG system (one
level per region, each inequality discharged as a PQE).

Roles for a Streett pair index q on a priority-labelled system: states with
priority <= 2q-2 form B, priority 2q-1 forms A minus B, the rest neither.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import lexorder as lo
from .model import FiniteChain, ModelError, Pcfg, PriorityPartition
from .poly import Polynomial, as_fraction
from .pqe import BuiltinBackend, check_entailment
from .symbolic import Feasibility, decrease_pqe, expand, nonneg_pqes

STAR = "*"


# -- systems -----------------------------------------------------------------

@dataclass(frozen=True)
class StreettChain:
    """A finite chain with an explicit Streett pair (A, B) of state sets."""

    chain: FiniteChain
    a: frozenset
    b: frozenset


class SymbolicSystem:
    def __init__(self, pcfg: Pcfg, partition: PriorityPartition, backend=None):
        self.pcfg = pcfg
        self.partition = partition
        self.backend = backend
        self._feasible = Feasibility(pcfg.vars)
        self._cases = None

    @property
    def cases(self) -> dict:
        if self._cases is None:
            self._cases = expand(self.pcfg, self.partition, feasible=self._feasible)
        return self._cases

    def keys(self) -> list:
        return self.partition.keys()


def default_pair(system) -> int:
    d = _max_priority(system)
    return (d + 1) // 2 if d % 2 else d // 2


def _max_priority(system) -> int:
    if isinstance(system, SymbolicSystem):
        return system.partition.sink_priority
    if isinstance(system, StreettChain):
        return 4
    return max(system.priority) + (max(system.priority) % 2)


def _role_from_priority(p: int, q: int) -> str:
    if p <= 2 * q - 2:
        return "B"
    if p == 2 * q - 1:
        return "A"
    return "N"


def _roles(system, pair: Optional[int]):
    """key -> role, for the finite or symbolic system."""
    if isinstance(system, StreettChain):
        return {s: ("B" if s in system.b else "A" if s in system.a else "N") for s in system.chain.states()}
    q = pair or default_pair(system)
    if isinstance(system, SymbolicSystem):
        return {k: _role_from_priority(k[1], q) for k in system.keys()}
    return {s: _role_from_priority(p, q) for s, p in enumerate(system.priority)}


def _chain(system) -> FiniteChain:
    return system.chain if isinstance(system, StreettChain) else system


def _priority(system, key) -> int:
    if isinstance(system, SymbolicSystem):
        return key[1]
    return _chain(system).priority[key]


# -- certificates ------------------------------------------------------------

@dataclass(frozen=True)
class ScalarCert:
    values: Mapping  # key/state -> Polynomial | Fraction

    def as_vec(self) -> "VecCert":
        return VecCert({k: (v,) for k, v in self.values.items()})


@dataclass(frozen=True)
class VecCert:
    values: Mapping  # key/state -> tuple

    @property
    def dim(self) -> int:
        return len(next(iter(self.values.values())))


@dataclass(frozen=True)
class NestedCert:
    shape: tuple
    values: Mapping  # key/state -> tuple of blocks
    reduced: bool = False

    def flat(self) -> VecCert:
        return VecCert({k: lo.flatten(v) for k, v in self.values.items()})


@dataclass(frozen=True)
class LexPmsMap:
    shape: tuple  # m_1 .. m_ceil(d/2)
    lev: Mapping  # key -> (j, k) | STAR
    values: Mapping  # key -> tuple of blocks

    def as_nested(self) -> NestedCert:
        return NestedCert(self.shape, self.values, reduced=True)


@dataclass(frozen=True)
class DvssmCert:
    values: Mapping  # state -> tuple of masses over 0..K (sums to 1)


@dataclass
class Verdict:
    status: str  # accept | reject | unknown
    witness: object = None
    reason: str = ""
    levels: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.status == "accept"


def _zero_like(v):
    return Polynomial() if isinstance(v, Polynomial) else Fraction(0)


def _vec_values(cert) -> dict:
    if isinstance(cert, ScalarCert):
        return {k: (v,) for k, v in cert.values.items()}
    if isinstance(cert, VecCert):
        return dict(cert.values)
    if isinstance(cert, (NestedCert, LexPmsMap)):
        return {k: lo.flatten(v) for k, v in cert.values.items()}
    raise TypeError(f"unsupported certificate {type(cert).__name__}")


# -- finite-mode helpers -----------------------------------------------------

def _finite_values(chain: FiniteChain, values: Mapping, dim: int) -> list:
    out = []
    for s in chain.states():
        if s not in values:
            raise ModelError(f"certificate has no value for state {s}")
        v = tuple(as_fraction(x) for x in values[s])
        if len(v) != dim:
            raise ModelError(f"state {s}: dimension {len(v)} != {dim}")
        out.append(v)
    return out


def next_vec(chain: FiniteChain, vals: Sequence[tuple], s: int) -> tuple:
    dim = len(vals[s])
    acc = [Fraction(0)] * dim
    for t, p in chain.rows[s]:
        for f in range(dim):
            acc[f] += p * vals[t][f]
    return tuple(acc)


def _finite_nonneg(vals) -> Optional[int]:
    for s, v in enumerate(vals):
        if any(x < 0 for x in v):
            return s
    return None


# -- symbolic-mode helpers ---------------------------------------------------

class _SymCache:
    """Memoises entailment results of R_f - X R_f - c >= 0 per case."""

    def __init__(self, system: SymbolicSystem, values: Mapping):
        self.system = system
        self.values = values
        self.memo: dict = {}

    def cond(self, key, f: int, c) -> tuple:
        """(status, witness) for component f with offset c over the whole region."""
        mk = (key, f, Fraction(c))
        if mk in self.memo:
            return self.memo[mk]
        status, wit = "valid", None
        for case in self.system.cases[key]:
            q = decrease_pqe(self.system.pcfg, case, self.values, f, c)
            res = check_entailment(q, self.system.backend)
            if res.status == "invalid":
                status, wit = "invalid", {"location": key[0], **{k: v for k, v in (res.witness or {}).items()}}
                break
            if res.status == "unknown":
                status = "unknown"
        self.memo[mk] = (status, wit)
        return status, wit

    def all_of(self, key, conds) -> tuple:
        unknown = False
        for f, c in conds:
            st, wit = self.cond(key, f, c)
            if st == "invalid":
                return "invalid", wit
            if st == "unknown":
                unknown = True
        return ("unknown" if unknown else "valid"), None


def _sym_nonneg(system: SymbolicSystem, values: Mapping, dim: int) -> tuple:
    unknown = False
    for f in range(dim):
        for q in nonneg_pqes(system.pcfg, system.partition, values, f):
            res = check_entailment(q, system.backend)
            if res.status == "invalid":
                return "invalid", {"component": f + 1, **(res.witness or {}), "region": q.label}
            if res.status == "unknown":
                unknown = True
    return ("unknown" if unknown else "valid"), None


def _sym_values(system: SymbolicSystem, values: Mapping, dim: int) -> dict:
    out = {}
    for key in system.keys():
        if key not in values:
            raise ModelError(f"certificate has no entry for region {key}")
        v = tuple(x if isinstance(x, Polynomial) else Polynomial.const(as_fraction(x)) for x in values[key])
        if len(v) != dim:
            raise ModelError(f"region {key}: dimension {len(v)} != {dim}")
        extra = set().union(*(p.variables() for p in v)) - set(system.pcfg.vars)
        if extra:
            raise ModelError(f"region {key}: unknown variables {sorted(extra)}")
        out[key] = v
    return out


def _lex_options(upto: int, strict_only: bool) -> list:
    """Condition lists for a uniform level: componentwise first, then each level."""
    opts = []
    if not strict_only:
        opts.append(("geq", [(f, 0) for f in range(upto)]))
    for l in range(1, upto + 1):
        opts.append((l, [(f, 0) for f in range(l - 1)] + [(l - 1, 1)]))
    return opts


def _sym_choose(cache: _SymCache, key, options) -> tuple:
    """First option valid on the region; otherwise reject/unknown with a witness."""
    unknown = False
    first_wit = None
    for tag, conds in options:
        st, wit = cache.all_of(key, conds)
        if st == "valid":
            return "valid", tag, None
        if st == "unknown":
            unknown = True
        elif first_wit is None:
            first_wit = wit
    return ("unknown" if unknown else "invalid"), None, first_wit


def _finish(status: str, witness=None, reason: str = "", levels=None) -> Verdict:
    m = {"valid": "accept", "invalid": "reject", "unknown": "unknown"}
    return Verdict(m.get(status, status), witness, reason, levels or {})


# -- checkers ----------------------------------------------------------------

def check_ssm(system, r: ScalarCert, epsilon, M, pair: Optional[int] = None) -> Verdict:
    """X r <= r - eps 1_{A\\B} + M 1_B everywhere, r >= 0."""
    epsilon, M = as_fraction(epsilon), as_fraction(M)
    if epsilon <= 0 or M <= 0:
        raise ValueError("epsilon and M must be positive")
    roles = _roles(system, pair)
    vals = _vec_values(r)
    if isinstance(system, SymbolicSystem):
        vals = _sym_values(system, vals, 1)
        st, wit = _sym_nonneg(system, vals, 1)
        if st != "valid":
            return _finish(st, wit, "negative value")
        cache = _SymCache(system, vals)
        unknown = False
        for key in system.keys():
            off = {"A": epsilon, "B": -M, "N": Fraction(0)}[roles[key]]
            st, wit = cache.cond(key, 0, off)
            if st == "invalid":
                return _finish(st, wit, f"supermartingale condition fails on region {key}")
            unknown |= st == "unknown"
        return _finish("unknown" if unknown else "valid")
    chain = _chain(system)
    v = _finite_values(chain, vals, 1)
    s = _finite_nonneg(v)
    if s is not None:
        return _finish("invalid", {"state": s}, "negative value")
    for s in chain.states():
        off = {"A": epsilon, "B": -M, "N": Fraction(0)}[roles[s]]
        if next_vec(chain, v, s)[0] > v[s][0] - off:
            return _finish("invalid", {"state": s}, "supermartingale condition fails")
    return _finish("valid")


def check_gssm(system, r: ScalarCert, pair: Optional[int] = None) -> Verdict:
    """X r <= r - 1 on A\\B, X r <= r off A and B, r >= 0."""
    roles = _roles(system, pair)
    vals = _vec_values(r)
    if isinstance(system, SymbolicSystem):
        vals = _sym_values(system, vals, 1)
        st, wit = _sym_nonneg(system, vals, 1)
        if st != "valid":
            return _finish(st, wit, "negative value")
        cache = _SymCache(system, vals)
        unknown = False
        for key in system.keys():
            if roles[key] == "B":
                continue
            st, wit = cache.cond(key, 0, 1 if roles[key] == "A" else 0)
            if st == "invalid":
                return _finish(st, wit, f"GSSM condition fails on region {key}")
            unknown |= st == "unknown"
        return _finish("unknown" if unknown else "valid")
    chain = _chain(system)
    v = _finite_values(chain, vals, 1)
    s = _finite_nonneg(v)
    if s is not None:
        return _finish("invalid", {"state": s}, "negative value")
    for s in chain.states():
        if roles[s] == "B":
            continue
        need = 1 if roles[s] == "A" else 0
        if next_vec(chain, v, s)[0] > v[s][0] - need:
            return _finish("invalid", {"state": s}, "GSSM condition fails")
    return _finish("valid")


def check_lexgssm(system, r, pair: Optional[int] = None) -> Verdict:
    """Strict lexicographic decrease on A\\B, non-strict off A and B."""
    roles = _roles(system, pair)
    vals = _vec_values(r)
    dim = len(next(iter(vals.values())))
    if isinstance(system, SymbolicSystem):
        vals = _sym_values(system, vals, dim)
        st, wit = _sym_nonneg(system, vals, dim)
        if st != "valid":
            return _finish(st, wit, "negative component")
        cache = _SymCache(system, vals)
        levels, unknown = {}, False
        for key in system.keys():
            if roles[key] == "B":
                continue
            st, tag, wit = _sym_choose(cache, key, _lex_options(dim, roles[key] == "A"))
            if st == "invalid":
                return _finish(st, wit, f"no uniform level works on region {key}")
            if st == "unknown":
                unknown = True
                continue
            levels[key] = tag
        return _finish("unknown" if unknown else "valid", levels=levels)
    chain = _chain(system)
    v = _finite_values(chain, vals, dim)
    s = _finite_nonneg(v)
    if s is not None:
        return _finish("invalid", {"state": s}, "negative component")
    levels = {}
    for s in chain.states():
        if roles[s] == "B":
            continue
        x = next_vec(chain, v, s)
        l = lo.lex_gt(v[s], x)
        if roles[s] == "A":
            if l is None:
                return _finish("invalid", {"state": s}, "no strict decrease on A")
            levels[s] = l
        else:
            if not lo.lex_geq(v[s], x):
                return _finish("invalid", {"state": s}, "increase off A and B")
            levels[s] = "geq" if lo.geq_componentwise(v[s], x) else l
    return _finish("valid", levels=levels)


def _truncated_check(system, vals: Mapping, dim: int, upto_of, label: str) -> Verdict:
    """Shared body of PMSM-style checkers; upto_of(priority) -> flat prefix length."""
    if isinstance(system, SymbolicSystem):
        vals = _sym_values(system, vals, dim)
        st, wit = _sym_nonneg(system, vals, dim)
        if st != "valid":
            return _finish(st, wit, "negative component")
        cache = _SymCache(system, vals)
        levels, unknown = {}, False
        for key in system.keys():
            p = key[1]
            upto = upto_of(p)
            if upto == 0:
                if p % 2:
                    return _finish("invalid", {"location": key[0]}, f"odd priority {p} with empty prefix")
                continue
            st, tag, wit = _sym_choose(cache, key, _lex_options(upto, p % 2 == 1))
            if st == "invalid":
                return _finish(st, wit, f"{label}: no uniform level on region {key}")
            if st == "unknown":
                unknown = True
                continue
            levels[key] = tag
        return _finish("unknown" if unknown else "valid", levels=levels)
    chain = _chain(system)
    v = _finite_values(chain, vals, dim)
    s = _finite_nonneg(v)
    if s is not None:
        return _finish("invalid", {"state": s}, "negative component")
    levels = {}
    for s in chain.states():
        p = chain.priority[s]
        upto = upto_of(p)
        if upto == 0:
            if p % 2:
                return _finish("invalid", {"state": s}, f"odd priority {p} with empty prefix")
            continue
        x = next_vec(chain, v, s)
        l = lo.lex_gt_trunc(v[s], x, upto)
        if p % 2:
            if l is None:
                return _finish("invalid", {"state": s}, f"{label}: no strict decrease at odd priority {p}")
            levels[s] = l
        else:
            if not lo.lex_geq_trunc(v[s], x, upto):
                return _finish("invalid", {"state": s}, f"{label}: increase at even priority {p}")
            levels[s] = "geq" if lo.geq_componentwise(v[s][:upto], x[:upto]) else l
    return _finish("valid", levels=levels)


def _check_priorities(system, d: int):
    if isinstance(system, SymbolicSystem):
        ps = [k[1] for k in system.keys()]
    else:
        ps = list(_chain(system).priority)
    if ps and max(ps) > d:
        raise ModelError(f"priority {max(ps)} exceeds the certificate's range {d}")


def check_pmsm(system, r: VecCert) -> Verdict:
    """Truncated at p(x): non-strict for even, strict for odd priorities."""
    vals = _vec_values(r)
    dim = len(next(iter(vals.values())))
    _check_priorities(system, dim)
    return _truncated_check(system, vals, dim, lambda p: p, "PMSM")


def check_lexpmsm(system, r: NestedCert) -> Verdict:
    """Nested order truncated at p(x) blocks."""
    if r.reduced:
        return check_reduced_lexpmsm(system, r)
    shape = tuple(r.shape)
    _check_shape(r)
    _check_priorities(system, len(shape))
    vals = _vec_values(r)
    return _truncated_check(system, vals, sum(shape), lambda p: sum(shape[:p]), "LexPMSM")


def check_reduced_lexpmsm(system, r: NestedCert) -> Verdict:
    """Nested order truncated at ceil(p(x)/2) blocks."""
    shape = tuple(r.shape)
    _check_shape(r)
    _check_priorities(system, 2 * len(shape))
    vals = _vec_values(r)
    return _truncated_check(system, vals, sum(shape), lambda p: sum(shape[: (p + 1) // 2]), "reduced LexPMSM")


def _check_shape(r):
    if any(m < 1 for m in r.shape):
        raise ModelError("every block needs at least one component")
    for k, v in r.values.items():
        if lo.shape_of(v) != tuple(r.shape):
            raise ModelError(f"entry {k} has shape {lo.shape_of(v)}, expected {tuple(r.shape)}")


def lev_structure_errors(lev: Mapping, shape: Sequence[int], keys_with_priority) -> list:
    errs = []
    for key, p in keys_with_priority:
        if key not in lev:
            errs.append(f"{key}: no level assigned")
            continue
        L = lev[key]
        if L == STAR:
            if p % 2:
                errs.append(f"{key}: star level on odd priority {p}")
            continue
        j, k = L
        if not (1 <= j <= len(shape)) or not (1 <= k <= shape[j - 1]):
            errs.append(f"{key}: level {L} outside the shape {tuple(shape)}")
        elif j > math.ceil(p / 2):
            errs.append(f"{key}: level block {j} exceeds ceil({p}/2)")
    return errs


def check_lexpmsm_map(system, m: LexPmsMap) -> Verdict:
    """Region-uniform levels: strict exactly at lev, or componentwise >= on blocks <= ceil(i/2)."""
    shape = tuple(m.shape)
    if any(x < 1 for x in shape):
        return _finish("invalid", None, "every m_j must be positive")
    if isinstance(system, SymbolicSystem):
        keys = [(k, k[1]) for k in system.keys()]
    else:
        keys = [(s, p) for s, p in enumerate(_chain(system).priority)]
    if keys and max(p for _, p in keys) > 2 * len(shape):
        return _finish("invalid", None, f"shape has {len(shape)} blocks, too few for the priorities")
    errs = lev_structure_errors(m.lev, shape, keys)
    if errs:
        return _finish("invalid", None, "structural: " + "; ".join(errs))
    for k, v in m.values.items():
        if lo.shape_of(v) != shape:
            return _finish("invalid", None, f"structural: entry {k} has shape {lo.shape_of(v)}")
    dim = sum(shape)
    vals = _vec_values(m)

    def conds(key, p):
        L = m.lev[key]
        if L == STAR:
            upto = sum(shape[: math.ceil(p / 2)])
            return [(f, 0) for f in range(upto)]
        l = lo.level_to_flat(shape, L)
        return [(f, 0) for f in range(l - 1)] + [(l - 1, 1)]

    if isinstance(system, SymbolicSystem):
        vals = _sym_values(system, vals, dim)
        st, wit = _sym_nonneg(system, vals, dim)
        if st != "valid":
            return _finish(st, wit, "negative component")
        cache = _SymCache(system, vals)
        unknown = False
        for key, p in keys:
            st, wit = cache.all_of(key, conds(key, p))
            if st == "invalid":
                return _finish(st, wit, f"level {m.lev[key]} fails on region {key}")
            unknown |= st == "unknown"
        return _finish("unknown" if unknown else "valid", levels=dict(m.lev))
    chain = _chain(system)
    v = _finite_values(chain, vals, dim)
    s = _finite_nonneg(v)
    if s is not None:
        return _finish("invalid", {"state": s}, "negative component")
    for s, p in keys:
        x = next_vec(chain, v, s)
        for f, c in conds(s, p):
            if v[s][f] - x[f] < c:
                return _finish("invalid", {"state": s}, f"level {m.lev[s]} fails")
    return _finish("valid", levels=dict(m.lev))


def _tail(dist: Sequence[Fraction], a: int) -> Fraction:
    return sum(dist[a:], Fraction(0)) if a < len(dist) else Fraction(0)


def check_dvssm(system, r: DvssmCert, pair: Optional[int] = None) -> Verdict:
    """1 (+) X r <= r on A\\B and X r <= r off A and B, in the stochastic order."""
    if isinstance(system, SymbolicSystem):
        raise ModelError("DVSSM checking is defined on finite chains only")
    chain = _chain(system)
    roles = _roles(system, pair)
    K = max(len(r.values[s]) for s in chain.states())
    dist = []
    for s in chain.states():
        d = [as_fraction(x) for x in r.values[s]]
        if any(x < 0 for x in d):
            return _finish("invalid", {"state": s}, "negative mass")
        if sum(d, Fraction(0)) != 1:
            return _finish("invalid", {"state": s}, "masses do not sum to 1")
        dist.append(d + [Fraction(0)] * (K - len(d)))
    for s in chain.states():
        if roles[s] == "B":
            continue
        mix = [Fraction(0)] * K
        for t, p in chain.rows[s]:
            for m in range(K):
                mix[m] += p * dist[t][m]
        if roles[s] == "A":
            mix = [Fraction(0)] + mix
        for a in range(len(mix) + 1):
            if _tail(mix, a) > _tail(dist[s], a):
                return _finish("invalid", {"state": s, "threshold": a}, "stochastic order violated")
    return _finish("valid")


# -- translations ------------------------------------------------------------

def translate_ssm_to_gssm(r: ScalarCert, epsilon) -> ScalarCert:
    e = as_fraction(epsilon)
    if e <= 0:
        raise ValueError("epsilon must be positive")
    return ScalarCert({k: v * (1 / e) for k, v in r.values.items()})


def translate_lexpmsm_to_lexgssm(r: NestedCert, i: int) -> VecCert:
    """Blocks 1..2i-1 of a full LexPMSM, flattened: a LexGSSM for pair i."""
    if r.reduced:
        if not (1 <= i <= len(r.shape)):
            raise ValueError(f"pair index {i} outside 1..{len(r.shape)}")
        return VecCert({k: lo.flatten(v[:i]) for k, v in r.values.items()})
    if not (1 <= 2 * i - 1 <= len(r.shape)):
        raise ValueError(f"pair index {i} needs {2 * i - 1} blocks, shape has {len(r.shape)}")
    return VecCert({k: lo.flatten(v[: 2 * i - 1]) for k, v in r.values.items()})


def translate_lexgssms_to_reduced(rs: Sequence[VecCert]) -> NestedCert:
    if not rs:
        raise ValueError("need at least one LexGSSM")
    keys = set(rs[0].values)
    for r in rs:
        if set(r.values) != keys:
            raise ValueError("LexGSSMs are defined on different keys")
    shape = tuple(r.dim for r in rs)
    values = {k: tuple(tuple(r.values[k]) for r in rs) for k in rs[0].values}
    return NestedCert(shape, values, reduced=True)


def translate_lexpmsm_to_reduced(r: NestedCert) -> NestedCert:
    """r'_1 = r_1 and r'_j = flat(r_{2j-2}, r_{2j-1})."""
    if r.reduced:
        return r
    d = len(r.shape)
    nb = (d + 1) // 2
    shape = [r.shape[0]] + [r.shape[2 * j - 3] + r.shape[2 * j - 2] for j in range(2, nb + 1)]
    values = {}
    for k, v in r.values.items():
        blocks = [tuple(v[0])] + [tuple(v[2 * j - 3]) + tuple(v[2 * j - 2]) for j in range(2, nb + 1)]
        values[k] = tuple(blocks)
    return NestedCert(tuple(shape), values, reduced=True)


def translate_reduced_to_full(r: NestedCert, d: Optional[int] = None) -> NestedCert:
    """Insert a zero block (length 1) at every even priority."""
    if not r.reduced:
        return r
    nb = len(r.shape)
    d = 2 * nb if d is None else d
    if (d + 1) // 2 != nb:
        raise ValueError(f"d = {d} does not match {nb} reduced blocks")
    shape = []
    for p in range(1, d + 1):
        shape.append(r.shape[(p - 1) // 2] if p % 2 else 1)
    values = {}
    for k, v in r.values.items():
        z = _zero_like(v[0][0])
        values[k] = tuple(tuple(v[(p - 1) // 2]) if p % 2 else (z,) for p in range(1, d + 1))
    return NestedCert(tuple(shape), values, reduced=False)


def translate_lexpmsm_map_to_reduced(m: LexPmsMap) -> NestedCert:
    return m.as_nested()


def translate_gssm_to_lexgssm(r: ScalarCert) -> VecCert:
    return r.as_vec()


def lift_gssm_to_pmsm(r: ScalarCert, pair: int, d: int) -> VecCert:
    """Vector of length d with the GSSM at component 2*pair-1 and zeros elsewhere."""
    out = {}
    for k, v in r.values.items():
        z = _zero_like(v)
        out[k] = tuple(v if f == 2 * pair - 2 else z for f in range(d))
    return VecCert(out)


def check(kind: str, system, cert, **kw) -> Verdict:
    """Dispatch by certificate kind name."""
    kind = kind.lower()
    pair = kw.get("pair")
    if kind == "ssm":
        return check_ssm(system, cert, kw["epsilon"], kw["M"], pair)
    if kind == "gssm":
        return check_gssm(system, cert, pair)
    if kind == "lexgssm":
        return check_lexgssm(system, cert, pair)
    if kind == "pmsm":
        return check_pmsm(system, cert)
    if kind == "lexpmsm":
        return check_lexpmsm(system, cert)
    if kind in ("reduced_lexpmsm", "reduced-lexpmsm"):
        return check_reduced_lexpmsm(system, cert)
    if kind in ("lexpmsm_map", "lexpmsm-map", "map"):
        return check_lexpmsm_map(system, cert)
    if kind == "dvssm":
        return check_dvssm(system, cert, pair)
    raise ValueError(f"unknown certificate kind {kind!r}")


KINDS = ("ssm", "gssm", "lexgssm", "pmsm", "lexpmsm", "reduced_lexpmsm", "lexpmsm_map", "dvssm")
