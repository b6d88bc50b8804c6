"""JSON documents: pCFG systems, finite chains, certificates and verdicts.

Rationals are written as "num/den" strings (integers as "n"), keys are
sorted, so identical objects serialise byte-for-byte identically.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional

from .certificates import (STAR, DvssmCert, LexPmsMap, NestedCert, ScalarCert, StreettChain, SymbolicSystem,
                           VecCert, Verdict)
from .model import (Branch, Command, FiniteChain, Guard, ModelError, Pcfg, PriorityPartition, Region,
                    StreettPair, streett_to_priority_partition)
from .poly import Polynomial, as_fraction, fraction_str, parse_poly

VERDICT_SCHEMA = "lexpmsm.verdict/1"
CERT_SCHEMA = "lexpmsm.certificate/1"


class InputError(ValueError):
    pass


def _num(x) -> Fraction:
    if isinstance(x, float):
        raise InputError(f"floating-point literal {x!r}; write rationals as strings like \"1/2\"")
    try:
        return as_fraction(x)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad rational {x!r}: {exc}") from None


def jnum(q) -> str:
    if isinstance(q, Polynomial):
        return str(q)
    return fraction_str(Fraction(q))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_json(path) -> dict:
    try:
        text = Path(path).read_text() if str(path) != "-" else __import__("sys").stdin.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    return doc


# -- pCFG documents ----------------------------------------------------------

class Problem:
    """A parsed input: either a symbolic pCFG with a partition or a finite chain."""

    def __init__(self, name: str, pcfg: Optional[Pcfg] = None, partition: Optional[PriorityPartition] = None,
                 chain: Optional[FiniteChain] = None, pair: Optional[StreettPair] = None, doc: Optional[dict] = None):
        self.name = name
        self.pcfg = pcfg
        self.partition = partition
        self.chain = chain
        self.pair = pair
        self.doc = doc or {}

    @property
    def finite(self) -> bool:
        return self.chain is not None

    def system(self, backend=None):
        if self.finite:
            if self.pair is not None:
                return StreettChain(self.chain, frozenset(self.pair.a), frozenset(self.pair.b))
            return self.chain
        return SymbolicSystem(self.pcfg, self.partition, backend)

    def states(self) -> list:
        return [(s["location"], tuple(_num(x) for x in s["values"])) for s in self.doc.get("states", [])]


def _guard(spec, allowed) -> Guard:
    try:
        return Guard.parse(spec, allowed)
    except (ValueError, SyntaxError) as exc:
        raise InputError(f"bad guard {spec!r}: {exc}") from None


def _poly(text, allowed) -> Polynomial:
    if isinstance(text, (int, Fraction)):
        return Polynomial.const(Fraction(text))
    try:
        return parse_poly(str(text), allowed)
    except (ValueError, SyntaxError) as exc:
        raise InputError(f"bad polynomial {text!r}: {exc}") from None


def parse_pcfg(doc: Mapping) -> Pcfg:
    try:
        vars_ = tuple(doc["vars"])
        locs = tuple(doc["locations"])
    except KeyError as exc:
        raise InputError(f"pCFG document lacks {exc}") from None
    allowed = set(vars_)
    cmds: dict = {}
    for c in doc.get("commands", []):
        try:
            loc = c["location"]
            branches = []
            for b in c["branches"]:
                upd = b.get("update", {})
                if isinstance(upd, list):
                    if len(upd) != len(vars_):
                        raise InputError(f"update at {loc!r} has {len(upd)} entries, expected {len(vars_)}")
                    up = tuple(_poly(u, allowed) for u in upd)
                else:
                    unknown = set(upd) - allowed
                    if unknown:
                        raise InputError(f"update at {loc!r} assigns undeclared {sorted(unknown)}")
                    up = tuple(_poly(upd[v], allowed) if v in upd else Polynomial.var(v) for v in vars_)
                branches.append(Branch(_num(b.get("prob", "1")), b["target"], up))
            cmds.setdefault(loc, []).append(Command(_guard(c.get("guard", "true"), allowed), tuple(branches)))
        except KeyError as exc:
            raise InputError(f"command lacks field {exc}") from None
    try:
        return Pcfg(vars_, locs, {l: tuple(v) for l, v in cmds.items()})
    except ModelError as exc:
        raise InputError(str(exc)) from None


def _descriptor(spec, allowed) -> dict:
    """location -> tuple of guards (a union)."""
    out = {}
    for loc, gs in (spec or {}).items():
        if isinstance(gs, str):
            gs = [gs]
        out[loc] = tuple(_guard(g, allowed) for g in gs)
    return out


def parse_problem(doc: Mapping, name: str = "") -> Problem:
    name = doc.get("name", name)
    if "chain" in doc:
        chain = parse_chain(doc["chain"])
        pair = None
        if "streett" in doc:
            s = doc["streett"]
            pair = StreettPair(frozenset(int(x) for x in s.get("a", [])), frozenset(int(x) for x in s.get("b", [])))
        return Problem(name, chain=chain, pair=pair, doc=dict(doc))
    pcfg = parse_pcfg(doc)
    allowed = set(pcfg.vars)
    inv = {l: _guard(g, allowed) for l, g in doc.get("invariant", {}).items()}
    for l in inv:
        if l not in pcfg.locations:
            raise InputError(f"invariant for unknown location {l!r}")
    pair = None
    if "partition" in doc:
        p = doc["partition"]
        regs = []
        for r in p.get("regions", []):
            try:
                if r["location"] not in pcfg.locations:
                    raise InputError(f"region at unknown location {r['location']!r}")
                regs.append(Region(r["location"], int(r["priority"]), _guard(r.get("guard", "true"), allowed)))
            except KeyError as exc:
                raise InputError(f"region lacks {exc}") from None
        d = int(p.get("d", max((r.priority for r in regs), default=2)))
        try:
            part = PriorityPartition(d, tuple(regs)).with_invariant(inv)
        except ModelError as exc:
            raise InputError(str(exc)) from None
    elif "streett" in doc:
        s = doc["streett"]
        pair = StreettPair(_descriptor(s.get("a"), allowed), _descriptor(s.get("b"), allowed))
        from .symbolic import Feasibility

        part = streett_to_priority_partition(pcfg, [pair], inv, Feasibility(pcfg.vars))
    else:
        raise InputError("a pCFG document needs a 'partition' or a 'streett' pair")
    prob = Problem(name, pcfg=pcfg, partition=part, pair=pair, doc=dict(doc))
    return prob


def load_problem(path) -> Problem:
    return parse_problem(load_json(path), Path(str(path)).stem)


def parse_chain(c: Mapping) -> FiniteChain:
    try:
        rows = [[(int(t), _num(p)) for t, p in row] for row in c["rows"]]
        pri = c.get("priority")
        return FiniteChain.make(rows, pri, tuple(c.get("labels", ())))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad chain: {exc}") from None


def dump_chain(chain: FiniteChain) -> dict:
    out = {"rows": [[[t, jnum(p)] for t, p in row] for row in chain.rows], "priority": list(chain.priority)}
    if chain.labels:
        out["labels"] = list(chain.labels)
    return out


# -- certificates ------------------------------------------------------------

def _key_of(entry, finite: bool):
    if finite:
        return int(entry["state"])
    return (entry["location"], int(entry["priority"]))


def _level(x):
    if x == STAR or x == "star":
        return STAR
    j, k = x
    return (int(j), int(k))


def parse_certificate(doc: Mapping, allowed=None, finite: bool = False) -> tuple[str, object, dict]:
    """(kind, certificate, extra parameters such as epsilon, M, pair)."""
    try:
        kind = str(doc["kind"]).lower().replace("-", "_")
    except KeyError:
        raise InputError("certificate lacks 'kind'") from None
    entries = doc.get("states" if finite and "states" in doc else "regions", [])
    extra = {}
    for f in ("epsilon", "M"):
        if f in doc:
            extra[f] = _num(doc[f])
    if "pair" in doc:
        extra["pair"] = int(doc["pair"])

    def val(x):
        return _num(x) if finite else _poly(x, allowed)

    try:
        if kind == "dvssm":
            return kind, DvssmCert({_key_of(e, True): tuple(_num(x) for x in e["dist"]) for e in entries}), extra
        values = {}
        for e in entries:
            blocks = e["polys"]
            if isinstance(blocks, (str, int)):
                blocks = [[blocks]]
            values[_key_of(e, finite)] = tuple(tuple(val(x) for x in b) for b in blocks)
        if kind in ("ssm", "gssm"):
            for k, v in values.items():
                if len(v) != 1 or len(v[0]) != 1:
                    raise InputError(f"{kind} entry {k} must hold a single polynomial")
            return kind, ScalarCert({k: v[0][0] for k, v in values.items()}), extra
        if kind in ("lexgssm", "pmsm"):
            return kind, VecCert({k: tuple(x for b in v for x in b) for k, v in values.items()}), extra
        shape = tuple(int(m) for m in doc.get("shape") or (len(b) for b in next(iter(values.values()))))
        if kind == "lexpmsm":
            return kind, NestedCert(shape, values, reduced=False), extra
        if kind == "reduced_lexpmsm":
            return kind, NestedCert(shape, values, reduced=True), extra
        if kind in ("lexpmsm_map", "map"):
            lev = {}
            for e in doc.get("lev", []):
                lev[_key_of(e, finite)] = _level(e["level"])
            return "lexpmsm_map", LexPmsMap(shape, lev, values), extra
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed certificate entry: {exc}") from None
    raise InputError(f"unknown certificate kind {kind!r}")


def _entry_key(k) -> dict:
    if isinstance(k, tuple):
        return {"location": k[0], "priority": k[1]}
    return {"state": k}


def dump_certificate(kind: str, cert, **extra) -> dict:
    out = {"schema": CERT_SCHEMA, "kind": kind}
    for f, v in extra.items():
        if v is not None:
            out[f] = jnum(v) if isinstance(v, Fraction) else v
    if isinstance(cert, DvssmCert):
        out["states"] = [{"state": k, "dist": [jnum(x) for x in v]} for k, v in sorted(cert.values.items())]
        return out
    if isinstance(cert, ScalarCert):
        values = {k: ((v,),) for k, v in cert.values.items()}
    elif isinstance(cert, VecCert):
        values = {k: (tuple(v),) for k, v in cert.values.items()}
    else:
        values = cert.values
        out["shape"] = list(cert.shape)
    finite = all(isinstance(k, int) for k in values)
    field = "states" if finite else "regions"
    out[field] = [{**_entry_key(k), "polys": [[jnum(x) for x in b] for b in v]}
                  for k, v in sorted(values.items())]
    if isinstance(cert, LexPmsMap):
        out["lev"] = [{**_entry_key(k), "level": (STAR if L == STAR else list(L))}
                      for k, L in sorted(cert.lev.items())]
    return out


# -- verdicts ----------------------------------------------------------------

def _wit(w):
    if w is None:
        return None
    if isinstance(w, Mapping):
        return {str(k): (jnum(v) if isinstance(v, (Fraction, int)) and not isinstance(v, bool) else v)
                for k, v in w.items()}
    return w


def _lev_json(L):
    if L == STAR or L == "geq" or isinstance(L, str):
        return L
    if isinstance(L, tuple):
        return list(L)
    return L


def dump_verdict(v: Verdict, kind: str, mode: str) -> dict:
    return {
        "schema": VERDICT_SCHEMA,
        "kind": kind,
        "mode": mode,
        "status": v.status,
        "reason": v.reason,
        "witness": _wit(v.witness),
        "levels": [{**_entry_key(k), "level": _lev_json(L)} for k, L in sorted(v.levels.items(), key=lambda kv: str(kv[0]))],
    }
