"""Command-line entry point.

Exit codes: 0 accept / found, 1 reject / not found, 2 unknown or solver
failure, 3 input error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io as _io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from . import __version__
from . import certificates as C
from . import oracle as O
from .io import (InputError, Problem, dump_certificate, dump_chain, dump_verdict, dumps, jnum, load_json,
                 load_problem, parse_certificate, parse_problem)
from .model import FiniteChain, ModelError, pcfg_to_finite_chain
from .poly import as_fraction
from .pqe import BuiltinBackend, SmtBackend, default_solver_cmd, emit_smt
from .symbolic import AmbiguousRegion
from .synthesis import (NotFound, SynthesisError, TemplateConfig, build_constraints, make_templates,
                        round_system, synthesize, synthesize_finite)

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3
log = logging.getLogger("lexpmsm")


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    flags: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        flags = {k: v for k, v in vars(ns).items() if k not in ("command", "input", "func")}
        return cls(ns.command, getattr(ns, "input", None), flags)


def _backend(ns):
    cmd = getattr(ns, "solver_cmd", None) or default_solver_cmd()
    if cmd:
        return SmtBackend(cmd, ns.solver_timeout, ns.solver_supports_opt)
    return BuiltinBackend()


def _write(text: str, out: Optional[str]):
    if out and out != "-":
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _finite_chain(prob: Problem) -> FiniteChain:
    if prob.finite:
        return prob.chain
    states = prob.states()
    if not states:
        raise InputError("this command needs a finite chain: add a 'states' enumeration to the pCFG document")
    return pcfg_to_finite_chain(prob.pcfg, prob.partition, states)


# -- check -------------------------------------------------------------------

def cmd_check(ns) -> int:
    prob = load_problem(ns.input)
    cdoc = load_json(ns.certificate)
    finite = prob.finite or ns.mode == "finite"
    system = prob.system(_backend(ns))
    if ns.mode == "finite" and not prob.finite:
        system = _finite_chain(prob)
    allowed = None if finite else set(prob.pcfg.vars)
    kind, cert, extra = parse_certificate(cdoc, allowed, finite=finite)
    if ns.pair is not None:
        extra["pair"] = ns.pair
    if ns.epsilon is not None:
        extra["epsilon"] = as_fraction(ns.epsilon)
    if ns.M is not None:
        extra["M"] = as_fraction(ns.M)
    if kind == "ssm" and ("epsilon" not in extra or "M" not in extra):
        raise InputError("an SSM check needs epsilon and M (in the certificate or as flags)")
    kw = {k: v for k, v in extra.items() if k in ("epsilon", "M", "pair")}
    t0 = time.perf_counter()
    verdict = C.check(kind, system, cert, **kw)
    doc = dump_verdict(verdict, kind, "finite" if finite else "symbolic")
    doc["seconds"] = round(time.perf_counter() - t0, 6)
    _write(dumps(doc), ns.output)
    return {"accept": EXIT_OK, "reject": EXIT_NO}.get(verdict.status, EXIT_UNKNOWN)


# -- synthesize --------------------------------------------------------------

def cmd_synthesize(ns) -> int:
    prob = load_problem(ns.input)
    config = TemplateConfig(degree=ns.degree, coeff_bound=as_fraction(ns.coeff_bound) if ns.coeff_bound else None,
                            optimize=ns.opt)
    if ns.emit_smt:
        if prob.finite:
            raise InputError("--emit-smt needs a pCFG input")
        templates, params = make_templates(prob.pcfg, prob.partition.keys(), config.degree)
        c0, c1 = build_constraints(prob.pcfg, prob.partition, prob.partition.keys(), templates)
        system, _ = round_system(c0, c1, params, config)
        Path(ns.emit_smt).write_text(emit_smt(system, optimize=ns.opt))
    try:
        if prob.finite or ns.finite:
            res, trace = synthesize_finite(_finite_chain(prob), config)
        else:
            res, trace = synthesize(prob.pcfg, prob.partition, config, _backend(ns))
    except SynthesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    if ns.trace:
        Path(ns.trace).write_text(dumps(trace.to_json()))
    if isinstance(res, NotFound):
        out = {"schema": "lexpmsm.result/1", "status": "not-found", "reason": res.reason, "block": res.j,
               "stuck": [list(k) if isinstance(k, tuple) else k for k in res.stuck]}
        _write(dumps(out), ns.output)
        return EXIT_NO
    _write(dumps(dump_certificate("lexpmsm_map", res)), ns.output)
    return EXIT_OK


# -- oracle ------------------------------------------------------------------

def _ab(prob: Problem, chain: FiniteChain, pair: Optional[int]):
    if prob.finite and prob.pair is not None and pair is None:
        return frozenset(prob.pair.a), frozenset(prob.pair.b)
    d = max(chain.priority)
    q = pair or ((d + 1) // 2 if d % 2 else d // 2)
    A = frozenset(s for s in chain.states() if chain.priority[s] == 2 * q - 1)
    B = frozenset(s for s in chain.states() if chain.priority[s] <= 2 * q - 2)
    return A, B


def _ext(x):
    return "inf" if x == math.inf else jnum(x)


def cmd_oracle(ns) -> int:
    prob = load_problem(ns.input)
    chain = _finite_chain(prob)
    A, B = _ab(prob, chain, ns.pair)
    rep: dict = {"schema": "lexpmsm.oracle/1", "analysis": ns.analysis, "states": chain.n_states,
                 "A": sorted(A), "B": sorted(B)}
    if chain.labels:
        rep["labels"] = list(chain.labels)
    an = ns.analysis
    if an in ("expected-steps", "all"):
        e = O.expected_steps_exact(chain, A, B)
        rep["expected_steps"] = [_ext(v) for v in e.values]
    if an in ("ke", "all"):
        its = O.ke_iterate(chain, A, B, ns.iterations or 10)
        rep["ke_iterates"] = [[_ext(v) for v in it.values] for it in its]
    if an in ("kp", "all"):
        dist = O.kp_iterate(chain, A, B, ns.horizon, ns.iterations)
        rep["kp"] = {"horizon": dist.horizon,
                     "masses": [[jnum(x) for x in m] for m in dist.masses],
                     "tails": [jnum(x) for x in dist.tails]}
    if an in ("recurrence", "all"):
        rep["null_recurrent"] = list(O.null_recurrent(chain, A, B))
        rep["divergent"] = sorted(O.divergent_states(chain, A, B))
    if an in ("parity", "all"):
        rep["almost_sure_parity"] = list(O.almost_sure_parity(chain))
        rep["parity_probability"] = [jnum(x) for x in O.parity_probability(chain)]
        rep["bsccs"] = [sorted(c) for c in O.bsccs(chain)]
    if an in ("sample", "all"):
        s = O.sample_traces(chain, ns.state, ns.horizon, ns.samples, ns.seed, A, B)
        rep["sample"] = {"state": ns.state, "count": s.count, "horizon": s.horizon, "b_visits": s.b_visits,
                         "steps": {str(k): v for k, v in sorted(s.steps.items())},
                         "min_priority": {str(k): v for k, v in sorted(s.min_priority.items())}}
    if an == "chain":
        rep["chain"] = dump_chain(chain)
    _write(dumps(rep), ns.output)
    return EXIT_OK


# -- translate ---------------------------------------------------------------

def cmd_translate(ns) -> int:
    docs = [load_json(p) for p in ns.certificates]
    finite = all("states" in d for d in docs)
    parsed = [parse_certificate(d, None, finite=finite) for d in docs]
    kind, cert, extra = parsed[0]
    to = ns.to.replace("-", "_")
    if to == "gssm" and kind == "ssm":
        eps = extra.get("epsilon") or (as_fraction(ns.epsilon) if ns.epsilon else None)
        if eps is None:
            raise InputError("ssm -> gssm needs epsilon")
        out = dump_certificate("gssm", C.translate_ssm_to_gssm(cert, eps))
    elif to == "lexgssm" and kind in ("lexpmsm", "reduced_lexpmsm", "lexpmsm_map"):
        if ns.pair is None:
            raise InputError("--pair is required for translation to a LexGSSM")
        nested = cert.as_nested() if isinstance(cert, C.LexPmsMap) else cert
        out = dump_certificate("lexgssm", C.translate_lexpmsm_to_lexgssm(nested, ns.pair), pair=ns.pair)
    elif to == "lexgssm" and kind == "gssm":
        out = dump_certificate("lexgssm", C.translate_gssm_to_lexgssm(cert))
    elif to == "reduced_lexpmsm" and kind == "lexgssm":
        out = dump_certificate("reduced_lexpmsm", C.translate_lexgssms_to_reduced([c for _, c, _ in parsed]))
    elif to == "reduced_lexpmsm" and kind == "lexpmsm":
        out = dump_certificate("reduced_lexpmsm", C.translate_lexpmsm_to_reduced(cert))
    elif to == "reduced_lexpmsm" and kind == "lexpmsm_map":
        out = dump_certificate("reduced_lexpmsm", C.translate_lexpmsm_map_to_reduced(cert))
    elif to == "lexpmsm" and kind in ("reduced_lexpmsm", "lexpmsm_map"):
        nested = cert.as_nested() if isinstance(cert, C.LexPmsMap) else cert
        out = dump_certificate("lexpmsm", C.translate_reduced_to_full(nested, ns.d))
    else:
        raise InputError(f"no translation from {kind} to {to}")
    _write(dumps(out), ns.output)
    return EXIT_OK


# -- bench -------------------------------------------------------------------

def bundled_dir() -> Path:
    return Path(str(resources.files("lexpmsm") / "benchmarks"))


def _bench_one(path: Path, degree: int, solver_cmd: Optional[str], timeout: float, opt: bool) -> dict:
    t0 = time.perf_counter()
    row = {"name": path.stem, "reconstruction": False}
    try:
        prob = load_problem(path)
        row["reconstruction"] = bool(prob.doc.get("reconstruction"))
        backend = SmtBackend(solver_cmd, timeout) if solver_cmd else BuiltinBackend()
        row["backend"] = backend.name
        config = TemplateConfig(degree=degree, optimize=opt)
        if prob.finite:
            res, trace = synthesize_finite(prob.chain, config)
        else:
            res, trace = synthesize(prob.pcfg, prob.partition, config, backend)
        if isinstance(res, NotFound):
            row.update(result="not-found", shape="", rounds=len(trace.rounds))
        else:
            row.update(result="found", shape="x".join(str(m) for m in res.shape), rounds=len(trace.rounds),
                       certificate=dump_certificate("lexpmsm_map", res))
    except (InputError, ModelError, SynthesisError) as exc:
        row.update(result="error", shape="", rounds=0, error=str(exc))
    row["seconds"] = round(time.perf_counter() - t0, 3)
    return row


def cmd_bench(ns) -> int:
    d = Path(ns.corpus) if ns.corpus else bundled_dir()
    files = sorted(p for p in d.glob("*.json"))
    if not files:
        raise InputError(f"no benchmark files in {d}")
    cmd = ns.solver_cmd or default_solver_cmd()
    if ns.jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(ns.jobs) as ex:
            rows = list(ex.map(lambda p: _bench_one(p, ns.degree, cmd, ns.solver_timeout, ns.opt), files))
    else:
        rows = [_bench_one(p, ns.degree, cmd, ns.solver_timeout, ns.opt) for p in files]
    cols = ["name", "result", "shape", "rounds", "seconds"]
    if ns.format == "json":
        text = dumps({"schema": "lexpmsm.bench/1", "rows": rows})
    elif ns.format == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([r.get(c, "") for c in cols])
        text = buf.getvalue()
    else:
        lines = ["| benchmark | result | shape | rounds | time (s) |", "|---|---|---|---|---|"]
        for r in rows:
            name = r["name"] + (" (reconstruction)" if r.get("reconstruction") else "")
            lines.append(f"| {name} | {r['result']} | {r['shape']} | {r['rounds']} | {r['seconds']:.3f} |")
        text = "\n".join(lines) + "\n"
    _write(text, ns.output)
    return EXIT_OK if all(r["result"] != "error" for r in rows) else EXIT_UNKNOWN


# -- parser ------------------------------------------------------------------

def _solver_flags(p):
    p.add_argument("--solver-cmd", help="SMT solver command; '{file}' is replaced by the query path "
                                        "(default: $LEXPMSM_SOLVER_CMD, else the builtin LP)")
    p.add_argument("--solver-timeout", type=float, default=60.0, help="seconds per solver call")
    p.add_argument("--solver-supports-opt", action=argparse.BooleanOptionalAction, default=True,
                   help="whether the solver accepts (maximize ...)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lexpmsm", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check a certificate against a system")
    p.add_argument("input")
    p.add_argument("certificate")
    p.add_argument("--mode", choices=["auto", "finite"], default="auto",
                   help="finite: evaluate on the enumerated 'states' of a pCFG document")
    p.add_argument("--pair", type=int, help="Streett pair index for scalar/vector kinds")
    p.add_argument("--epsilon")
    p.add_argument("--M", dest="M")
    p.add_argument("-o", "--output")
    _solver_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synthesize", help="synthesise a LexPMSM map")
    p.add_argument("input")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--coeff-bound")
    p.add_argument("--opt", action=argparse.BooleanOptionalAction, default=True,
                   help="maximise the strict-progress sum (else threshold mode)")
    p.add_argument("--finite", action="store_true", help="synthesise on the enumerated finite chain")
    p.add_argument("--trace", help="write the round-by-round trace as JSON")
    p.add_argument("--emit-smt", help="write the first round's constraint system as SMT-LIB")
    p.add_argument("-o", "--output")
    _solver_flags(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("oracle", help="exact analyses on a finite chain")
    p.add_argument("input")
    p.add_argument("--analysis", default="all",
                   choices=["all", "expected-steps", "ke", "kp", "recurrence", "parity", "sample", "chain"])
    p.add_argument("--pair", type=int)
    p.add_argument("--horizon", type=int, default=64)
    p.add_argument("--iterations", type=int)
    p.add_argument("--state", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("translate", help="convert between certificate kinds")
    p.add_argument("certificates", nargs="+")
    p.add_argument("--to", required=True,
                   choices=["gssm", "lexgssm", "lexpmsm", "reduced_lexpmsm", "reduced-lexpmsm"])
    p.add_argument("--pair", type=int)
    p.add_argument("--epsilon")
    p.add_argument("--d", type=int, help="maximum priority for reduced -> full")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("bench", help="run synthesis over a benchmark corpus")
    p.add_argument("corpus", nargs="?")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--format", choices=["table", "csv", "json"], default="table")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--opt", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("-o", "--output")
    _solver_flags(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return ns.func(ns)
    except (InputError, ModelError, AmbiguousRegion, KeyError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
