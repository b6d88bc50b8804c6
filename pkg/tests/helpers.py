"""Candidate certificates on finite chains, used by the soundness suites."""

import random
from fractions import Fraction

from lexpmsm import certificates as C
from lexpmsm import oracle as O
from lexpmsm.model import streett_pair_to_parity

STREETT_KINDS = ("ssm", "gssm", "lexgssm", "dvssm")


def pair_sets(chain, q):
    A = {s for s in chain.states() if chain.priority[s] == 2 * q - 1}
    B = {s for s in chain.states() if chain.priority[s] <= 2 * q - 2}
    return A, B


def streett_holds(chain, q):
    A, B = pair_sets(chain, q)
    return all(O.almost_sure_parity(chain.with_priority(streett_pair_to_parity(A, B, chain.n_states))))


def parity_holds(chain):
    return all(O.almost_sure_parity(chain))


def _ints(rng, n, hi=4):
    return tuple(Fraction(rng.randint(0, hi)) for _ in range(n))


def _nested(rng, shape, hi=3):
    return tuple(_ints(rng, m, hi) for m in shape)


def candidates(chain, rng: random.Random):
    """Yield (kind, cert, kwargs); a mix of canonical and random guesses."""
    states = list(chain.states())
    d = C.default_pair(chain) * 2
    q = C.default_pair(chain)
    A, B = pair_sets(chain, q)
    exp = O.expected_steps_exact(chain, A, B)
    if not any(exp.divergent):
        yield "gssm", C.ScalarCert(dict(enumerate(exp.values))), {}
        yield "ssm", C.ScalarCert(dict(enumerate(exp.values))), {"epsilon": 1, "M": max(exp.values) + 1}
    for _ in range(3):
        yield "gssm", C.ScalarCert({s: Fraction(rng.randint(0, 5)) for s in states}), {}
        yield "ssm", C.ScalarCert({s: Fraction(rng.randint(0, 5)) for s in states}), \
            {"epsilon": Fraction(rng.randint(1, 2)), "M": Fraction(rng.randint(1, 3))}
        yield "lexgssm", C.VecCert({s: _ints(rng, 2, 3) for s in states}), {}
        yield "pmsm", C.VecCert({s: _ints(rng, d, 2) for s in states}), {}
        shape = tuple(rng.randint(1, 2) for _ in range(d))
        yield "lexpmsm", C.NestedCert(shape, {s: _nested(rng, shape, 2) for s in states}), {}
        rshape = tuple(rng.randint(1, 2) for _ in range(d // 2))
        yield "reduced_lexpmsm", C.NestedCert(rshape, {s: _nested(rng, rshape, 2) for s in states}, reduced=True), {}
        lev = {}
        for s in states:
            p = chain.priority[s]
            opts = [(j, k) for j in range(1, (p + 1) // 2 + 1) for k in range(1, rshape[j - 1] + 1)]
            if p % 2 == 0:
                opts.append(C.STAR)
            lev[s] = rng.choice(opts)
        yield "lexpmsm_map", C.LexPmsMap(rshape, lev, {s: _nested(rng, rshape, 2) for s in states}), {}
        K = rng.randint(1, 4)
        dist = {}
        for s in states:
            w = [rng.randint(0, 3) for _ in range(K)]
            w[-1] += 1
            tot = sum(w)
            dist[s] = tuple(Fraction(x, tot) for x in w)
        yield "dvssm", C.DvssmCert(dist), {}
    kp = O.kp_iterate(chain, A, B, horizon=12)
    if all(kp.at(s).get("tail", 0) == 0 for s in states):
        yield "dvssm", C.DvssmCert({s: dense(kp.at(s)) for s in states}), {}


def dense(masses):
    K = max(k for k in masses if k != "tail") + 1
    return tuple(Fraction(masses.get(k, 0)) for k in range(K))


def accepted_and_sound(chain, kind, cert, kw):
    """(accepted, sound): sound is the almost-sure conclusion the certificate would imply."""
    v = C.check(kind, chain, cert, **kw)
    if not v.accepted:
        return False, True
    if kind in STREETT_KINDS:
        return True, streett_holds(chain, C.default_pair(chain))
    return True, parity_holds(chain)
