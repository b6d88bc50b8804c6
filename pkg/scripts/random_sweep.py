"""Sweep random finite chains: finite synthesis against the exact parity oracle.

Prints one row per size bucket: chains, synthesis successes, parity-true
chains, and disagreements (must be zero in both directions).
"""

import argparse
import random
import sys
import time
from collections import Counter
from fractions import Fraction

from lexpmsm import oracle as O
from lexpmsm.certificates import LexPmsMap, check_lexpmsm_map
from lexpmsm.model import FiniteChain
from lexpmsm.synthesis import synthesize_finite


def random_chain(rng, n, d_max):
    rows = []
    for _ in range(n):
        k = rng.randint(1, min(3, n))
        succ = rng.sample(range(n), k)
        w = [rng.randint(1, 4) for _ in succ]
        tot = sum(w)
        rows.append(tuple((t, Fraction(x, tot)) for t, x in zip(succ, w)))
    pri = [rng.randint(1, d_max) for _ in range(n)]
    return FiniteChain(tuple(rows), tuple(pri))


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=200, help="chains per size")
    ap.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 6, 8])
    ap.add_argument("--d-max", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ns = ap.parse_args(argv)
    rng = random.Random(ns.seed)
    print(f"{'states':>6} {'chains':>6} {'found':>6} {'parity':>6} {'mismatch':>8} {'secs':>6}")
    bad = 0
    for n in ns.sizes:
        c = Counter()
        t0 = time.perf_counter()
        for _ in range(ns.count):
            ch = random_chain(rng, n, ns.d_max)
            res, _ = synthesize_finite(ch)
            found = isinstance(res, LexPmsMap) and check_lexpmsm_map(ch, res).accepted
            par = all(O.almost_sure_parity(ch))
            c["found"] += found
            c["parity"] += par
            c["mismatch"] += found != par
        bad += c["mismatch"]
        print(f"{n:>6} {ns.count:>6} {c['found']:>6} {c['parity']:>6} {c['mismatch']:>8} "
              f"{time.perf_counter() - t0:>6.1f}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(run())
