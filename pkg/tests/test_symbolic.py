import random
from fractions import Fraction

import pytest

from lexpmsm.io import load_problem, parse_problem
from lexpmsm.model import Guard, PriorityPartition, Region
from lexpmsm.poly import Polynomial, parse_poly
from lexpmsm.symbolic import AmbiguousRegion, expand, monomials, next_value, nonneg_pqes, template
from conftest import BENCH

NAMES = ["ex_3_8", "ex_3_9", "ex_3_9_nat", "ex_4_11", "ex_4_11_faithful"]


def random_values(pcfg, partition, rng):
    """Random polynomial per region key (degree <= 2), as one-component tuples."""
    out = {}
    for key in partition.keys():
        p = Polynomial.const(rng.randint(0, 5))
        for v in pcfg.vars:
            p = p + Polynomial.var(v) * rng.randint(-3, 3)
            if rng.random() < 0.3:
                p = p + Polynomial.var(v) * Polynomial.var(v)
        out[key] = (p,)
    return out


def concrete_next(pcfg, partition, values, loc, point):
    """Expected successor value by direct simulation of one step."""
    total = Fraction(0)
    for w, l2, vals in pcfg.successors(loc, point):
        env = pcfg.env(vals)
        key = partition.region_of(l2, env)
        if key is None:
            continue  # implicit sink, value 0
        total += w * values[key][0].evaluate(env)
    return total


@pytest.mark.parametrize("name", NAMES)
def test_cases_agree_with_concrete_step(name):
    """At random points of a region exactly the cases whose antecedent holds apply,
    and each yields the simulated expectation."""
    prob = load_problem(BENCH / f"{name}.json")
    pcfg, part = prob.pcfg, prob.partition
    cases = expand(pcfg, part)
    rng = random.Random(name)
    for _ in range(5):
        values = random_values(pcfg, part, rng)
        hits = 0
        for _ in range(300):
            point = tuple(Fraction(rng.randint(-12, 40), rng.choice([1, 2, 4])) for _ in pcfg.vars)
            env = pcfg.env(point)
            for key in part.keys():
                if not any(g.holds(env) for g in part.pieces(key)):
                    continue
                hold = [c for c in cases[key] if all(a.holds(env) for a in c.antecedent)]
                assert hold, f"no case covers {key} at {point}"
                want = concrete_next(pcfg, part, values, key[0], point)
                for c in hold:
                    assert next_value(pcfg, c, values).evaluate(env) == want
                hits += 1
        assert hits > 0


def test_nested_loop_case_structure():
    prob = load_problem(BENCH / "ex_3_9_nat.json")
    cases = expand(prob.pcfg, prob.partition)
    l1 = cases[("l1", 3)]
    targets = sorted(tuple(t[1] for t in c.terms) for c in l1)
    assert targets == [(("l0", 2),), (("l1", 3),)]
    l0 = cases[("l0", 2)]
    assert [tuple(t[1] for t in c.terms) for c in l0] == [(("l1", 3),)]


def test_sink_case_emitted_for_escaping_successor():
    doc = {"vars": ["x"], "locations": ["a"], "commands": [
        {"location": "a", "guard": "true", "branches": [{"target": "a", "update": {"x": "x - 1"}}]}],
        "partition": {"d": 2, "regions": [{"location": "a", "priority": 2, "guard": "x >= 0"}]}}
    prob = parse_problem(doc)
    cs = expand(prob.pcfg, prob.partition)[("a", 2)]
    assert sorted(str(c.terms[0][1]) for c in cs) == ["('a', 2)", "None"]


def test_ambiguous_region_detected():
    doc = {"vars": ["x"], "locations": ["a", "b"], "commands": [
        {"location": "a", "guard": "true", "branches": [{"target": "b", "update": {}}]}],
        "partition": {"d": 3, "regions": [
            {"location": "a", "priority": 2, "guard": "true"},
            {"location": "b", "priority": 2, "guard": "x >= 0"},
            {"location": "b", "priority": 3, "guard": "x <= 1"}]}}
    prob = parse_problem(doc)
    with pytest.raises(AmbiguousRegion, match="ambiguous"):
        expand(prob.pcfg, prob.partition)


def test_nonneg_one_per_piece():
    prob = load_problem(BENCH / "ex_3_8.json")
    vals = {k: (Polynomial.var("x"),) for k in prob.partition.keys()}
    qs = nonneg_pqes(prob.pcfg, prob.partition, vals, 0)
    assert len(qs) == sum(len(prob.partition.pieces(k)) for k in prob.partition.keys())


def test_monomials_and_template():
    assert monomials(["y", "x"], 2) == [(), (("x", 1),), (("y", 1),), (("x", 2),), (("x", 1), ("y", 1)), (("y", 2),)]
    poly, names = template("t", ["x"], 1)
    assert names == ["t_0", "t_1"]
    assert poly == parse_poly("t_0 + t_1*x")
