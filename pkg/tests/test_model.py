import itertools
from fractions import Fraction

import pytest

from lexpmsm.io import load_problem, parse_pcfg
from lexpmsm.model import (Atom, Branch, Command, FiniteChain, Guard, ModelError, Pcfg, PriorityPartition, Region,
                           Rel, StreettPair, complement, parity_to_streett, parse_atom, pcfg_to_finite_chain,
                           streett_pair_to_parity, streett_to_priority_partition, validate_partition)
from lexpmsm.poly import Polynomial
from lexpmsm.symbolic import Feasibility


def env(**kw):
    return {k: Fraction(v) for k, v in kw.items()}


def test_atoms_and_guards():
    g = Guard.parse("x >= 1 && y < 2")
    assert g.holds(env(x=1, y=0)) and not g.holds(env(x=1, y=2))
    assert parse_atom("x = 3").holds(env(x=3))
    neg = g.negate()
    for pt in itertools.product(range(-1, 4), repeat=2):
        e = env(x=pt[0], y=pt[1])
        assert g.holds(e) != any(n.holds(e) for n in neg)


def test_complement_covers_exactly():
    gs = [Guard.parse("x >= 1"), Guard.parse("x < -1"), Guard.parse("x == 0")]
    comp = complement(gs)
    for k in range(-12, 12):
        e = env(x=Fraction(k, 4))
        assert any(g.holds(e) for g in gs) != any(c.holds(e) for c in comp)


def test_command_weights_validated():
    x = Polynomial.var("x")
    with pytest.raises(ModelError):
        Command(Guard.true(), (Branch(Fraction(1, 2), "l", (x,)),))
    with pytest.raises(ModelError):
        Pcfg(("tpl_x",), ("l",), {})


def test_implicit_stay():
    p = parse_pcfg({"vars": ["x"], "locations": ["l"],
                    "commands": [{"location": "l", "guard": "x >= 1",
                                  "branches": [{"target": "l", "update": {"x": "x - 1"}}]}]})
    assert p.successors("l", [3]) == [(1, "l", (Fraction(2),))]
    assert p.successors("l", [0]) == [(1, "l", (Fraction(0),))]
    stay = p.stay_guards("l")
    assert len(stay) == 1 and stay[0].holds(env(x=Fraction(1, 2)))


def test_parity_to_streett_finite():
    pri = [1, 2, 3, 4]
    pairs = parity_to_streett(pri)
    assert [(set(p.a), set(p.b)) for p in pairs] == [({0}, set()), ({0, 1, 2}, {0, 1})]
    with pytest.raises(ModelError):
        parity_to_streett([1, 3])


def test_streett_pair_to_parity_finite():
    assert streett_pair_to_parity({0, 1}, {1, 2}, 4) == [3, 2, 2, 4]


def test_streett_pair_to_parity_symbolic(bench):
    prob = load_problem(bench / "ex_3_8.json")
    a = {"l0": (Guard.parse("x >= 1"),)}
    b = {"l0": (Guard.parse("x < 1"),), "l1": (Guard.true(),)}
    inv = {"l0": Guard.parse("x >= 0"), "l1": Guard.parse("x >= 0")}
    part = streett_to_priority_partition(prob.pcfg, [StreettPair(a, b)], inv, Feasibility(["x"]))
    for k in range(-8, 16):
        e = env(x=Fraction(k, 4))
        want = prob.partition.priority_of("l0", e) if k >= 0 else 4
        assert part.priority_of("l0", e) == want
    with pytest.raises(ModelError):
        streett_to_priority_partition(prob.pcfg, [StreettPair(a, b)] * 2)


def test_partition_sink_priority():
    part = PriorityPartition(3, (Region("l", 1, Guard.parse("x >= 0")),))
    assert part.sink_priority == 4 and part.reduced_blocks == 2
    assert part.priority_of("l", env(x=-1)) == 4
    with pytest.raises(ModelError):
        PriorityPartition(2, (Region("l", 3, Guard.true()),))


@pytest.mark.parametrize("mode", ["sample", "solver"])
def test_validate_partition(bench, mode):
    prob = load_problem(bench / "ex_4_11.json")
    assert validate_partition(prob.pcfg, prob.partition, mode=mode).ok
    overl = PriorityPartition(4, prob.partition.regions + (Region("l0", 1, Guard.parse("x >= 5")),))
    rep = validate_partition(prob.pcfg, overl, mode=mode)
    assert not rep.ok and rep.overlaps


def truncated_nested_loop():
    doc = {"vars": ["m", "n"], "locations": ["l0", "l1"], "commands": [
        {"location": "l0", "guard": "true", "branches": [{"target": "l1", "update": {"m": "n"}}]},
        {"location": "l1", "guard": "m > 0", "branches": [{"target": "l1", "update": {"m": "m - 1"}}]},
        {"location": "l1", "guard": "m <= 0 && n <= 2", "branches": [{"target": "l0", "update": {"n": "n + 1"}}]},
    ]}
    pcfg = parse_pcfg(doc)
    part = PriorityPartition(3, (Region("l0", 2, Guard.true()), Region("l1", 3, Guard.true())))
    states = [(l, (m, n)) for l in ("l0", "l1") for m in range(4) for n in range(4)]
    return pcfg, part, states


def test_pcfg_to_finite_chain():
    pcfg, part, states = truncated_nested_loop()
    chain = pcfg_to_finite_chain(pcfg, part, states)
    assert chain.n_states == 32
    idx = {s: i for i, s in enumerate(states)}
    assert chain.rows[idx[("l0", (2, 1))]] == ((idx[("l1", (1, 1))], 1),)
    assert chain.rows[idx[("l1", (0, 3))]] == ((idx[("l1", (0, 3))], 1),)
    assert chain.priority[idx[("l1", (0, 0))]] == 3
    with pytest.raises(ModelError, match="escapes"):
        pcfg_to_finite_chain(pcfg, part, states[:-1])


def test_finite_chain_validation():
    with pytest.raises(ModelError):
        FiniteChain.make([{0: Fraction(1, 2)}])
    with pytest.raises(ModelError):
        FiniteChain.make([{3: 1}])
