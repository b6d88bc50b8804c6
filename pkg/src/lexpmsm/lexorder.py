"""Probabilistic lexicographic orders on vectors over [0, inf].

u > v at level l when u_i >= v_i for all i < l and u_l >= 1 + v_l. The
non-strict order is the union of that relation with componentwise >=.
Infinity may appear on either side; by convention inf >= 1 + inf is false,
so no strict decrease is ever witnessed against an infinite entry.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence

INF = math.inf

Vec = Sequence  # entries: Fraction | int | INF
Nested = Sequence  # of Vec
Level = tuple  # (j, k), both 1-based


def _check(u: Vec, v: Vec):
    if len(u) != len(v):
        raise ValueError(f"length mismatch: {len(u)} vs {len(v)}")


def _ge(a, b) -> bool:
    return a >= b


def _strict(a, b) -> bool:
    if b == INF:
        return False
    return a >= 1 + b


def lex_gt(u: Vec, v: Vec) -> Optional[int]:
    """Smallest 1-based level witnessing u > v, or None."""
    _check(u, v)
    for l, (a, b) in enumerate(zip(u, v), start=1):
        if _strict(a, b):
            return l
        if not _ge(a, b):
            return None
    return None


def geq_componentwise(u: Vec, v: Vec) -> bool:
    _check(u, v)
    return all(_ge(a, b) for a, b in zip(u, v))


def lex_geq(u: Vec, v: Vec) -> bool:
    return geq_componentwise(u, v) or lex_gt(u, v) is not None


def _trunc(u: Vec, v: Vec, i: int):
    _check(u, v)
    if not (1 <= i <= len(u)):
        raise ValueError(f"truncation index {i} outside 1..{len(u)}")
    return u[:i], v[:i]


def lex_gt_trunc(u: Vec, v: Vec, i: int) -> Optional[int]:
    a, b = _trunc(u, v, i)
    return lex_gt(a, b)


def lex_geq_trunc(u: Vec, v: Vec, i: int) -> bool:
    a, b = _trunc(u, v, i)
    return lex_geq(a, b)


def shape_of(nv: Nested) -> tuple:
    return tuple(len(b) for b in nv)


def flatten(nv: Nested) -> tuple:
    if not nv:
        raise ValueError("a nested vector needs at least one block")
    out = []
    for b in nv:
        if len(b) == 0:
            raise ValueError("empty block")
        out.extend(b)
    return tuple(out)


def unflatten(flat: Vec, shape: Sequence[int]) -> tuple:
    if sum(shape) != len(flat):
        raise ValueError("shape does not match vector length")
    out, pos = [], 0
    for m in shape:
        out.append(tuple(flat[pos:pos + m]))
        pos += m
    return tuple(out)


def level_to_flat(shape: Sequence[int], level: Level) -> int:
    j, k = level
    if not (1 <= j <= len(shape)) or not (1 <= k <= shape[j - 1]):
        raise ValueError(f"level {level} outside shape {tuple(shape)}")
    return sum(shape[: j - 1]) + k


def flat_to_level(shape: Sequence[int], l: int) -> Level:
    if l < 1:
        raise ValueError("flat levels start at 1")
    for j, m in enumerate(shape, start=1):
        if l <= m:
            return (j, l)
        l -= m
    raise ValueError("flat level beyond the shape")


def _same_shape(nu: Nested, nv: Nested):
    if shape_of(nu) != shape_of(nv):
        raise ValueError(f"shape mismatch: {shape_of(nu)} vs {shape_of(nv)}")


def nested_gt(nu: Nested, nv: Nested) -> Optional[Level]:
    _same_shape(nu, nv)
    l = lex_gt(flatten(nu), flatten(nv))
    return None if l is None else flat_to_level(shape_of(nu), l)


def nested_geq(nu: Nested, nv: Nested) -> bool:
    _same_shape(nu, nv)
    return lex_geq(flatten(nu), flatten(nv))


def _nested_trunc(nu: Nested, nv: Nested, j: int):
    _same_shape(nu, nv)
    if not (1 <= j <= len(nu)):
        raise ValueError(f"block index {j} outside 1..{len(nu)}")
    return nu[:j], nv[:j]


def nested_gt_trunc(nu: Nested, nv: Nested, j: int) -> Optional[Level]:
    a, b = _nested_trunc(nu, nv, j)
    return nested_gt(a, b)


def nested_geq_trunc(nu: Nested, nv: Nested, j: int) -> bool:
    a, b = _nested_trunc(nu, nv, j)
    return nested_geq(a, b)


def gt_at_level(u: Vec, v: Vec, l: int) -> bool:
    """u > v witnessed exactly at flat level l."""
    _check(u, v)
    return all(_ge(u[i], v[i]) for i in range(l - 1)) and _strict(u[l - 1], v[l - 1])


def as_ext(x):
    """Normalise an entry: Fraction, or INF for infinity markers."""
    if x == INF or (isinstance(x, str) and x.strip().lower() in ("inf", "oo", "infinity")):
        return INF
    return Fraction(x)
