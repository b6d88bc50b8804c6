"""Sparse multivariate polynomials with exact rational coefficients.

Monomials are keyed by variable name rather than by position, so the same
class serves program polynomials, template polynomials (program variables
times unknown coefficients) and parameter-only constraint polynomials.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from typing import Iterable, Mapping, Union

Monomial = tuple  # tuple[tuple[str, int], ...], sorted by name, exponents > 0
Number = Union[int, Fraction]

ONE: Monomial = ()


def as_fraction(value) -> Fraction:
    """Exact conversion; strings may be "3", "-1/2" or decimals like "0.25"."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass an exact string or Fraction")
    raise TypeError(f"cannot convert {value!r} to Fraction")


def fraction_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def _mono_degree(m: Monomial, among=None) -> int:
    if among is None:
        return sum(e for _, e in m)
    return sum(e for v, e in m if v in among)


class Polynomial:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = as_fraction(c)
                if c:
                    clean[m] = c
        self.terms: dict = clean
        self._hash = None

    # construction
    @classmethod
    def const(cls, c: Number) -> "Polynomial":
        return cls({ONE: c})

    @classmethod
    def var(cls, name: str) -> "Polynomial":
        return cls({((name, 1),): 1})

    @staticmethod
    def lift(x) -> "Polynomial":
        if isinstance(x, Polynomial):
            return x
        return Polynomial.const(as_fraction(x))

    # arithmetic
    def __add__(self, other):
        other = Polynomial.lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Polynomial.lift(other))

    def __rsub__(self, other):
        return Polynomial.lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = as_fraction(other)
            return Polynomial({m: k * c for m, k in self.terms.items()})
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = as_fraction(other)
        return self * (1 / c)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = Polynomial.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            try:
                other = Polynomial.lift(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # inspection
    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def degree(self, among: Iterable[str] | None = None) -> int:
        among = None if among is None else set(among)
        return max((_mono_degree(m, among) for m in self.terms), default=0)

    def is_constant(self) -> bool:
        return all(m == ONE for m in self.terms)

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get(ONE, Fraction(0))

    def coefficient(self, m: Monomial) -> Fraction:
        return self.terms.get(m, Fraction(0))

    def split(self, among: Iterable[str]) -> dict:
        """Group terms by their monomial in `among`; coefficients are polynomials in the rest."""
        among = set(among)
        groups: dict = {}
        for m, c in self.terms.items():
            inner = tuple((v, e) for v, e in m if v in among)
            outer = tuple((v, e) for v, e in m if v not in among)
            groups.setdefault(inner, {})[outer] = c
        return {k: Polynomial(v) for k, v in groups.items()}

    # evaluation
    def subs(self, mapping: Mapping[str, object]) -> "Polynomial":
        """Simultaneous substitution of polynomials/numbers for variables."""
        if not mapping:
            return self
        lifted = {k: Polynomial.lift(v) for k, v in mapping.items()}
        powers: dict = {}
        out = Polynomial()
        for m, c in self.terms.items():
            term = Polynomial.const(c)
            rest = []
            for v, e in m:
                if v in lifted:
                    key = (v, e)
                    if key not in powers:
                        powers[key] = lifted[v] ** e
                    term = term * powers[key]
                else:
                    rest.append((v, e))
            if rest:
                term = term * Polynomial({tuple(rest): 1})
            out = out + term
        return out

    def evaluate(self, values: Mapping[str, Number]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for v, e in m:
                try:
                    x = values[v]
                except KeyError:
                    raise KeyError(f"no value for variable {v!r}") from None
                t *= as_fraction(x) ** e
            total += t
        return total

    # printing
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (-_mono_degree(m), m)):
            c = self.terms[m]
            sign = "-" if c < 0 else "+"
            a = abs(c)
            factors = []
            for v, e in m:
                factors.append(v if e == 1 else f"{v}^{e}")
            if not factors:
                body = fraction_str(a)
            elif a == 1:
                body = "*".join(factors)
            else:
                body = fraction_str(a) + "*" + "*".join(factors)
            parts.append((sign, body))
        first_sign, first = parts[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"Polynomial({str(self)!r})"


# -- parsing -----------------------------------------------------------------

class PolyParseError(ValueError):
    pass


def parse_poly(text: str, allowed: Iterable[str] | None = None) -> Polynomial:
    """Parse "2*x*y - 1/2*x + 3" style text; `^` and `**` both denote powers."""
    if not isinstance(text, str):
        if isinstance(text, (int, Fraction)):
            return Polynomial.const(text)
        raise PolyParseError(f"expected a polynomial string, got {text!r}")
    allowed = None if allowed is None else set(allowed)
    text = text.strip()
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise PolyParseError(f"bad polynomial {text!r}: {exc.msg}") from None
    return _walk(tree.body, text, allowed)


def _walk(node, text, allowed) -> Polynomial:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise PolyParseError(f"bad literal in {text!r}")
        if isinstance(node.value, float):
            # keep the literal's decimal text exact
            return Polynomial.const(Fraction(ast.get_source_segment(text.replace("^", "**"), node)))
        return Polynomial.const(node.value)
    if isinstance(node, ast.Name):
        if allowed is not None and node.id not in allowed:
            raise PolyParseError(f"unknown variable {node.id!r} in {text!r}")
        return Polynomial.var(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _walk(node.operand, text, allowed)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        left = _walk(node.left, text, allowed)
        if isinstance(node.op, ast.Pow):
            right = _walk(node.right, text, allowed)
            if not right.is_constant() or right.constant_term.denominator != 1 or right.constant_term < 0:
                raise PolyParseError(f"exponent must be a non-negative integer in {text!r}")
            return left ** int(right.constant_term)
        right = _walk(node.right, text, allowed)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if not right.is_constant() or not right.constant_term:
                raise PolyParseError(f"division only by non-zero constants in {text!r}")
            return left / right.constant_term
    raise PolyParseError(f"unsupported syntax in {text!r}")


def linear_form(p: Polynomial, among: Iterable[str]) -> tuple[dict, Polynomial]:
    """Split a polynomial of degree <= 1 in `among` into coefficient map and constant.

    Coefficients are polynomials in the remaining variables.
    """
    among = list(among)
    coeffs = {}
    const = Polynomial()
    for mono, coeff in p.split(among).items():
        if mono == ONE:
            const = coeff
        elif len(mono) == 1 and mono[0][1] == 1:
            coeffs[mono[0][0]] = coeff
        else:
            raise ValueError(f"{p} is not linear in {among}")
    return coeffs, const
