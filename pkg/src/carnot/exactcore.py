"""Exact rational polynomials over the graded coordinates of a Carnot group.

Coefficients are :class:`fractions.Fraction`; nothing in here ever touches a
float. A polynomial is an immutable sparse map ``Monomial -> Fraction`` with no
zero coefficients, so structural equality is mathematical equality.

Variables are :class:`VarId` triples ``(layer, index, copy)``. ``copy`` tells
apart the independent coordinate sets needed for formal group-law identities
(``p``, ``p'``, ``p''``). Layer 0 is reserved for the formal dilation
parameter ``lam``, which has weight 0.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, Iterable, Mapping, NamedTuple, Tuple, Union

from .errors import MissingComponent, MissingCoordinate, ParseError

Scalar = Union[int, Fraction]


class VarId(NamedTuple):
    layer: int
    index: int
    copy: int = 0

    @property
    def weight(self) -> int:
        return self.layer

    def name(self) -> str:
        if self.layer == 0:
            base = "lam"
        elif self.layer == 1:
            base = f"z{self.index}"
        else:
            base = f"s{self.layer}_{self.index}"
        return base + "'" * self.copy

    def with_copy(self, copy: int) -> "VarId":
        return VarId(self.layer, self.index, copy)

    def __repr__(self) -> str:
        return self.name()


LAMBDA = VarId(0, 1)

_VAR_RE = re.compile(r"(lam|z(\d+)|s(\d+)_(\d+))('*)")


def parse_var(text: str) -> VarId:
    m = _VAR_RE.fullmatch(text.strip())
    if m is None:
        raise ParseError(f"bad variable name {text!r}")
    name, z, j, l, primes = m.groups()
    copy = len(primes)
    if name == "lam":
        return VarId(0, 1, copy)
    if z is not None:
        return VarId(1, int(z), copy)
    if int(j) < 2:
        raise ParseError(f"layer-1 variables are written z<i>, got {text!r}")
    return VarId(int(j), int(l), copy)


# A monomial is a tuple of (VarId, exponent) pairs sorted by VarId, exponents > 0.
Monomial = Tuple[Tuple[VarId, int], ...]

ONE: Monomial = ()


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def euclidean_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def weighted_degree(m: Monomial) -> int:
    return sum(v.layer * e for v, e in m)


def mono_key(m: Monomial):
    """Graded-lex key: weighted degree, then the expanded variable sequence."""
    seq = []
    for v, e in m:
        seq.extend([(v.copy, v.layer, v.index)] * e)
    return (weighted_degree(m), euclidean_degree(m), tuple(seq))


def _as_fraction(c: Scalar) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"exact coefficient expected, got {type(c).__name__}")


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean: Dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = _as_fraction(c)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction]) -> "Poly":
        # caller guarantees no zero coefficients
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c: Scalar) -> "Poly":
        return cls({ONE: c})

    @classmethod
    def var(cls, v: VarId) -> "Poly":
        return cls._raw({((v, 1),): Fraction(1)})

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def items(self):
        """Terms in canonical order."""
        return sorted(self._terms.items(), key=lambda t: mono_key(t[0]))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get(ONE, Fraction(0))

    def variables(self) -> set:
        return {v for m in self._terms for v, _ in m}

    def euclidean_degree(self) -> int:
        return max((euclidean_degree(m) for m in self._terms), default=-1)

    def weighted_degree(self) -> int:
        return max((weighted_degree(m) for m in self._terms), default=-1)

    def min_euclidean_degree(self) -> int:
        return min((euclidean_degree(m) for m in self._terms), default=-1)

    # arithmetic -----------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = Poly._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = Poly._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Poly()
            return Poly._raw({m: c * other for m, c in self._terms.items()})
        other = Poly._coerce(other)
        if other is NotImplemented:
            return other
        out: Dict[Monomial, Fraction] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = mono_mul(ma, mb)
                out[m] = out.get(m, 0) + ca * cb
        return Poly._raw({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"Poly({to_text(self)!r})"


PolyMap = Mapping[VarId, Poly]


def poly_arithmetic(a: Poly, b: Poly, kind: str) -> Poly:
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def differentiate(p: Poly, v: VarId) -> Poly:
    out: Dict[Monomial, Fraction] = {}
    for m, c in p.terms.items():
        for i, (w, e) in enumerate(m):
            if w == v:
                rest = m[:i] + (((w, e - 1),) if e > 1 else ()) + m[i + 1:]
                out[rest] = out.get(rest, 0) + c * e
                break
    return Poly._raw({m: c for m, c in out.items() if c})


def substitute(p: Poly, m: PolyMap, partial: bool = False) -> Poly:
    """Compose ``p`` with the map ``m``.

    With ``partial=True`` variables missing from ``m`` are left untouched;
    otherwise they raise :class:`MissingComponent`.
    """
    powers: Dict[Tuple[VarId, int], Poly] = {}

    def power(v: VarId, e: int) -> Poly:
        key = (v, e)
        if key not in powers:
            powers[key] = m[v] ** e
        return powers[key]

    result: Dict[Monomial, Fraction] = {}
    for mono, c in p.terms.items():
        term = Poly.const(c)
        for v, e in mono:
            if v in m:
                term = term * power(v, e)
            elif partial:
                term = term * Poly._raw({((v, e),): Fraction(1)})
            else:
                raise MissingComponent(f"no image for variable {v.name()}")
        for mm, cc in term.terms.items():
            result[mm] = result.get(mm, 0) + cc
    return Poly._raw({mm: cc for mm, cc in result.items() if cc})


def evaluate(p: Poly, point: Mapping[VarId, Scalar]) -> Fraction:
    total = Fraction(0)
    for mono, c in p.terms.items():
        term = c
        for v, e in mono:
            try:
                term *= Fraction(point[v]) ** e
            except KeyError:
                raise MissingCoordinate(f"point has no coordinate {v.name()}") from None
        total += term
    return total


def graded_components(p: Poly, grading: str = "weighted") -> Dict[int, Poly]:
    if grading == "weighted":
        deg = weighted_degree
    elif grading == "euclidean":
        deg = euclidean_degree
    else:
        raise ValueError(f"unknown grading {grading!r}")
    buckets: Dict[int, Dict[Monomial, Fraction]] = {}
    for m, c in p.terms.items():
        buckets.setdefault(deg(m), {})[m] = c
    return {d: Poly._raw(buckets[d]) for d in sorted(buckets)}


def is_weighted_homogeneous(p: Poly, degree: int) -> bool:
    return all(weighted_degree(m) == degree for m in p.terms)


def dilation_map(variables: Iterable[VarId], lam: VarId = LAMBDA) -> Dict[VarId, Poly]:
    """The substitution ``v -> lam**weight(v) * v``."""
    L = Poly.var(lam)
    return {v: (L ** v.layer) * Poly.var(v) for v in variables}


def rename_copy(p: Poly, src: int, dst: int) -> Poly:
    out = {}
    for m, c in p.terms.items():
        out[tuple(sorted(((v.with_copy(dst) if v.copy == src else v), e) for v, e in m))] = c
    return Poly._raw(out)


def monomials_of_weighted_degree(variables: Iterable[VarId], degree: int) -> list:
    """All monomials in ``variables`` of exact weighted degree, canonical order."""
    vs = sorted(variables)
    out = []

    def rec(i: int, remaining: int, acc: list):
        if remaining == 0:
            out.append(tuple(acc))
            return
        if i == len(vs):
            return
        v = vs[i]
        for e in range(remaining // v.layer, -1, -1):
            if e:
                acc.append((v, e))
            rec(i + 1, remaining - e * v.layer, acc)
            if e:
                acc.pop()

    if degree == 0:
        return [ONE]
    rec(0, degree, [])
    return sorted(out, key=mono_key)


# text form ---------------------------------------------------------------


def _coef_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def mono_text(m: Monomial) -> str:
    return "*".join(v.name() if e == 1 else f"{v.name()}^{e}" for v, e in m)


def to_text(p: Poly) -> str:
    """Canonical text, e.g. ``1 - 3*z1^2 - 21*s2_1^2``."""
    if p.is_zero():
        return "0"
    parts = []
    for i, (m, c) in enumerate(p.items()):
        neg = c < 0
        a = -c if neg else c
        if not m:
            body = _coef_text(a)
        elif a == 1:
            body = mono_text(m)
        else:
            body = f"{_coef_text(a)}*{mono_text(m)}"
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


_TERM_SPLIT = re.compile(r"\s*([+-])\s*")


def parse_poly(text: str) -> Poly:
    """Inverse of :func:`to_text` (also tolerant of extra whitespace)."""
    s = text.strip()
    if not s:
        raise ParseError("empty polynomial")
    if s[0] not in "+-":
        s = "+" + s
    pieces = _TERM_SPLIT.split(s)
    # split yields ['', sign, term, sign, term, ...]
    if pieces[0].strip():
        raise ParseError(f"cannot parse polynomial {text!r}")
    out: Dict[Monomial, Fraction] = {}
    for sign, term in zip(pieces[1::2], pieces[2::2]):
        if not term:
            raise ParseError(f"dangling sign in {text!r}")
        coef = Fraction(1)
        mono: Dict[VarId, int] = {}
        for factor in term.split("*"):
            factor = factor.strip()
            if re.fullmatch(r"\d+(/\d+)?", factor):
                coef *= Fraction(factor)
                continue
            base, _, exp = factor.partition("^")
            v = parse_var(base)
            try:
                e = int(exp) if exp else 1
            except ValueError:
                raise ParseError(f"bad exponent in {factor!r}") from None
            mono[v] = mono.get(v, 0) + e
        if sign == "-":
            coef = -coef
        key = tuple(sorted(mono.items()))
        out[key] = out.get(key, 0) + coef
    return Poly(out)


# deterministic generator --------------------------------------------------

_MASK64 = (1 << 64) - 1


class XorShift64Star:
    """xorshift64* generator (Vigna 2016); state is owned by the caller.

    state <- state ^ (state >> 12); state ^= state << 25; state ^= state >> 27;
    output = state * 0x2545F4914F6CDD1D mod 2^64. A zero seed is mapped to a
    fixed nonzero constant.
    """

    def __init__(self, seed: int):
        self.state = (seed * 0x9E3779B97F4A7C15 + 0x632BE59BD9B4E019) & _MASK64 or 0x1

    def next(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def below(self, n: int) -> int:
        return (self.next() >> 11) % n

    def between(self, lo: int, hi: int) -> int:
        return lo + self.below(hi - lo + 1)


def random_poly(seed: int, group, max_weighted_degree: int, max_terms: int = 8) -> Poly:
    """Sparse random polynomial with nonzero integer coefficients in [-9, 9].

    Draws between 3 and ``max_terms`` monomials (with replacement, a repeat
    overwrites) uniformly from all monomials of weighted degree <=
    ``max_weighted_degree``. ``group`` is a
    :class:`~carnot.liecore.StratifiedLieAlgebra` or an iterable of variables.
    """
    if max_weighted_degree < 0:
        raise ValueError("max_weighted_degree must be >= 0")
    variables = group.variables() if hasattr(group, "variables") else list(group)
    rng = XorShift64Star(seed)
    pool = [m for d in range(max_weighted_degree + 1)
            for m in monomials_of_weighted_degree(variables, d)]
    lo = min(3, max_terms)
    out: Dict[Monomial, Fraction] = {}
    for _ in range(lo + rng.below(max_terms - lo + 1)):
        m = pool[rng.below(len(pool))]
        c = rng.between(1, 9)
        out[m] = c if rng.below(2) else -c
    return Poly(out)
