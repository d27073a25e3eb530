"""Group law, dilations, gauge and invariant vector fields of a Carnot group.

Points are always logarithmic coordinates. For a group law the first factor
uses copy-0 variables and the second factor copy-1 variables.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, List, Mapping, Sequence, Tuple

from . import linalg
from .errors import InvalidAlgebra, NonpositiveRadius, NotGenerating, ParseError, SingularFrame
from .exactcore import (
    LAMBDA, Poly, VarId, differentiate, dilation_map, evaluate, is_weighted_homogeneous,
    parse_poly, parse_var, rename_copy, substitute, to_text,
)
from .liecore import AlgebraElement, StratifiedLieAlgebra, validate_algebra
from .report import CheckReport

# Multi-index: sorted tuple of (VarId, order) pairs; () is the identity operator.
MultiIndex = Tuple[Tuple[VarId, int], ...]


def _mi_add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    d = dict(a)
    for v, k in b:
        d[v] = d.get(v, 0) + k
    return tuple(sorted(d.items()))


def _mi_sub_indices(a: MultiIndex):
    """All (gamma, binomial factor) with gamma <= a componentwise."""
    results = [((), 1)]
    for v, k in a:
        nxt = []
        for g, c in results:
            for j in range(k + 1):
                nxt.append((g + (((v, j),) if j else ()), c * comb(k, j)))
        results = nxt
    return results


def _mi_minus(a: MultiIndex, g: MultiIndex) -> MultiIndex:
    d = dict(a)
    for v, k in g:
        d[v] -= k
    return tuple(sorted((v, k) for v, k in d.items() if k))


def _derive(f: Poly, alpha: MultiIndex) -> Poly:
    for v, k in alpha:
        for _ in range(k):
            f = differentiate(f, v)
            if f.is_zero():
                return f
    return f


class DiffOp:
    """Finite-order linear differential operator ``sum_alpha c_alpha d^alpha``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[MultiIndex, Poly] | None = None):
        self.terms: Dict[MultiIndex, Poly] = {a: c for a, c in (terms or {}).items() if not c.is_zero()}

    @classmethod
    def partial(cls, v: VarId) -> "DiffOp":
        return cls({((v, 1),): Poly.const(1)})

    @classmethod
    def multiplication(cls, p: Poly) -> "DiffOp":
        return cls({(): p})

    @property
    def order(self) -> int:
        return max((sum(k for _, k in a) for a in self.terms), default=0)

    def coefficient(self, *vs: VarId) -> Poly:
        key = tuple(sorted(_count(vs).items()))
        return self.terms.get(key, Poly())

    def __call__(self, f: Poly) -> Poly:
        return apply(self, f)

    def __add__(self, other: "DiffOp") -> "DiffOp":
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + c if a in out else c
        return DiffOp(out)

    def __neg__(self) -> "DiffOp":
        return DiffOp({a: -c for a, c in self.terms.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def __mul__(self, p) -> "DiffOp":
        """Left multiplication by a polynomial or scalar coefficient."""
        return DiffOp({a: c * p for a, c in self.terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "DiffOp") -> "DiffOp":
        return compose(self, other)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __str__(self) -> str:
        return op_to_text(self)

    def __repr__(self) -> str:
        return f"DiffOp({op_to_text(self)!r})"


def _count(vs):
    d: Dict[VarId, int] = {}
    for v in vs:
        d[v] = d.get(v, 0) + 1
    return d


def apply(op: DiffOp, f: Poly) -> Poly:
    out = Poly()
    for alpha, c in op.terms.items():
        d = _derive(f, alpha)
        if not d.is_zero():
            out = out + c * d
    return out


def compose(a: DiffOp, b: DiffOp) -> DiffOp:
    """``a o b`` by the general Leibniz rule on the coefficients of ``b``."""
    out: Dict[MultiIndex, Poly] = {}
    for alpha, ca in a.terms.items():
        for gamma, binom in _mi_sub_indices(alpha):
            rest = _mi_minus(alpha, gamma)
            for beta, cb in b.terms.items():
                d = _derive(cb, gamma)
                if d.is_zero():
                    continue
                key = _mi_add(rest, beta)
                term = ca * d * binom
                out[key] = out[key] + term if key in out else term
    return DiffOp(out)


def commutator(a: DiffOp, b: DiffOp) -> DiffOp:
    return compose(a, b) - compose(b, a)


def _mi_text(alpha: MultiIndex) -> str:
    names = []
    for v, k in alpha:
        names.extend([v.name()] * k)
    return f"d[{','.join(names)}]"


def op_to_text(op: DiffOp) -> str:
    """Signed sum ``coef * d[v1,v2,...]`` in canonical order."""
    if op.is_zero():
        return "0"

    def key(alpha):
        return (sum(k for _, k in alpha), [(v.copy, v.layer, v.index, -k) for v, k in alpha])

    parts = []
    for i, alpha in enumerate(sorted(op.terms, key=key)):
        c = op.terms[alpha]
        neg = False
        if len(c.terms) == 1:
            ((_, x),) = c.terms.items()
            if x < 0:
                neg, c = True, -c
        if c == 1:
            body = _mi_text(alpha)
        elif len(c.terms) == 1:
            body = f"{to_text(c)} * {_mi_text(alpha)}"
        else:
            body = f"({to_text(c)}) * {_mi_text(alpha)}"
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


_OP_TERM = re.compile(r"\s*(?:(?P<coef>\(.*?\)|[^()\s]+)\s*\*\s*)?d\[(?P<vars>[^\]]*)\]\s*")


def parse_op(text: str) -> DiffOp:
    s = text.strip()
    if s == "0":
        return DiffOp()
    pieces, depth, cur, sign = [], 0, "", "+"
    i = 0
    if s.startswith("-"):
        sign, i = "-", 1
    while i < len(s):
        ch = s[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and s.startswith((" + ", " - "), i):
            pieces.append((sign, cur))
            sign, cur = s[i + 1], ""
            i += 3
            continue
        cur += ch
        i += 1
    pieces.append((sign, cur))
    out: Dict[MultiIndex, Poly] = {}
    for sign, body in pieces:
        m = _OP_TERM.fullmatch(body)
        if m is None:
            raise ParseError(f"bad operator term {body!r}")
        coef = m.group("coef")
        c = parse_poly(coef.strip("()")) if coef else Poly.const(1)
        if sign == "-":
            c = -c
        names = [n for n in m.group("vars").split(",") if n.strip()]
        alpha = tuple(sorted(_count(parse_var(n) for n in names).items()))
        out[alpha] = out[alpha] + c if alpha in out else c
    return DiffOp(out)


# group law -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupLaw:
    algebra: StratifiedLieAlgebra
    law: Tuple[Tuple[VarId, Poly], ...]

    @property
    def components(self) -> Dict[VarId, Poly]:
        return dict(self.law)

    @property
    def variables(self) -> List[VarId]:
        return self.algebra.variables()

    @property
    def horizontal(self) -> List[VarId]:
        return self.algebra.layer(1)

    def multiply(self, first: Mapping[VarId, Poly], second: Mapping[VarId, Poly]) -> Dict[VarId, Poly]:
        """Compose the law with arbitrary polynomial points (keys are copy-0 ids)."""
        m = {}
        for v in self.variables:
            m[v] = first.get(v, Poly())
            m[v.with_copy(1)] = second.get(v, Poly())
        return {v: substitute(p, m) for v, p in self.law}

    def lines(self) -> List[str]:
        return [f"{v.name()} = {to_text(p)}" for v, p in self.law]


def coordinates(alg: StratifiedLieAlgebra, copy: int = 0) -> Dict[VarId, Poly]:
    return {v: Poly.var(v.with_copy(copy)) for v in alg.basis()}


def formal_element(alg: StratifiedLieAlgebra, copy: int = 0) -> AlgebraElement:
    return AlgebraElement({v: Poly.var(v.with_copy(copy)) for v in alg.basis()})


@lru_cache(maxsize=None)
def derive_group_law(alg: StratifiedLieAlgebra) -> GroupLaw:
    report = validate_algebra(alg)
    if not report.passed:
        bad = report.failures()[0]
        raise InvalidAlgebra(f"{bad.name} fails: {bad.witness}")
    prod = alg.bch(formal_element(alg, 0), formal_element(alg, 1))
    return GroupLaw(alg, tuple((v, prod.coeffs.get(v, Poly())) for v in alg.basis()))


def dilate_point(alg: StratifiedLieAlgebra, point: Mapping[VarId, Poly], lam: Poly) -> Dict[VarId, Poly]:
    return {v: p * lam ** v.layer for v, p in point.items()}


def dilation(alg: StratifiedLieAlgebra, lam: VarId = LAMBDA) -> Dict[VarId, Poly]:
    """The substitution realizing ``f -> f o delta_lam`` with ``lam`` formal."""
    return dilation_map(alg.variables(), lam)


@lru_cache(maxsize=None)
def _fields(g: GroupLaw, side: str) -> Tuple[DiffOp, ...]:
    alg = g.algebra
    zero_first = {v: Poly() for v in alg.variables(0)}
    zero_second = {v: Poly() for v in alg.variables(1)}
    out = []
    for e in alg.basis():
        terms = {}
        for v, comp in g.law:
            if side == "left":
                c = substitute(differentiate(comp, e.with_copy(1)), zero_second, partial=True)
            elif side == "right":
                c = substitute(differentiate(comp, e), zero_first, partial=True)
                c = rename_copy(c, 1, 0)
            else:
                raise ValueError(f"side must be 'left' or 'right', got {side!r}")
            if not c.is_zero():
                terms[((v, 1),)] = c
        out.append(DiffOp(terms))
    return tuple(out)


def invariant_fields(g: GroupLaw, side: str = "left") -> List[DiffOp]:
    """One order-1 field per basis vector, in basis order (layer 1 first)."""
    return list(_fields(g, side))


def horizontal_fields(g: GroupLaw, side: str = "left") -> List[DiffOp]:
    return invariant_fields(g, side)[: g.algebra.layer_dims[0]]


def generator_field(g: GroupLaw) -> DiffOp:
    return DiffOp({((v, 1),): Poly.var(v) * v.layer for v in g.variables})


@dataclass(frozen=True)
class ZDecomposition:
    q: Dict[VarId, Poly]
    frame: Tuple[DiffOp, ...]

    def operator(self) -> DiffOp:
        total = DiffOp()
        for (v, qv), X in zip(sorted(self.q.items()), self.frame):
            total = total + X * qv
        return total


def z_decompose(g: GroupLaw) -> ZDecomposition:
    """Solve ``Z = sum_v Q_v X_v`` by back-substitution in increasing layer.

    In the left frame ``X_v = d_v + (terms d_w with layer(w) > layer(v))``, so
    the coefficient of ``d_w`` gives
    ``Q_w = layer(w) z_w - sum_{layer(v) < layer(w)} Q_v [X_v]_w``.
    """
    basis = g.algebra.basis()
    frame = invariant_fields(g, "left")
    for v, X in zip(basis, frame):
        if X.coefficient(v) != 1:
            raise SingularFrame(f"left field for {v.name()} has diagonal {X.coefficient(v)}")
        for alpha in X.terms:
            ((w, _),) = alpha
            if w != v and w.layer <= v.layer:
                raise SingularFrame(f"left field for {v.name()} has a d[{w.name()}] term")
    q: Dict[VarId, Poly] = {}
    for w in basis:
        val = Poly.var(w) * w.layer
        for v, X in zip(basis, frame):
            if v.layer < w.layer:
                val = val - q[v] * X.coefficient(w)
        q[w] = val
    z = ZDecomposition(q, tuple(frame))
    if not (z.operator() - generator_field(g)).is_zero():
        raise SingularFrame("nonzero residual in the generator decomposition")
    return z


def check_z_decomposition(g: GroupLaw, z: ZDecomposition):
    """(name, passed, witness) triples for the decomposition properties."""
    out = []
    resid = z.operator() - generator_field(g)
    out.append(("zero_residual", resid.is_zero(), None if resid.is_zero() else op_to_text(resid)))
    bad = [v for v in g.horizontal if z.q[v] != Poly.var(v)]
    out.append(("layer1_is_z", not bad, f"Q for {bad[0].name()} = {z.q[bad[0]]}" if bad else None))
    bad = [v for v, p in z.q.items() if not is_weighted_homogeneous(p, v.layer)]
    out.append(("homogeneous", not bad, f"Q for {bad[0].name()} = {z.q[bad[0]]}" if bad else None))
    return out


def vector_at_identity(X: DiffOp, basis: Sequence[VarId]) -> List[Fraction]:
    origin = {v: Fraction(0) for v in basis}
    return [evaluate(X.coefficient(v), origin) for v in basis]


def bracket_generating_step(fields: Sequence[DiffOp], g: GroupLaw) -> int:
    """Smallest depth s at which iterated commutators span the tangent space at e."""
    basis = g.variables
    n = len(basis)
    k = g.algebra.step
    rows = [vector_at_identity(X, basis) for X in fields]
    level = list(fields)
    for s in range(1, max(k, 1) + 1):
        if linalg.rank(rows) == n:
            return s
        nxt = []
        for X in fields:
            for Y in level:
                C = commutator(X, Y)
                if not C.is_zero():
                    nxt.append(C)
                    rows.append(vector_at_identity(C, basis))
        level = nxt
    raise NotGenerating(f"commutators up to depth {k} do not span dimension {n}")


# gauge ---------------------------------------------------------------------


@dataclass(frozen=True)
class GaugeValue:
    point: Dict[VarId, Fraction]
    layer_magnitudes: Tuple[Fraction, ...]


def gauge_value(point: Mapping[VarId, Fraction]) -> GaugeValue:
    """Per layer, the largest |coordinate| (rho = max over layers of that^(1/j))."""
    layers: Dict[int, Fraction] = {}
    for v, x in point.items():
        layers[v.layer] = max(layers.get(v.layer, Fraction(0)), abs(Fraction(x)))
    top = max(layers, default=0)
    return GaugeValue(dict(point), tuple(layers.get(j, Fraction(0)) for j in range(1, top + 1)))


def gauge_inside(point: Mapping[VarId, Fraction], r: Fraction) -> bool:
    """Exact test of rho(p) < r for the max-gauge via |s_{j,l}| < r**j."""
    r = Fraction(r)
    if r <= 0:
        raise NonpositiveRadius(f"radius must be positive, got {r}")
    return all(abs(Fraction(x)) < r ** v.layer for v, x in point.items())


def check_group_law(g: GroupLaw, associativity: bool = True) -> CheckReport:
    """Identity, inverse, associativity and dilation equivariance as formal identities."""
    alg = g.algebra
    p, q, r = coordinates(alg, 0), coordinates(alg, 1), coordinates(alg, 2)
    zero = {v: Poly() for v in alg.basis()}
    report = CheckReport()

    def compare(name, lhs, rhs):
        bad = next((v for v in alg.basis() if lhs[v] != rhs[v]), None)
        report.add(name, bad is None,
                   None if bad is None else f"{bad.name()}: {to_text(lhs[bad] - rhs[bad])}")

    compare("right_identity", g.multiply(p, zero), p)
    compare("left_identity", g.multiply(zero, p), p)
    compare("inverse", g.multiply(p, {v: -c for v, c in p.items()}), zero)
    if associativity:
        compare("associativity", g.multiply(g.multiply(p, q), r), g.multiply(p, g.multiply(q, r)))
    lam = Poly.var(LAMBDA)
    compare("dilation_equivariance",
            g.multiply(dilate_point(alg, p, lam), dilate_point(alg, q, lam)),
            dilate_point(alg, g.multiply(p, q), lam))
    return report
