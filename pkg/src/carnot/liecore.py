"""Stratified Lie algebras, brackets and the truncated BCH series."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from .errors import GroupFileError, UnknownBuiltin
from .exactcore import Poly, VarId
from .report import CheckReport

MAX_STEP = 6
MAX_DIMENSION = 64

Basis = VarId
BracketTable = Mapping[Tuple[Basis, Basis], Tuple[Tuple[Basis, Fraction], ...]]


class AlgebraElement:
    """An element ``sum_v c_v e_v`` whose coefficients are polynomials."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[Basis, Poly] | None = None):
        self.coeffs: Dict[Basis, Poly] = {v: c for v, c in (coeffs or {}).items() if not c.is_zero()}

    @classmethod
    def basis(cls, v: Basis) -> "AlgebraElement":
        return cls({v: Poly.const(1)})

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        out = dict(self.coeffs)
        for v, c in other.coeffs.items():
            out[v] = out[v] + c if v in out else c
        return AlgebraElement(out)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement({v: -c for v, c in self.coeffs.items()})

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def scale(self, c) -> "AlgebraElement":
        return AlgebraElement({v: p * c for v, p in self.coeffs.items()})

    __mul__ = scale
    __rmul__ = scale

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __repr__(self) -> str:
        inner = ", ".join(f"{v.name()}: {c}" for v, c in sorted(self.coeffs.items()))
        return f"AlgebraElement({{{inner}}})"


@dataclass(frozen=True, eq=False)
class StratifiedLieAlgebra:
    """Layer dimensions plus structure constants for ordered basis pairs.

    ``brackets[(a, b)]`` with ``a < b`` lists ``(c, coefficient)`` so that
    ``[e_a, e_b] = sum coefficient * e_c``. ``[e_b, e_a]`` is implied.
    """

    layer_dims: Tuple[int, ...]
    brackets: Dict[Tuple[Basis, Basis], Tuple[Tuple[Basis, Fraction], ...]] = field(default_factory=dict)
    name: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "layer_dims", tuple(self.layer_dims))
        clean = {}
        for (a, b), result in self.brackets.items():
            res = tuple(sorted((c, Fraction(x)) for c, x in result if x))
            if res:
                clean[(a, b)] = res
        object.__setattr__(self, "brackets", clean)

    def _key(self):
        return (self.layer_dims, tuple(sorted(self.brackets.items())))

    def __eq__(self, other) -> bool:
        if not isinstance(other, StratifiedLieAlgebra):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    @property
    def step(self) -> int:
        return len(self.layer_dims)

    @property
    def dimension(self) -> int:
        return sum(self.layer_dims)

    @property
    def label(self) -> str:
        return self.name or f"layers{list(self.layer_dims)}"

    def basis(self) -> List[Basis]:
        return [VarId(j, l) for j, m in enumerate(self.layer_dims, start=1) for l in range(1, m + 1)]

    def layer(self, j: int) -> List[Basis]:
        return [VarId(j, l) for l in range(1, self.layer_dims[j - 1] + 1)]

    def variables(self, copy: int = 0) -> List[VarId]:
        return [v.with_copy(copy) for v in self.basis()]

    def structure(self, a: Basis, b: Basis) -> Dict[Basis, Fraction]:
        """``[e_a, e_b]`` as a coefficient dict, with antisymmetric completion."""
        if a == b:
            return {}
        if a < b:
            return dict(self.brackets.get((a, b), ()))
        return {c: -x for c, x in self.brackets.get((b, a), ())}

    def bracket(self, x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
        out: Dict[Basis, Poly] = {}
        for a, ca in x.coeffs.items():
            for b, cb in y.coeffs.items():
                s = self.structure(a, b)
                if not s:
                    continue
                prod = ca * cb
                for c, k in s.items():
                    term = prod * k
                    out[c] = out[c] + term if c in out else term
        return AlgebraElement(out)

    def dilate(self, x: AlgebraElement, lam: Poly) -> AlgebraElement:
        """Non-isotropic dilation: layer j is scaled by ``lam**j``."""
        return AlgebraElement({v: c * lam ** v.layer for v, c in x.coeffs.items()})

    def bch(self, x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
        """``log(exp x exp y)``, summed exactly up to bracket length ``step``.

        Homogeneous parts Z_n (degree n in x, y) come from the commutator
        recursion
            (n+1) Z_{n+1} = 1/2 [x - y, Z_n]
                + sum_{p>=1, 2p<=n} B_{2p}/(2p)! sum_{k_1+..+k_2p=n}
                  [Z_{k_1}, [..., [Z_{k_2p}, x + y]...]]
        with Bernoulli numbers B_{2p}. Z_n vanishes for n > step.
        """
        k = self.step
        s = x + y
        d = x - y
        Z: List[AlgebraElement] = [AlgebraElement(), s]
        for n in range(1, k):
            acc = self.bracket(d, Z[n]).scale(Fraction(1, 2))
            for p in range(1, n // 2 + 1):
                coef = bernoulli(2 * p) / factorial(2 * p)
                for parts in compositions(n, 2 * p):
                    term = s
                    for kk in reversed(parts):
                        term = self.bracket(Z[kk], term)
                        if term.is_zero():
                            break
                    if not term.is_zero():
                        acc = acc + term.scale(coef)
            Z.append(acc.scale(Fraction(1, n + 1)))
        total = AlgebraElement()
        for z in Z[1:]:
            total = total + z
        return total

    def to_json(self) -> dict:
        return {
            "name": self.label,
            "layers": list(self.layer_dims),
            "brackets": [
                {"left": [a.layer, a.index], "right": [b.layer, b.index],
                 "result": [[[c.layer, c.index], _rat(x)] for c, x in res]}
                for (a, b), res in sorted(self.brackets.items())
            ],
        }


def _rat(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli numbers with B_1 = -1/2."""
    if n == 0:
        return Fraction(1)
    return -sum(Fraction(factorial(n + 1), factorial(k) * factorial(n + 1 - k)) * bernoulli(k)
                for k in range(n)) / (n + 1)


def compositions(n: int, parts: int):
    """Ordered tuples of ``parts`` positive integers summing to ``n``."""
    if parts == 1:
        if n >= 1:
            yield (n,)
        return
    for first in range(1, n - parts + 2):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def bracket(alg: StratifiedLieAlgebra, x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return alg.bracket(x, y)


def bch(alg: StratifiedLieAlgebra, x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return alg.bch(x, y)


# validation ----------------------------------------------------------------


def _elem_text(coeffs: Mapping[Basis, Fraction]) -> str:
    if not coeffs:
        return "0"
    return " + ".join(f"{_rat(x)}*e{v.layer}_{v.index}" for v, x in sorted(coeffs.items()))


def _e(v: Basis) -> str:
    return f"e{v.layer}_{v.index}"


def _apply_bracket(alg: StratifiedLieAlgebra, a: Basis, y: Mapping[Basis, Fraction]) -> Dict[Basis, Fraction]:
    out: Dict[Basis, Fraction] = {}
    for b, cb in y.items():
        for c, x in alg.structure(a, b).items():
            out[c] = out.get(c, 0) + cb * x
    return {c: x for c, x in out.items() if x}


def validate_algebra(alg: StratifiedLieAlgebra) -> CheckReport:
    report = CheckReport()
    basis = alg.basis()
    valid = set(basis)

    bad = None
    for (a, b), res in sorted(alg.brackets.items()):
        if not a < b or a not in valid or b not in valid or any(c not in valid for c, _ in res):
            bad = f"[{_e(a)}, {_e(b)}]"
            break
    report.add("antisymmetry", bad is None, bad)

    bad = None
    for (a, b), res in sorted(alg.brackets.items()):
        target = a.layer + b.layer
        for c, _ in res:
            if c.layer != target:
                bad = f"[{_e(a)}, {_e(b)}] has component {_e(c)} outside layer {target}"
                break
        if bad:
            break
    report.add("grading", bad is None, bad)

    bad = None
    for a, b, c in combinations(basis, 3):
        total: Dict[Basis, Fraction] = {}
        for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
            for v, x in _apply_bracket(alg, p, alg.structure(q, r)).items():
                total[v] = total.get(v, 0) + x
        total = {v: x for v, x in total.items() if x}
        if total:
            bad = f"({_e(a)}, {_e(b)}, {_e(c)}) -> {_elem_text(total)}"
            break
    report.add("jacobi", bad is None, bad)

    bad = None
    dims = alg.layer_dims
    for j in range(1, alg.step):
        rows = []
        for a in alg.layer(1):
            for b in alg.layer(j):
                s = alg.structure(a, b)
                rows.append([s.get(c, Fraction(0)) for c in alg.layer(j + 1)])
        r = linalg.rank(rows) if rows else 0
        if r != dims[j]:
            bad = f"[g1, g{j}] has rank {r}, layer {j + 1} has dimension {dims[j]}"
            break
    if bad is None:
        for a in alg.layer(1):
            for b in alg.layer(alg.step):
                if alg.structure(a, b):
                    bad = f"[{_e(a)}, {_e(b)}] nonzero in top layer"
                    break
            if bad:
                break
    report.add("stratification", bad is None, bad)
    return report


# built-ins -------------------------------------------------------------------


def _from_pairs(layers: Sequence[int], pairs: Iterable[Tuple[Tuple[int, int], Tuple[int, int], Sequence]], name: str):
    table = {}
    for a, b, res in pairs:
        table[(VarId(*a), VarId(*b))] = tuple((VarId(*c), Fraction(x)) for c, x in res)
    return StratifiedLieAlgebra(tuple(layers), table, name)


def heisenberg(n: int) -> StratifiedLieAlgebra:
    # [e_i, e_{n+i}] = T
    return _from_pairs((2 * n, 1), [((1, i), (1, n + i), [((2, 1), 1)]) for i in range(1, n + 1)],
                       f"heisenberg:{n}")


def abelian(n: int) -> StratifiedLieAlgebra:
    return StratifiedLieAlgebra((n,), {}, f"abelian:{n}")


def engel() -> StratifiedLieAlgebra:
    # [e1, e2] = e3, [e1, e3] = e4
    return _from_pairs((2, 1, 1), [((1, 1), (1, 2), [((2, 1), 1)]),
                                   ((1, 1), (2, 1), [((3, 1), 1)])], "engel")


def free2(m: int) -> StratifiedLieAlgebra:
    pairs = []
    for ell, (i, j) in enumerate(combinations(range(1, m + 1), 2), start=1):
        pairs.append(((1, i), (1, j), [((2, ell), 1)]))
    return _from_pairs((m, m * (m - 1) // 2), pairs, f"free2:{m}")


def builtin(spec: str) -> StratifiedLieAlgebra:
    name, _, arg = spec.strip().partition(":")
    try:
        if name == "engel" and not arg:
            return engel()
        n = int(arg)
        if n >= 1 and name == "heisenberg":
            return heisenberg(n)
        if n >= 1 and name == "abelian":
            return abelian(n)
        if n >= 2 and name == "free2":
            return free2(n)
    except ValueError:
        pass
    raise UnknownBuiltin(f"unknown built-in group {spec!r} "
                         "(expected heisenberg:n, abelian:n, engel or free2:m)")


BUILTINS = ("heisenberg:1", "heisenberg:2", "abelian:3", "engel", "free2:3")


# group definition files ------------------------------------------------------


def _pair(value, where: str) -> VarId:
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in value)):
        raise GroupFileError(f"{where}: expected [layer, index], got {json.dumps(value)}")
    return VarId(value[0], value[1])


def algebra_from_json(data) -> StratifiedLieAlgebra:
    """Build an algebra from the group-definition schema.

    Structural problems raise :class:`GroupFileError` naming the offending
    field; algebraic ones (Jacobi, grading, ...) are left to
    :func:`validate_algebra`.
    """
    if not isinstance(data, dict):
        raise GroupFileError("top level: expected a JSON object")
    layers = data.get("layers")
    if (not isinstance(layers, list) or not layers
            or not all(isinstance(m, int) and not isinstance(m, bool) and m > 0 for m in layers)):
        raise GroupFileError("field 'layers': expected a nonempty list of positive integers")
    if len(layers) > MAX_STEP:
        raise GroupFileError(f"field 'layers': step {len(layers)} exceeds the limit {MAX_STEP}")
    if sum(layers) > MAX_DIMENSION:
        raise GroupFileError(f"field 'layers': dimension {sum(layers)} exceeds the limit {MAX_DIMENSION}")
    name = data.get("name")
    if name is not None and not isinstance(name, str):
        raise GroupFileError("field 'name': expected a string")
    raw = data.get("brackets", [])
    if not isinstance(raw, list):
        raise GroupFileError("field 'brackets': expected a list")
    valid = {VarId(j, l) for j, m in enumerate(layers, start=1) for l in range(1, m + 1)}
    table = {}
    for i, entry in enumerate(raw):
        where = f"brackets[{i}]"
        if not isinstance(entry, dict):
            raise GroupFileError(f"{where}: expected an object")
        a = _pair(entry.get("left"), f"{where}.left")
        b = _pair(entry.get("right"), f"{where}.right")
        for v, fld in ((a, "left"), (b, "right")):
            if v not in valid:
                raise GroupFileError(f"{where}.{fld}: no basis element {list(v[:2])}")
        if not a < b:
            raise GroupFileError(f"{where}: pair {list(a[:2])}, {list(b[:2])} is not lexicographically ordered")
        if (a, b) in table:
            raise GroupFileError(f"{where}: duplicate pair {list(a[:2])}, {list(b[:2])}")
        res = entry.get("result")
        if not isinstance(res, list):
            raise GroupFileError(f"{where}.result: expected a list")
        terms = []
        for t, item in enumerate(res):
            if not isinstance(item, list) or len(item) != 2:
                raise GroupFileError(f"{where}.result[{t}]: expected [[layer, index], \"p/q\"]")
            c = _pair(item[0], f"{where}.result[{t}][0]")
            if c not in valid:
                raise GroupFileError(f"{where}.result[{t}][0]: no basis element {list(c[:2])}")
            if not isinstance(item[1], str):
                raise GroupFileError(f"{where}.result[{t}][1]: coefficient must be a rational string")
            try:
                x = Fraction(item[1])
            except (ValueError, ZeroDivisionError):
                raise GroupFileError(f"{where}.result[{t}][1]: bad rational {item[1]!r}") from None
            terms.append((c, x))
        table[(a, b)] = tuple(terms)
    return StratifiedLieAlgebra(tuple(layers), table, name)


def load_algebra(path: str) -> StratifiedLieAlgebra:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise GroupFileError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GroupFileError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return algebra_from_json(data)
    except GroupFileError as exc:
        raise GroupFileError(f"{path}: {exc}") from None
