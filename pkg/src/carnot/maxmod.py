"""Solid harmonics and the left/right maximum-modulus dichotomy on H^1.

Coordinates on H^1 are x = z1, y = z2, sigma = s2_1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Tuple

from . import linalg
from .errors import NoWitnessFound, NonpositiveRadius, NotConstantLaplacian, StructureMismatch
from .exactcore import (
    Monomial, Poly, VarId, euclidean_degree, evaluate, graded_components, mono_key,
    monomials_of_weighted_degree, parse_poly, to_text,
)
from .groupcalc import GroupLaw, apply, derive_group_law, horizontal_fields
from .identities import carre_du_champ, horizontal_laplacian
from .liecore import heisenberg
from .report import CheckReport, rational_text

X, Y, S = VarId(1, 1), VarId(1, 2), VarId(2, 1)
x, y, s = Poly.var(X), Poly.var(Y), Poly.var(S)
ZSQ = x * x + y * y


def h1() -> GroupLaw:
    return derive_group_law(heisenberg(1))


# harmonic bases ------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicBasis:
    group: str
    weighted_degree: int
    basis: Tuple[Poly, ...]
    monomials: Tuple[Monomial, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def coordinates(self, p: Poly) -> List[Fraction]:
        index = {m: i for i, m in enumerate(self.monomials)}
        vec = [Fraction(0)] * len(self.monomials)
        for m, c in p.terms.items():
            if m not in index:
                raise StructureMismatch(f"{to_text(p)} has a monomial outside degree {self.weighted_degree}")
            vec[index[m]] = c
        return vec

    def contains(self, p: Poly) -> bool:
        """Exact membership by reduction against the echelon basis."""
        try:
            vec = self.coordinates(p)
        except StructureMismatch:
            return False
        rows = [self.coordinates(b) for b in self.basis]
        pivots = [next(i for i, c in enumerate(r) if c) for r in rows]
        return not any(linalg.reduce_against(vec, rows, pivots))


def harmonic_basis(g: GroupLaw, d: int) -> HarmonicBasis:
    """Nullspace of Delta_H on weighted-homogeneous polynomials of degree d.

    Returned in reduced echelon form with respect to the canonical monomial
    order, so the output is canonical.
    """
    if d < 0:
        raise ValueError("degree must be >= 0")
    monos = monomials_of_weighted_degree(g.variables, d)
    images = [horizontal_laplacian(g, Poly({m: 1})) for m in monos]
    targets = sorted({m for im in images for m in im.terms}, key=mono_key)
    row_of = {m: i for i, m in enumerate(targets)}
    rows = [[Fraction(0)] * len(monos) for _ in targets]
    for j, im in enumerate(images):
        for m, c in im.terms.items():
            rows[row_of[m]][j] = c
    kernel = linalg.nullspace(rows, len(monos))
    red, _ = linalg.rref(kernel) if kernel else ([], [])
    basis = tuple(Poly({m: c for m, c in zip(monos, vec)}) for vec in red)
    return HarmonicBasis(g.algebra.label, d, basis, tuple(monos))


# the counterexample ---------------------------------------------------------

P1 = x
P3 = parse_poly("6*z2*s2_1 - z1^3")
P5 = parse_poly("z1*s2_1^2 - 1/8*z1*z2^4 + 1/3*z2^3*s2_1 - 1/40*z1^5")

# Published closed forms, transcribed once.
X1F = 1 - 3 * ZSQ - 21 * s * s + Fraction(21, 8) * x**4 + Fraction(49, 8) * y**4 + 21 * x * y * s
X2F = 6 * s + 3 * x * y - 21 * s * ZSQ + 7 * x * y**3
X1X1F = -6 * x + Fraction(21, 2) * x**3 + 42 * y * s - Fraction(21, 2) * x * y * y
X2X2F = 6 * x - Fraction(21, 2) * x**3 - 42 * y * s + Fraction(21, 2) * x * y * y
G = Fraction(21, 8) * x**4 + Fraction(49, 8) * y**4 + 21 * x * y * s
H = 3 * x * y - 21 * s * ZSQ + 7 * x * y**3
K = (2 * G + G * G + H * H + 12 * s * H - 6 * ZSQ * G - 42 * s * s * G
     + 126 * ZSQ * s * s + 9 * ZSQ * ZSQ + 441 * s**4)


def counterexample_f() -> Poly:
    return P1 + P3 - 21 * P5


def _zero_or_witness(p: Poly):
    return p.is_zero(), None if p.is_zero() else to_text(p)


def _first_witness(*candidates):
    return next((f"{label} {w}" for label, w in candidates if w is not None), None)


def verify_counterexample(f: Optional[Poly] = None) -> CheckReport:
    """Check each published computation for ``f`` (the shipped polynomial by default)."""
    f = counterexample_f() if f is None else f
    g = h1()
    X1, X2 = horizontal_fields(g, "left")
    report = CheckReport()
    x1f, x2f = apply(X1, f), apply(X2, f)

    ok1, w1 = _zero_or_witness(x1f - X1F)
    ok2, w2 = _zero_or_witness(x2f - X2F)
    report.add("a_first_derivatives", ok1 and ok2,
               _first_witness(("X1f residual", w1), ("X2f residual", w2)))

    x11, x22 = apply(X1, x1f), apply(X2, x2f)
    ok1, w1 = _zero_or_witness(x11 - X1X1F)
    ok2, w2 = _zero_or_witness(x22 - X2X2F)
    lap = x11 + x22
    ok3 = lap.is_zero()
    report.add("b_second_derivatives", ok1 and ok2 and ok3,
               _first_witness(("X1X1f residual", w1), ("X2X2f residual", w2),
                              ("Delta_H f =", None if ok3 else to_text(lap))))

    grad = x1f * x1f + x2f * x2f
    origin = {X: Fraction(0), Y: Fraction(0), S: Fraction(0)}
    at0 = evaluate(grad, origin)
    report.add("c_gradient_at_identity", at0 == 1, None if at0 == 1 else f"value {rational_text(at0)}")

    resid = grad - (1 - 6 * (ZSQ + s * s) + K)
    ok, w = _zero_or_witness(resid)
    report.add("d_gradient_decomposition", ok, w)

    split_ok = (x1f - (1 - 3 * ZSQ - 21 * s * s) - G).is_zero() and (x2f - 6 * s - H).is_zero()
    deg_ok = G.min_euclidean_degree() >= 3 and H.min_euclidean_degree() >= 2
    report.add("e_remainder_orders", split_ok and deg_ok,
               None if split_ok and deg_ok else
               ("X_i f does not split as 1 - 3|z|^2 - 21 s^2 + g, 6 s + h" if not split_ok
                else f"min degrees g={G.min_euclidean_degree()}, h={H.min_euclidean_degree()}"))

    kmin = K.min_euclidean_degree()
    report.add("f_k_cubic_order", kmin >= 3, None if kmin >= 3 else f"monomial of degree {kmin} in k")

    kw = min(graded_components(K, "weighted"))
    report.add("g_k_weighted_order", kw >= 4, None if kw >= 4 else f"weighted component of degree {kw}")

    lg = horizontal_laplacian(g, grad)
    lk = horizontal_laplacian(g, K)
    resid = lg - (-24 - 3 * ZSQ + lk)
    parts = graded_components(lg, "weighted")
    const = parts.get(0, Poly()).constant_term()
    others_ok = all(d >= 2 for d in parts if d != 0)
    ok = resid.is_zero() and const == -24 and others_ok
    if ok:
        w = None
    elif not resid.is_zero():
        w = f"residual {to_text(resid)}"
    else:
        w = f"constant part {rational_text(const)}, degrees {sorted(parts)}"
    report.add("h_laplacian_of_gradient", ok, w)
    return report


# strict maximum of the left carre du champ ----------------------------------


def _euclid_sq(point: Dict[VarId, Fraction]) -> Fraction:
    return sum((c * c for c in point.values()), Fraction(0))


def _point_text(point: Dict[VarId, Fraction]) -> str:
    return "(" + ", ".join(rational_text(point[v]) for v in sorted(point)) + ")"


@dataclass
class RadiusCertificate:
    """|grad_H f|^2 < 1 on 0 < |p| <= radius, from a coefficient-norm bound.

    With k = |grad_H f|^2 - 1 + 6|p|^2 and every monomial of k of euclidean
    degree >= 3, |k(p)| <= |p|^2 * sum_a |c_a| r^(deg a - 2) for |p| <= r,
    so ``bound_constant`` < 6 gives the strict inequality.
    """

    radius: Fraction
    bound_constant: Fraction
    remainder: Poly
    grid_samples: List[Tuple[Dict[VarId, Fraction], Fraction]] = field(default_factory=list)

    def check(self, f: Optional[Poly] = None) -> CheckReport:
        report = CheckReport()
        report.add("radius_positive", self.radius > 0, None if self.radius > 0 else rational_text(self.radius))
        bound = _coefficient_bound(self.remainder, self.radius)
        ok = bound == self.bound_constant and bound < 6
        report.add("bound_below_six", ok, None if ok else f"bound {rational_text(bound)}")
        grad = carre_du_champ(h1(), counterexample_f() if f is None else f, "left")
        bad = None
        for pt, val in self.grid_samples:
            real = evaluate(grad, pt)
            inside = 0 < _euclid_sq(pt) <= self.radius ** 2
            if real != val or not real < 1 or not inside:
                bad = f"{_point_text(pt)} -> {rational_text(real)}"
                break
        report.add("grid_below_one", bad is None and bool(self.grid_samples), bad or (None if self.grid_samples else "empty grid"))
        return report

    def to_json(self) -> dict:
        return {
            "radius": rational_text(self.radius),
            "bound_constant": rational_text(self.bound_constant),
            "grid_samples": [{"point": [rational_text(pt[v]) for v in sorted(pt)], "value": rational_text(val)}
                             for pt, val in self.grid_samples],
        }


def _coefficient_bound(k: Poly, r: Fraction) -> Fraction:
    return sum((abs(c) * r ** (euclidean_degree(m) - 2) for m, c in k.terms.items()), Fraction(0))


def _grid(r: Fraction) -> List[Dict[VarId, Fraction]]:
    """Deterministic sample points with 0 < |p| <= r."""
    pts = []
    for num in (1, 2, 4):
        h = r * Fraction(num, 4)
        for sign in (1, -1):
            for v in (X, Y, S):
                pt = {X: Fraction(0), Y: Fraction(0), S: Fraction(0)}
                pt[v] = sign * h
                pts.append(pt)
    q = r / 2
    for sx, sy, ss in product((1, -1), repeat=3):
        pts.append({X: sx * q, Y: sy * q, S: ss * q})
    return pts


def strict_max_radius(f: Optional[Poly] = None) -> RadiusCertificate:
    f = counterexample_f() if f is None else f
    grad = carre_du_champ(h1(), f, "left")
    k = grad - 1 + 6 * (ZSQ + s * s)
    if not k.is_zero() and k.min_euclidean_degree() < 3:
        raise StructureMismatch("|grad_H f|^2 - 1 + 6(|z|^2 + s^2) has terms of euclidean degree < 3")
    r = Fraction(1)
    while _coefficient_bound(k, r) >= 6:
        r /= 2
    samples = [(pt, evaluate(grad, pt)) for pt in _grid(r)]
    return RadiusCertificate(r, _coefficient_bound(k, r), k, samples)


# excess of the right carre du champ -----------------------------------------


def right_excess_witness(f: Optional[Poly] = None, r: Fraction = Fraction(1, 10), side: str = "right",
                         levels: int = 10) -> Dict[VarId, Fraction]:
    """First dyadic grid point with |p| < r and carre du champ > 1.

    Level n uses step h = r / 2**n and points (i h, j h, k h) with
    i, j, k in -2..2, scanned lexicographically; the origin is skipped.
    """
    r = Fraction(r)
    if r <= 0:
        raise NonpositiveRadius(f"radius must be positive, got {r}")
    f = counterexample_f() if f is None else f
    cdc = carre_du_champ(h1(), f, side)
    for n in range(1, levels + 1):
        h = r / 2 ** n
        for i, j, k in product(range(-2, 3), repeat=3):
            if i == j == k == 0:
                continue
            pt = {X: i * h, Y: j * h, S: k * h}
            if _euclid_sq(pt) < r * r and evaluate(cdc, pt) > 1:
                return pt
    raise NoWitnessFound(f"no point with {side} carre du champ > 1 in the grid of radius {rational_text(r)}")


def left_subharmonicity_failure(f: Optional[Poly] = None, g: Optional[GroupLaw] = None) -> CheckReport:
    """Certify Delta_H |grad_H f|^2 <= 0 near e: negative constant, no degree-1 part."""
    g = h1() if g is None else g
    f = counterexample_f() if f is None else f
    lap = horizontal_laplacian(g, f)
    if not lap.is_constant():
        raise NotConstantLaplacian(f"Delta_H f = {to_text(lap)} is not constant")
    L = horizontal_laplacian(g, carre_du_champ(g, f, "left"))
    report = CheckReport()
    if L.is_zero():
        report.add("laplacian_of_gradient_nonzero", False, "0")
        report.note = "degenerate: identically zero"
        return report
    parts = graded_components(L, "weighted")
    const = parts.get(0, Poly()).constant_term()
    report.add("constant_term_negative", const < 0, None if const < 0 else f"constant term {rational_text(const)}")
    report.add("no_degree_one_part", 1 not in parts, to_text(parts[1]) if 1 in parts else None)
    if const > 0:
        report.note = "no failure (flat case)" if g.algebra.step == 1 else "no failure"
    elif report.passed:
        report.note = f"constant term {rational_text(const)}"
    return report


def certificate_json(cert: RadiusCertificate) -> str:
    return json.dumps(cert.to_json(), sort_keys=True)
