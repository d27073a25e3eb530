"""Horizontal Laplacian, carre du champ and exact residuals of Bochner-type identities.

Every residual is a polynomial; an identity holds iff the residual is the zero
polynomial.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional

from .errors import NotAbelian, NotConstantLaplacian, WrongStep
from .exactcore import Poly, differentiate, evaluate, graded_components, to_text
from .groupcalc import GroupLaw, apply, generator_field, horizontal_fields
from .report import CheckReport


@dataclass(frozen=True)
class IdentityResidual:
    residual: Poly
    identity_name: str
    inputs_digest: Dict[str, object] = field(default_factory=dict)

    @property
    def is_zero(self) -> bool:
        return self.residual.is_zero()

    def to_json(self, group: str) -> str:
        doc = {
            "identity": self.identity_name,
            "group": group,
            "seed": self.inputs_digest.get("seed"),
            "degree": self.inputs_digest.get("degree"),
            "residual_is_zero": self.is_zero,
            "residual_text_if_nonzero": None if self.is_zero else to_text(self.residual),
        }
        return json.dumps(doc, sort_keys=True)


def _sum(polys) -> Poly:
    out = Poly()
    for p in polys:
        out = out + p
    return out


def horizontal_laplacian(g: GroupLaw, f: Poly) -> Poly:
    return _sum(apply(X, apply(X, f)) for X in horizontal_fields(g, "left"))


def horizontal_gradient(g: GroupLaw, f: Poly, side: str = "left"):
    return [apply(X, f) for X in horizontal_fields(g, side)]


def carre_du_champ(g: GroupLaw, f: Poly, side: str = "left") -> Poly:
    return _sum(d * d for d in horizontal_gradient(g, f, side))


def bochner_right_residual(g: GroupLaw, f: Poly, digest: Optional[dict] = None) -> IdentityResidual:
    """Delta_H |grad~ f|^2 - 2 <grad~ f, grad~ Delta_H f> - 2 sum_i |grad~ X_i f|^2."""
    right = horizontal_fields(g, "right")
    lhs = horizontal_laplacian(g, carre_du_champ(g, f, "right"))
    lap = horizontal_laplacian(g, f)
    cross = _sum(apply(Y, f) * apply(Y, lap) for Y in right)
    squares = _sum(carre_du_champ(g, apply(X, f), "right") for X in horizontal_fields(g, "left"))
    return IdentityResidual(lhs - cross * 2 - squares * 2, "bochner_right", dict(digest or {}))


def bochner_right_nonneg(g: GroupLaw, f: Poly) -> CheckReport:
    """For constant Delta_H f, exhibit Delta_H |grad~ f|^2 as 2 sum of squares."""
    lap = horizontal_laplacian(g, f)
    if not lap.is_constant():
        raise NotConstantLaplacian(f"Delta_H f = {to_text(lap)} is not constant")
    lhs = horizontal_laplacian(g, carre_du_champ(g, f, "right"))
    squares = [apply(Y, apply(X, f)) for X in horizontal_fields(g, "left")
               for Y in horizontal_fields(g, "right")]
    sos = _sum(s * s for s in squares) * 2
    report = CheckReport()
    diff = lhs - sos
    report.add("sum_of_squares", diff.is_zero(), None if diff.is_zero() else to_text(diff))
    report.note = f"Delta_H|grad~ f|^2 = 2 * sum of {sum(1 for s in squares if s)} squares"
    return report


def step2_difference_residual(g: GroupLaw, f: Poly, digest: Optional[dict] = None) -> IdentityResidual:
    """|grad f|^2 - |grad~ f|^2 - 2 sum_l (sum_{i<j} b^l_ij (z_i f_j - z_j f_i)) f_{s_l}.

    The constants are read off the algebra as [e_i, e_j] = sum_l b^l_ij e_{2,l}.
    """
    alg = g.algebra
    if alg.step != 2:
        raise WrongStep(f"step-2 difference formula needs step 2, group has step {alg.step}")
    z = alg.layer(1)
    diff = carre_du_champ(g, f, "left") - carre_du_champ(g, f, "right")
    partial = {v: differentiate(f, v) for v in alg.basis()}
    rhs = Poly()
    for sigma in alg.layer(2):
        inner = Poly()
        for a in range(len(z)):
            for b in range(a + 1, len(z)):
                coef = alg.structure(z[a], z[b]).get(sigma, Fraction(0))
                if coef:
                    inner = inner + (Poly.var(z[a]) * partial[z[b]] - Poly.var(z[b]) * partial[z[a]]) * coef
        rhs = rhs + inner * partial[sigma]
    return IdentityResidual(diff - rhs * 2, "step2_difference", dict(digest or {}))


def _require_abelian(g: GroupLaw) -> None:
    if g.algebra.step != 1:
        raise NotAbelian(f"flat Bochner identity needs an abelian group, step is {g.algebra.step}")


def euclidean_bochner_residual(g: GroupLaw, f: Poly, digest: Optional[dict] = None) -> IdentityResidual:
    """Delta |grad f|^2 - 2 ||Hess f||^2 - 2 <grad f, grad Delta f> on R^n."""
    _require_abelian(g)
    vs = g.variables
    grad = {v: differentiate(f, v) for v in vs}

    def lap(p: Poly) -> Poly:
        return _sum(differentiate(differentiate(p, v), v) for v in vs)

    u = _sum(d * d for d in grad.values())
    hs = _sum(differentiate(grad[v], w) ** 2 for v in vs for w in vs)
    lf = lap(f)
    cross = _sum(grad[v] * differentiate(lf, v) for v in vs)
    return IdentityResidual(lap(u) - hs * 2 - cross * 2, "euclidean_bochner", dict(digest or {}))


def radial_reconstruct(g: GroupLaw, f: Poly) -> Poly:
    """f(e) + sum_{d>=1} (Zf)_d / d, the polynomial form of the radial integral.

    Zf is split into weighted-homogeneous components; integrating
    lam^-1 Zf(delta_lam p) over [0, 1] divides the degree-d part by d.
    """
    origin = {v: Fraction(0) for v in g.variables}
    out = Poly.const(evaluate(f, origin))
    for d, part in graded_components(apply(generator_field(g), f), "weighted").items():
        if d:
            out = out + part * Fraction(1, d)
    return out
