from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from carnot.errors import InvalidAlgebra, NonpositiveRadius, NotGenerating
from carnot.exactcore import LAMBDA, Poly, VarId, parse_poly, random_poly, substitute
from carnot.groupcalc import (
    DiffOp, apply, bracket_generating_step, check_group_law, commutator, compose, coordinates,
    derive_group_law, dilate_point, gauge_inside, gauge_value, generator_field,
    horizontal_fields, invariant_fields, op_to_text, parse_op, vector_at_identity, z_decompose,
)
from carnot.liecore import StratifiedLieAlgebra, builtin, load_algebra

from conftest import DATA, S, STEP_LE_3, X, Y, filiform, free_nilpotent_rank2

x, y, s = Poly.var(X), Poly.var(Y), Poly.var(S)
F = parse_poly("z1 + 6*z2*s2_1 - z1^3 - 21*z1*s2_1^2 + 21/8*z1*z2^4 - 7*z2^3*s2_1 + 21/40*z1^5")
half = Fraction(1, 2)


def d(v):
    return DiffOp.partial(v)


def test_heisenberg_law(h1):
    xp, yp, sp = (Poly.var(v.with_copy(1)) for v in (X, Y, S))
    law = h1.components
    assert law[X] == x + xp and law[Y] == y + yp
    assert law[S] == s + sp + half * (x * yp - y * xp)


def test_abelian_law_is_addition():
    g = derive_group_law(builtin("abelian:3"))
    for v, comp in g.law:
        assert comp == Poly.var(v) + Poly.var(v.with_copy(1))


@pytest.mark.parametrize("name", STEP_LE_3)
def test_group_law_axioms(name):
    assert check_group_law(derive_group_law(builtin(name))).passed


def test_group_law_axioms_step4():
    for alg in (free_nilpotent_rank2(4), filiform(5)):
        assert check_group_law(derive_group_law(alg)).passed


def test_invalid_algebra_rejected():
    with pytest.raises(InvalidAlgebra):
        derive_group_law(load_algebra(str(DATA / "bad_group_jacobi.json")))


def test_heisenberg_left_fields_match_published(h1):
    X1, X2 = horizontal_fields(h1, "left")
    assert X1 == d(X) + d(S) * (-half * y)
    assert X2 == d(Y) + d(S) * (half * x)


def test_heisenberg_right_fields(h1):
    X1t, X2t = horizontal_fields(h1, "right")
    assert X1t == d(X) + d(S) * (half * y)
    assert X2t == d(Y) + d(S) * (-half * x)


def test_abelian_fields_are_partials():
    g = derive_group_law(builtin("abelian:3"))
    parts = [d(v) for v in g.variables]
    assert invariant_fields(g, "left") == parts == invariant_fields(g, "right")


def test_apply_to_counterexample(h1):
    X1, X2 = horizontal_fields(h1, "left")
    zsq = x * x + y * y
    assert apply(X1, F) == (1 - 3 * zsq - 21 * s * s + Fraction(21, 8) * x**4
                            + Fraction(49, 8) * y**4 + 21 * x * y * s)
    assert apply(X2, F) == 6 * s + 3 * x * y - 21 * s * zsq + 7 * x * y**3
    assert apply(compose(X1, X1), F) == (-6 * x + Fraction(21, 2) * x**3 + 42 * y * s
                                         - Fraction(21, 2) * x * y * y)
    assert apply(X1, Poly.const(5)).is_zero()


def test_heisenberg_commutators(h1):
    X1, X2 = horizontal_fields(h1, "left")
    assert commutator(X1, X2) == d(S)
    for A in horizontal_fields(h1, "left"):
        for B in horizontal_fields(h1, "right"):
            assert commutator(A, B).is_zero()


@pytest.mark.parametrize("name", STEP_LE_3)
def test_left_right_commute_full_frames(name):
    g = derive_group_law(builtin(name))
    for A in invariant_fields(g, "left"):
        for B in invariant_fields(g, "right"):
            assert commutator(A, B).is_zero()


@pytest.mark.parametrize("alg", [builtin(n) for n in STEP_LE_3] + [free_nilpotent_rank2(4)],
                         ids=lambda a: a.label)
def test_commutators_reproduce_structure_constants(alg):
    g = derive_group_law(alg)
    basis = alg.basis()
    fields = dict(zip(basis, invariant_fields(g, "left")))
    for a in basis:
        for b in basis:
            got = vector_at_identity(commutator(fields[a], fields[b]), basis)
            want = alg.structure(a, b)
            assert got == [want.get(v, 0) for v in basis]


def _translate(g, f, side):
    """f o L_q (left) or f o R_q (right) with q in copy-2 variables."""
    alg = g.algebra
    q = coordinates(alg, 2)
    p = coordinates(alg, 0)
    prod = g.multiply(q, p) if side == "left" else g.multiply(p, q)
    return substitute(f, prod, partial=True), prod


@pytest.mark.parametrize("name", ["heisenberg:1", "engel", "free2:3"])
@pytest.mark.parametrize("side", ["left", "right"])
def test_invariance_under_translation(name, side):
    g = derive_group_law(builtin(name))
    f = random_poly(11, g.algebra, 4)
    for field in horizontal_fields(g, side):
        translated, prod = _translate(g, f, side)
        lhs = substitute(apply(field, f), prod, partial=True)
        assert apply(field, translated) == lhs


@pytest.mark.parametrize("name", ["heisenberg:2", "engel"])
def test_commutator_jacobi_and_compose_associative(name):
    g = derive_group_law(builtin(name))
    A, B = horizontal_fields(g, "left")[:2]
    C = invariant_fields(g, "right")[1]
    jac = (commutator(A, commutator(B, C)) + commutator(B, commutator(C, A))
           + commutator(C, commutator(A, B)))
    assert jac.is_zero()
    assert compose(compose(A, B), C) == compose(A, compose(B, C))
    f = random_poly(3, g.algebra, 5)
    assert apply(compose(A, B), f) == apply(A, apply(B, f))


def test_commutator_of_derivations_is_order_one(any_law):
    fields = horizontal_fields(any_law, "left") + horizontal_fields(any_law, "right")
    for A in fields:
        for B in fields:
            assert commutator(A, B).order <= 1


def test_generator_field(h1):
    assert generator_field(h1) == d(X) * x + d(Y) * y + d(S) * (2 * s)
    g = derive_group_law(builtin("abelian:3"))
    assert generator_field(g) == sum((d(v) * Poly.var(v) for v in g.variables), DiffOp())
    p5 = parse_poly("z1*s2_1^2 - 1/8*z1*z2^4 + 1/3*z2^3*s2_1 - 1/40*z1^5")
    assert apply(generator_field(h1), p5) == 5 * p5


def test_z_decomposition_heisenberg(h1):
    z = z_decompose(h1)
    assert z.q == {X: x, Y: y, S: 2 * s}
    X1, X2, T = invariant_fields(h1, "left")
    assert X1 * x + X2 * y + T * (2 * s) == generator_field(h1)


@pytest.mark.parametrize("alg", [builtin(n) for n in STEP_LE_3] + [free_nilpotent_rank2(4), filiform(5)],
                         ids=lambda a: a.label)
def test_z_decomposition_properties(alg):
    g = derive_group_law(alg)
    z = z_decompose(g)
    assert (z.operator() - generator_field(g)).is_zero()
    lam = Poly.var(LAMBDA)
    dil = {v: lam**v.layer * Poly.var(v) for v in g.variables}
    for v, q in z.q.items():
        assert substitute(q, dil) == lam**v.layer * q
        if v.layer == 1:
            assert q == Poly.var(v)


def test_engel_z_decomposition_layer3():
    # back-substitution: Q_3 = 3 s3 - Q_{z1} * [X_{z1}]_{s3} - Q_{z2} * [X_{z2}]_{s3} - Q_{s2} * 0
    g = derive_group_law(builtin("engel"))
    z = z_decompose(g)
    assert z.q[VarId(3, 1)] == parse_poly("3*s3_1 - 1/2*z1*s2_1")


@pytest.mark.parametrize("name, step", [("heisenberg:1", 2), ("abelian:4", 1), ("engel", 3),
                                        ("free2:3", 2), ("heisenberg:2", 2)])
def test_bracket_generating_step(name, step):
    g = derive_group_law(builtin(name))
    assert bracket_generating_step(horizontal_fields(g, "left"), g) == step
    assert bracket_generating_step(horizontal_fields(g, "right"), g) == step


def test_not_generating():
    g = derive_group_law(builtin("engel"))
    with pytest.raises(NotGenerating):
        bracket_generating_step(horizontal_fields(g, "left")[:1], g)


def test_gauge():
    assert gauge_inside({X: 0, Y: 0, S: 0}, Fraction(1, 3))
    r = Fraction(1, 3)
    assert not gauge_inside({X: 0, Y: 0, S: r * r}, r)
    assert gauge_inside({X: 0, Y: 0, S: r * r * Fraction(99, 100)}, r)
    with pytest.raises(NonpositiveRadius):
        gauge_inside({X: 0}, 0)
    assert gauge_value({X: Fraction(-1, 2), Y: Fraction(1, 4), S: Fraction(1, 9)}).layer_magnitudes == (
        Fraction(1, 2), Fraction(1, 9))


coords = st.fractions(min_value=-2, max_value=2, max_denominator=7)


@given(coords, coords, coords, st.fractions(min_value=Fraction(1, 10), max_value=3, max_denominator=10))
def test_gauge_starlike_and_homogeneous(a, b, c, r):
    p = {X: a, Y: b, S: c}
    half_p = {v: val * Fraction(1, 2) ** v.layer for v, val in p.items()}
    if gauge_inside(p, r):
        assert gauge_inside(half_p, r)
    # rho(delta_lam p) < lam r  iff  rho(p) < r
    lam = Fraction(2, 3)
    scaled = {v: val * lam**v.layer for v, val in p.items()}
    assert gauge_inside(scaled, lam * r) == gauge_inside(p, r)


def test_dilate_point(h1):
    lam = Poly.var(LAMBDA)
    assert dilate_point(h1.algebra, {X: x, S: s}, lam) == {X: lam * x, S: lam**2 * s}


def test_operator_text_round_trip(any_law):
    for side in ("left", "right"):
        for op in invariant_fields(any_law, side):
            assert parse_op(op_to_text(op)) == op
    A, B = horizontal_fields(any_law, "left")[:2]
    op = compose(A, B) - DiffOp.multiplication(Poly.const(3))
    assert parse_op(op_to_text(op)) == op


def test_operator_text_format(h1):
    X1, _ = horizontal_fields(h1, "left")
    assert op_to_text(X1) == "d[z1] - 1/2*z2 * d[s2_1]"
    assert op_to_text(compose(X1, X1)) == (
        "d[z1,z1] - z2 * d[z1,s2_1] + 1/4*z2^2 * d[s2_1,s2_1]")
    assert h1.lines()[2] == "s2_1 = s2_1 + s2_1' + 1/2*z1*z2' - 1/2*z1'*z2"
