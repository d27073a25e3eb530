from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from carnot.errors import MissingComponent, MissingCoordinate, ParseError
from carnot.exactcore import (
    LAMBDA, Poly, VarId, XorShift64Star, differentiate, dilation_map, evaluate,
    graded_components, monomials_of_weighted_degree, parse_poly, poly_arithmetic,
    random_poly, substitute, to_text,
)
from carnot.liecore import builtin, heisenberg

from conftest import S, X, Y, load_fixture

x, y, s = Poly.var(X), Poly.var(Y), Poly.var(S)
VARS = [X, Y, S]

F_TEXT = "z1 + 6*z2*s2_1 - z1^3 - 21*z1*s2_1^2 + 21/8*z1*z2^4 - 7*z2^3*s2_1 + 21/40*z1^5"


@st.composite
def polys(draw, variables=VARS, max_terms=5, max_exp=3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        mono = tuple((v, e) for v in variables if (e := draw(st.integers(0, max_exp))))
        terms[mono] = Fraction(draw(st.integers(-9, 9)), draw(st.integers(1, 4)))
    return Poly(terms)


def test_difference_of_squares():
    assert (x + y) * (x - y) == x * x - y * y


def test_additive_identity():
    f = parse_poly(F_TEXT)
    assert f + Poly() == f
    assert poly_arithmetic(f, Poly(), "add") == f


def test_hand_expanded_product():
    # (1 - 3x^2)(1 + 3x^2) = 1 + 3x^2 - 3x^2 - 9x^4
    assert poly_arithmetic(1 - 3 * x * x, 1 + 3 * x * x, "mul") == 1 - 9 * x**4


def test_zero_coefficients_never_stored():
    p = x - x
    assert p.is_zero() and p.terms == {}
    assert Poly({(): 0}).is_zero()


def test_power_rule_and_constants():
    assert differentiate(x**3, X) == 3 * x * x
    assert differentiate(Poly.const(7), Y).is_zero()


def test_sigma_derivative_of_counterexample():
    # hand derivative: d/ds [6ys - 21(x s^2 + y^3 s/3)] = 6y - 42xs - 7y^3
    f = parse_poly(F_TEXT)
    assert differentiate(f, S) == 6 * y - 42 * x * s - 7 * y**3


def test_substitute_scaling():
    lam = Poly.var(LAMBDA)
    assert substitute(x * x, {X: lam * x}) == lam * lam * x * x


def test_dilation_of_sigma_in_h1():
    lam = Poly.var(LAMBDA)
    assert substitute(s, dilation_map(VARS)) == lam**2 * s


def test_identity_substitution():
    f = parse_poly(F_TEXT)
    assert substitute(f, {v: Poly.var(v) for v in VARS}) == f


def test_substitute_missing_component():
    with pytest.raises(MissingComponent):
        substitute(x * y, {X: x})


def test_evaluate():
    assert evaluate(x + y, {X: Fraction(1, 2), Y: Fraction(1, 3)}) == Fraction(5, 6)
    with pytest.raises(MissingCoordinate):
        evaluate(x + y, {X: 1})


def test_graded_components_weighted():
    assert graded_components(x + s, "weighted") == {1: x, 2: s}
    f = parse_poly(F_TEXT)
    assert sorted(graded_components(f, "weighted")) == [1, 3, 5]
    assert graded_components(Poly(), "weighted") == {}


def test_monomial_enumeration_counts():
    # weighted degree 3 on H^1: x^3, x^2y, xy^2, y^3, xs, ys
    assert len(monomials_of_weighted_degree(VARS, 3)) == 6
    assert monomials_of_weighted_degree(VARS, 0) == [()]


def test_text_example_and_order():
    p = 1 - 3 * x * x - 21 * s * s
    assert to_text(p) == "1 - 3*z1^2 - 21*s2_1^2"
    assert to_text(Poly()) == "0"
    assert to_text(Fraction(-1, 2) * x) == "-1/2*z1"


def test_text_round_trip_with_copies():
    v = VarId(3, 2, 2)
    p = Fraction(3, 7) * Poly.var(v) * x - Poly.var(LAMBDA) ** 2 + 5
    assert to_text(p) == "5 - lam^2 + 3/7*z1*s3_2''"
    assert parse_poly(to_text(p)) == p


def test_parse_errors():
    for bad in ["", "z1 +", "q7", "s1_1", "z1^x"]:
        with pytest.raises(ParseError):
            parse_poly(bad)


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a - a == Poly()


@given(polys())
def test_text_round_trip(p):
    assert parse_poly(to_text(p)) == p


@given(polys(), st.sampled_from(VARS), st.sampled_from(VARS))
def test_partials_commute(p, u, v):
    assert differentiate(differentiate(p, u), v) == differentiate(differentiate(p, v), u)


@given(polys(), polys(), st.sampled_from(VARS))
def test_leibniz(a, b, v):
    assert differentiate(a * b, v) == differentiate(a, v) * b + a * differentiate(b, v)


@given(polys())
def test_graded_components_recombine_and_scale(p):
    lam = Poly.var(LAMBDA)
    parts = graded_components(p, "weighted")
    total = Poly()
    for d, c in parts.items():
        total = total + c
        assert substitute(c, dilation_map(VARS)) == lam**d * c
    assert total == p


@given(polys(), polys(), polys(), polys(),
       st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=3, max_size=3))
def test_evaluate_commutes_with_substitute(p, mx, my, ms, pt):
    point = dict(zip(VARS, pt))
    m = {X: mx, Y: my, S: ms}
    lhs = evaluate(substitute(p, m), point)
    rhs = evaluate(p, {v: evaluate(m[v], point) for v in VARS})
    assert lhs == rhs


def test_xorshift_reference_stream():
    # xorshift64*, state seeded as documented in XorShift64Star
    rng = XorShift64Star(0)
    first = [rng.next() for _ in range(3)]
    assert first == load_fixture("random_fixtures.json")["xorshift_seed0"]


def test_random_poly_deterministic_and_frozen():
    fx = load_fixture("random_fixtures.json")
    h = heisenberg(1)
    assert random_poly(42, h, 5) == random_poly(42, h, 5)
    assert to_text(random_poly(42, h, 5)) == fx["heisenberg:1"]["42"]
    assert to_text(random_poly(43, h, 5)) == fx["heisenberg:1"]["43"]
    assert random_poly(42, h, 5) != random_poly(43, h, 5)
    assert to_text(random_poly(42, builtin("free2:3"), 5)) == fx["free2:3"]["42"]


def test_random_poly_degree_bound_and_layers():
    h = heisenberg(1)
    assert random_poly(5, h, 0).is_constant()
    seen = set()
    for seed in range(30):
        p = random_poly(seed, h, 5)
        assert p.weighted_degree() <= 5
        assert all(abs(c) <= 9 and c.denominator == 1 for c in p.terms.values())
        seen |= p.variables()
    assert seen == set(VARS)
