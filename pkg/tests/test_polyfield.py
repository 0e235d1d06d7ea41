import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from s3dirac.polyfield import (
    DegreeCapError,
    Poly4,
    PolynomialSyntaxError,
    SphericalField,
    field_multiply,
    format_poly,
    gram_matrix,
    harmonic_basis,
    harmonic_decompose,
    inner_product,
    integrate_poly,
    laplacian4,
    leading_minors_positive,
    monomial_sphere_integral,
    monomials,
    neg_sphere_laplacian,
    pseudo_inverse_laplacian,
)
from s3dirac.berger import rational_sphere_point

x1, x2, x3, x4 = (Poly4.variable(i) for i in range(1, 5))


def gamma_moment(exp):
    # independent oracle: int_{S^3} x^(2k) = 2 prod Gamma(k_i + 1/2) / Gamma(K + 2)
    if any(e % 2 for e in exp):
        return 0.0
    k = [e // 2 for e in exp]
    num = 2 * math.prod(math.gamma(ki + 0.5) for ki in k)
    return num / math.gamma(sum(k) + 2) / (2 * math.pi**2)


def test_parse_and_format_roundtrip():
    p = Poly4.parse("3/2*x1^2*x4 - x2*x3")
    assert format_poly(p) == "3/2*x1^2*x4 - x2*x3"
    assert Poly4.parse(format_poly(p)) == p
    assert Poly4.parse("(x1+x2)**2") == x1 * x1 + x2 * x2 + x1 * x2 * 2


@pytest.mark.parametrize("bad", ["x5", "x1 +", "sin(x1)", "x1^(1/2)", "1/x1", "y"])
def test_parse_rejects(bad):
    with pytest.raises(PolynomialSyntaxError):
        Poly4.parse(bad)


def test_constant_mean_is_one():
    assert integrate_poly(Poly4.constant(1)).coefficient == 1


@pytest.mark.parametrize("exp", [e for d in range(0, 7) for e in monomials(d)])
def test_moments_match_gamma_formula(exp):
    exact = monomial_sphere_integral(exp).coefficient
    assert float(exact) == pytest.approx(gamma_moment(exp), rel=1e-12, abs=1e-15)


def test_moments_monte_carlo():
    gen = np.random.default_rng(7)
    pts = gen.standard_normal((400_000, 4))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    for exp in [(2, 0, 0, 0), (2, 2, 0, 0), (4, 0, 0, 0), (2, 2, 2, 0), (1, 1, 0, 0)]:
        mc = np.mean(np.prod(pts**np.array(exp), axis=1))
        assert float(monomial_sphere_integral(exp).coefficient) == pytest.approx(mc, abs=3e-3)


def test_moment_recursion():
    # x1^2 (sum x_i^2) integrates like x1^2 on the sphere
    for exp in monomials(4):
        lhs = sum(
            (monomial_sphere_integral(tuple(e + 2 * (i == j) for j, e in enumerate(exp))).coefficient for i in range(4)),
            Fraction(0),
        )
        assert lhs == monomial_sphere_integral(exp).coefficient


def test_x1_squared_decomposition():
    f = SphericalField.from_poly(x1 * x1)
    assert set(f.components) == {0, 2}
    assert f.components[0] == Poly4.constant(Fraction(1, 4))
    assert f.components[2] == x1 * x1 * Fraction(3, 4) - (x2 * x2 + x3 * x3 + x4 * x4) * Fraction(1, 4)


poly_strategy = st.dictionaries(
    st.tuples(*[st.integers(0, 3)] * 4),
    st.fractions(min_value=-5, max_value=5, max_denominator=7),
    max_size=5,
).map(Poly4)


@settings(max_examples=30, deadline=None)
@given(poly_strategy, st.lists(st.fractions(-3, 3, max_denominator=5), min_size=3, max_size=3))
def test_decomposition_agrees_on_sphere(p, u):
    f = harmonic_decompose(p)
    for d, h in f.components.items():
        assert h.is_homogeneous() and (h.is_zero() or h.degree == d)
        assert laplacian4(h).is_zero()
    x = rational_sphere_point(u)
    assert f.evaluate(x) == p.evaluate(x)


@settings(max_examples=20, deadline=None)
@given(poly_strategy)
def test_pseudo_inverse_inverts_off_constants(p):
    f = harmonic_decompose(p)
    g = pseudo_inverse_laplacian(neg_sphere_laplacian(f))
    assert g == f - SphericalField.constant(f.mean())


@settings(max_examples=20, deadline=None)
@given(poly_strategy, poly_strategy)
def test_multiplication_matches_polynomial_product(p, q):
    if p.degree + q.degree > 12:
        return
    f, g = harmonic_decompose(p), harmonic_decompose(q)
    assert field_multiply(f, g) == harmonic_decompose(p * q)
    assert inner_product(f, g).coefficient == (f * g).mean()


def test_degree_cap():
    with pytest.raises(DegreeCapError):
        harmonic_decompose(x1**7, cap=6)


def test_harmonic_field_rejected_when_not_harmonic():
    with pytest.raises(ValueError):
        SphericalField({2: x1 * x1})


@pytest.mark.parametrize("n", range(0, 6))
def test_harmonic_basis(n):
    basis = harmonic_basis(n)
    assert len(basis) == (n + 1) ** 2
    assert all(laplacian4(p).is_zero() for p in basis)
    assert leading_minors_positive(basis.gram)
    for p in basis:
        assert basis.coordinates(p, check=True).count(1) == 1


def test_gram_degree_one():
    assert gram_matrix(list(harmonic_basis(1))) == [[Fraction(int(i == j), 4) for j in range(4)] for i in range(4)]


def test_distinct_degrees_orthogonal():
    f = SphericalField.from_poly(x1 * x2 * x3 + x4)
    g = SphericalField.from_poly(x1 * x1 - x2 * x2)
    assert inner_product(f, g).coefficient == 0
