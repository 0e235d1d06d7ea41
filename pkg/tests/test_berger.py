import random
from fractions import Fraction

import pytest
from sympy import Poly, QQ

from s3dirac.berger import (
    BergerCurve,
    build_formula,
    charpoly_formula,
    closed_low_eigs,
    curve_expansion,
    fd_sweep,
    neville_zero,
    nu,
    volume,
    volume_density_matches,
)
from s3dirac.dirac import MU, BergerParams, block_charpoly

from conftest import rational_triple

SHEAR = "1+eps,1-eps,1/(1-eps^2)"


def test_nu_examples():
    assert nu((1, 1, 1)) == Fraction(3, 2)
    assert nu((2, 1, 1)) == Fraction(3, 2)
    assert nu((1, 1, 2)) == Fraction(3, 2)


def test_closed_low_eigs():
    assert closed_low_eigs((1, 1, 1)) == (Fraction(-3, 2), Fraction(5, 2), Fraction(5, 2), Fraction(5, 2))
    assert closed_low_eigs((2, 1, 1)) == (-1, 3, 2, 2)


def test_lowest_negative_near_unit(rng):
    for _ in range(10):
        p = tuple(1 + Fraction(rng.randint(-5, 5), 100) for _ in range(3))
        negatives = [v for v in closed_low_eigs(p) if v < 0]
        assert negatives == [closed_low_eigs(p)[0]]


def test_volume_density(rng):
    for _ in range(10):
        p = BergerParams(*rational_triple(rng))
        u = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(3)]
        assert volume_density_matches(p, u)
    assert volume((2, 3, Fraction(1, 6))) == 1


@pytest.mark.parametrize("n", range(5))
def test_formula_mu_degree(n):
    assert build_formula(n).mu_degree == 2 * (n + 1) ** 2


def test_formula_examples():
    assert charpoly_formula(0, (3, 2, 1)) == Poly(MU**2, MU, domain=QQ)
    assert charpoly_formula(2, (1, 1, 1)) == Poly((MU**3 - 12 * MU + 16) ** 6, MU, domain=QQ)
    q = MU**5 - 60 * MU**3 + 80 * MU**2 + 960 * MU - 2304
    assert charpoly_formula(4, (1, 1, 1)) == Poly(q**10, MU, domain=QQ)
    assert Poly(q, MU) == Poly((MU - 4) ** 3 * (MU + 6) ** 2, MU)
    with pytest.raises(ValueError):
        build_formula(5)
    with pytest.raises(ValueError):
        build_formula(1, "guessed")


def test_printed_low_degrees_match_oracle():
    rng = random.Random(99)
    for _ in range(3):
        p = BergerParams(*rational_triple(rng))
        for n in (0, 1, 2):
            assert charpoly_formula(n, p) == block_charpoly(p, n)


def test_degree_three_readings():
    p = BergerParams(Fraction(3, 2), Fraction(2, 3), Fraction(5, 7))
    assert charpoly_formula(3, (1, 1, 1), "printed") != block_charpoly((1, 1, 1), 3)
    assert charpoly_formula(3, (1, 1, 1), "printed", "unordered") != block_charpoly((1, 1, 1), 3)
    assert charpoly_formula(3, p, "corrected") == block_charpoly(p, 3)
    # unit params: roots 3 (20) and -5 (12)
    assert block_charpoly((1, 1, 1), 3) == Poly((MU - 3) ** 20 * (MU + 5) ** 12, MU, domain=QQ)


def test_degree_four_pair_readings():
    assert charpoly_formula(4, (1, 1, 1), "printed", "unordered") != block_charpoly((1, 1, 1), 4)


def test_curve_parsing():
    c = BergerCurve.from_expressions(SHEAR)
    assert c.coeffs[2][:5] == (1, 0, 1, 0, 1)
    assert c.derivatives == (1, -1, 0)
    assert c.params_at(Fraction(1, 10)).values == (Fraction(11, 10), Fraction(9, 10), 1 / (1 - Fraction(1, 100)))
    truncated = BergerCurve(c.coeffs)
    assert truncated.params_at(Fraction(1, 10)).a3 == Fraction(1010101, 1000000)
    assert BergerCurve.from_expressions("sqrt(1+e),1,1").params_at(Fraction(1, 2)).a1 == pytest.approx(1.5**0.5)
    with pytest.raises(ValueError):
        BergerCurve.from_expressions("1+eps,1-eps")
    with pytest.raises(ValueError):
        BergerCurve.from_expressions("2+eps,1,1")
    with pytest.raises(ValueError):
        BergerCurve.from_expressions("1+t,1,1")


def test_curve_expansion_examples():
    ex = curve_expansion(BergerCurve.from_expressions("1+e,1-e,1/((1+e)*(1-e))"))
    assert ex.order1 == (0, 0) and ex.order2 == (2, 1)
    c = Fraction(2, 3)
    ex = curve_expansion(BergerCurve.linear((c / 2, c / 2, c / 2)))
    assert ex.order1 == (-3 * c / 4, 3 * c / 4)
    assert ex.order2 is None and "volume" in ex.diagnostic
    ex = curve_expansion(BergerCurve(((1,), (1,), (1,))))
    assert ex.order1 == (0, 0) and ex.order2 == (0, 0)


def test_order1_antisymmetric(rng):
    for _ in range(10):
        d = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3)]
        ex = curve_expansion(BergerCurve.linear(d))
        assert ex.order1[0] == -ex.order1[1] == -sum(d) / 2


def test_order2_general_shear(rng):
    # a = (1+u e, 1+v e, 1/((1+u e)(1+v e))): lambda2 = (sum a'^2, sum a'^2 / 2)
    for _ in range(5):
        u, v = Fraction(rng.randint(-6, 6), 3), Fraction(rng.randint(-6, 6), 3)
        c = BergerCurve.from_expressions(f"1+({u})*e,1+({v})*e,1/((1+({u})*e)*(1+({v})*e))")
        s = u * u + v * v + (u + v) ** 2
        assert curve_expansion(c).order2 == (s, s / 2)


def test_neville():
    # exact for a quadratic in h^2
    xs = [0.04, 0.01, 0.0025]
    assert neville_zero(xs, [3 + 2 * x - x * x for x in xs]) == pytest.approx(3)


def test_sweep_shear():
    r = fd_sweep(BergerCurve.from_expressions(SHEAR))
    zero = [row for row in r.rows if row.eps == 0][0]
    assert abs(zero.lambda_plus - 1.5) < 1e-12 and abs(zero.lambda_minus + 1.5) < 1e-12
    assert r.fit(2, "plus").fitted == pytest.approx(2, abs=1e-4)
    assert r.fit(2, "minus").fitted == pytest.approx(1, abs=1e-4)
    assert r.verdict()["status"] == "pass"
    lines = r.to_csv().splitlines()
    assert lines[0] == "eps,lambda_plus,lambda_minus,fitted_order,analytic,residual"
    assert len(lines) == 1 + 7 + 4


@pytest.mark.parametrize("c", [Fraction(1), Fraction(-2, 5)])
def test_sweep_conformal(c):
    r = fd_sweep(BergerCurve.linear((c / 2, c / 2, c / 2)))
    assert r.fit(1, "plus").fitted == pytest.approx(float(-3 * c / 4), abs=1e-6)
    assert r.fit(1, "minus").fitted == pytest.approx(float(3 * c / 4), abs=1e-6)
    assert r.fit(2, "plus").analytic is None
    assert r.verdict()["status"] == "pass"


def test_sweep_input_checks():
    c = BergerCurve.from_expressions(SHEAR)
    with pytest.raises(ValueError):
        fd_sweep(c, [Fraction(1, 100)])
    with pytest.raises(ValueError):
        fd_sweep(c, [Fraction(1, 5), Fraction(-1, 5)])
