import random
from fractions import Fraction

import numpy as np
import pytest
from sympy import Poly, QQ

from s3dirac.dirac import (
    MU,
    BergerParams,
    SolverError,
    assemble_block,
    block_charpoly,
    block_spectrum,
    cluster_eigenvalues,
    exact_trace,
    full_spectrum,
    nu_value,
    resolvent_Q,
    verify_square_identity,
)
from s3dirac.dirac import _exact_block, same_matrix
from sympy.polys.domains import QQ_I

from conftest import rational_triple


def spec_pairs(params, n, shift=0.0):
    s = block_spectrum(assemble_block(params, n))
    return [(round(e.eigenvalue + shift, 9), e.multiplicity) for e in s.entries]


def test_degree_zero_block_vanishes():
    b = assemble_block((2, 1, 1), 0)
    assert b.dimension == 2
    assert np.allclose(b.matrix, 0)


def test_degree_one_unit():
    assert spec_pairs((1, 1, 1), 1) == [(-3.0, 2), (1.0, 6)]
    assert spec_pairs((1, 1, 1), 1, 1.5) == [(-1.5, 2), (2.5, 6)]


def test_degree_two_unit():
    assert spec_pairs((1, 1, 1), 2) == [(-4.0, 6), (2.0, 12)]
    assert assemble_block((Fraction(3, 2), 1, Fraction(2, 3)), 2).dimension == 18


def test_constant_spinors_carry_nu():
    p = BergerParams(Fraction(3), Fraction(1, 2), Fraction(5, 4))
    (v, m), = spec_pairs(p, 0, float(nu_value(p)))
    assert v == pytest.approx(float(nu_value(p))) and m == 2


def test_block_is_self_adjoint_exactly(rng):
    for n in (1, 2, 3):
        A, G = _exact_block(n, BergerParams(*rational_triple(rng)).inverses)
        Gc = G.convert_to(QQ_I)
        # G A must be Hermitian
        H = (Gc * A).to_dense().to_list()
        N = len(H)
        assert all(H[i][j].x == H[j][i].x and H[i][j].y == -H[j][i].y for i in range(N) for j in range(N))


def test_charpoly_examples():
    assert block_charpoly((1, 1, 1), 0) == Poly(MU**2, MU, domain=QQ)
    assert block_charpoly((1, 1, 1), 1) == Poly((MU + 3) ** 2 * (MU - 1) ** 6, MU, domain=QQ)
    assert block_charpoly((1, 1, 1), 4) == Poly((MU - 4) ** 30 * (MU + 6) ** 20, MU, domain=QQ)


def test_charpoly_rejections():
    with pytest.raises(ValueError):
        block_charpoly((1, 1, 1), 5)
    with pytest.raises(TypeError):
        block_charpoly((1.5, 1, 1), 1)


@pytest.mark.parametrize("n", range(0, 5))
def test_trace_matches_roots(n):
    p = BergerParams(*rational_triple(random.Random(n)))
    cp = block_charpoly(p, n)
    assert -cp.all_coeffs()[1] == exact_trace(p, n)


@pytest.mark.parametrize("n", range(0, 4))
def test_charpoly_roots_match_numerical(n):
    p = BergerParams(*rational_triple(random.Random(10 + n)))
    cp = block_charpoly(p, n)
    # power sums from Newton's identities against the numerical spectrum
    c = [float(x) for x in cp.all_coeffs()]
    c1 = c[1] if len(c) > 1 else 0.0
    c2 = c[2] if len(c) > 2 else 0.0
    spec = block_spectrum(assemble_block(p, n))
    flat = np.array([v for e in spec.entries for v in [e.eigenvalue] * e.multiplicity])
    assert flat.sum() == pytest.approx(-c1, abs=1e-9)
    assert (flat**2).sum() == pytest.approx(c1 * c1 - 2 * c2, rel=1e-10)


def test_twenty_random_nu_present(rng):
    for _ in range(20):
        p = BergerParams(*rational_triple(rng))
        assert block_charpoly(p, 0) == Poly(MU**2, MU, domain=QQ)


@pytest.mark.parametrize("n,value", [(0, 1), (1, 4), (3, 16)])
def test_square_identity(n, value):
    assert verify_square_identity(n)
    A, _ = _exact_block(n, BergerParams(1, 1, 1).inverses)
    sq = (A + A.eye(A.shape[0], QQ_I)) ** 2
    assert same_matrix(sq, A.eye(A.shape[0], QQ_I) * QQ_I(value, 0))


def test_resolvent_degree_one_eigenvalues():
    Q = resolvent_Q(1)
    vals = np.linalg.eigvals(np.array([[complex(float(z.x), float(z.y)) for z in row] for row in Q.to_dense().to_list()]))
    assert np.allclose(sorted(vals.real), [-1 / 3] * 2 + [1.0] * 6)
    assert np.allclose(vals.imag, 0)
    with pytest.raises(ValueError):
        resolvent_Q(0)


def test_full_spectrum_unit():
    s = full_spectrum((1, 1, 1), 2)
    assert [(round(v, 9), m) for v, m in s.pairs()] == [(-2.5, 6), (-1.5, 2), (1.5, 2), (2.5, 6), (3.5, 12)]
    assert s.certified_radius == pytest.approx(3.5)


def test_full_spectrum_211():
    pairs = dict((round(v, 9), m) for v, m in full_spectrum((2, 1, 1), 1).pairs())
    assert pairs.get(1.5, 0) >= 2


def test_unit_spectrum_symmetric_except_pattern():
    s = dict((round(v, 9), m) for v, m in full_spectrum((1, 1, 1), 4).pairs())
    for k in range(1, 5):
        assert s[k + 0.5] == s[-(k + 0.5)] == k * (k + 1)


def test_certified_radius_is_valid(rng):
    for _ in range(5):
        p = BergerParams(*(float(x) for x in rational_triple(rng, 10, 14)))
        R = full_spectrum(p, 2).certified_radius
        nxt = [abs(e.eigenvalue) for n in (3, 4, 5) for e in block_spectrum(assemble_block(p, n)).shifted(float(nu_value(p))).entries]
        assert R > 0
        assert min(nxt) >= R - 1e-9


def test_frame_norm_bound():
    # each -i s^j L_j has operator norm n on degree n, the input of the radius bound
    for n in (1, 2, 3):
        for j in range(3):
            b = [Fraction(0)] * 3
            b[j] = Fraction(1)
            A, G = _exact_block(n, b)
            M = np.array([[complex(float(z.x), float(z.y)) for z in row] for row in A.to_dense().to_list()])
            vals = np.linalg.eigvals(M)
            assert max(abs(vals)) == pytest.approx(n)


def test_cluster_and_errors():
    assert [m for _, m in cluster_eigenvalues([1.0, 1.0 + 1e-12, 2.0], 1e-8)] == [2, 1]
    with pytest.raises(ValueError):
        BergerParams(1, 0, 1)
    with pytest.raises(ValueError):
        block_spectrum(assemble_block((1, 1, 1), 1), 0)



def test_odd_cluster_is_an_error(monkeypatch):
    import scipy.linalg

    monkeypatch.setattr(scipy.linalg, "eigh", lambda *a, **k: np.array([-3.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]))
    with pytest.raises(SolverError):
        block_spectrum(assemble_block((1, 1, 1), 1))


def test_nan_is_an_error(monkeypatch):
    import scipy.linalg

    monkeypatch.setattr(scipy.linalg, "eigh", lambda *a, **k: np.full(8, np.nan))
    with pytest.raises(SolverError):
        block_spectrum(assemble_block((1, 1, 1), 1))


def test_spectrum_json_deterministic():
    a = full_spectrum((1, 1, 1), 1).to_json()
    b = full_spectrum((1, 1, 1), 1).to_json()
    assert a == b
    assert a[0] == {"eigenvalue": "-1.5", "multiplicity": 2, "degree": 1}
