"""Degree blocks of the Dirac operator on generalized Berger spheres.

On the sphere with metric ``sum_j a_j^2 K^j (x) K^j`` the Dirac operator is

    W = -i sum_j (1/a_j) s^j (L+)_j + nu I,   nu = (a1^2 + a2^2 + a3^2) / (2 a1 a2 a3),

and it preserves the space of spinors whose two components are degree-n
harmonic polynomials.  A :class:`DegreeBlock` stores the coordinate matrix of
``W - nu I`` on that space (exact over Q(i) when the parameters are rational)
together with the Gram matrix of the basis.  The basis is not orthonormalised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Sequence

import numpy as np
import scipy.linalg
from sympy import Poly, QQ, Symbol
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .killing import FrameSign, apply_L_poly
from .polyfield import harmonic_basis

MU = Symbol("mu")
DEFAULT_CLUSTER_TOL = 1e-8
MAX_CHARPOLY_DEGREE = 4

# -i s^j for the Pauli matrices s^1, s^2, s^3, entries as (re, im)
_MINUS_I_PAULI = (
    (((0, 0), (0, -1)), ((0, -1), (0, 0))),
    (((0, 0), (-1, 0)), ((1, 0), (0, 0))),
    (((0, -1), (0, 0)), ((0, 0), (0, 1))),
)


class SolverError(RuntimeError):
    """Eigensolver failure or an inconsistent numerical spectrum."""


class IdentityMismatchError(AssertionError):
    pass


@dataclass(frozen=True)
class BergerParams:
    a1: object
    a2: object
    a3: object

    def __post_init__(self):
        vals = []
        for v in (self.a1, self.a2, self.a3):
            if isinstance(v, (int, Rational)) and not isinstance(v, bool):
                v = Fraction(v)
            elif isinstance(v, float):
                pass
            else:
                raise TypeError(f"parameter {v!r} must be rational or float")
            if not v > 0:
                raise ValueError(f"Berger parameters must be positive, got {v}")
            vals.append(v)
        object.__setattr__(self, "a1", vals[0])
        object.__setattr__(self, "a2", vals[1])
        object.__setattr__(self, "a3", vals[2])

    @classmethod
    def of(cls, values) -> BergerParams:
        if isinstance(values, BergerParams):
            return values
        vals = list(values)
        if len(vals) != 3:
            raise ValueError("expected three parameters")
        return cls(*vals)

    @classmethod
    def parse(cls, text: str) -> BergerParams:
        """Parse ``"r,r,r"``; rational-looking entries are kept exact."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3 or not all(parts):
            raise ValueError(f"expected three comma-separated values, got {text!r}")
        vals = []
        for p in parts:
            try:
                vals.append(Fraction(p))
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"not a number: {p!r}") from None
        return cls(*vals)

    @property
    def values(self) -> tuple:
        return (self.a1, self.a2, self.a3)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.values)

    @property
    def inverses(self) -> tuple:
        return tuple(1 / v for v in self.values)

    def __iter__(self):
        return iter(self.values)


UNIT = BergerParams(1, 1, 1)


@dataclass(frozen=True)
class SpectrumEntry:
    eigenvalue: float
    multiplicity: int
    degree: int


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with multiplicities, sorted ascending, tagged by degree block.

    ``certified_radius`` (``full_spectrum`` only): every eigenvalue of the full
    operator with modulus below it appears in ``entries``.
    """

    entries: tuple[SpectrumEntry, ...]
    certified_radius: float | None = None

    @property
    def dimension(self) -> int:
        return sum(e.multiplicity for e in self.entries)

    def shifted(self, nu: float) -> Spectrum:
        return Spectrum(
            tuple(SpectrumEntry(e.eigenvalue + nu, e.multiplicity, e.degree) for e in self.entries),
            self.certified_radius,
        )

    def pairs(self, tol: float = DEFAULT_CLUSTER_TOL) -> list[tuple[float, int]]:
        """Merged ``(eigenvalue, multiplicity)`` list across degree blocks."""
        out: list[list] = []
        for e in sorted(self.entries, key=lambda e: e.eigenvalue):
            if out and abs(e.eigenvalue - out[-1][0]) <= tol * max(1.0, abs(e.eigenvalue)):
                out[-1][1] += e.multiplicity
            else:
                out.append([e.eigenvalue, e.multiplicity])
        return [(v, m) for v, m in out]

    def to_json(self, digits: int = 12) -> list[dict]:
        return [
            {"eigenvalue": _decimal(e.eigenvalue, digits), "multiplicity": e.multiplicity, "degree": e.degree}
            for e in self.entries
        ]


def _decimal(x: float, digits: int) -> str:
    s = f"{x:.{digits}g}"
    return "0" if s in ("-0", "0") else s


@dataclass(frozen=True)
class DegreeBlock:
    """The operator ``W - nu I`` on degree-n harmonic spinors.

    Basis element ``c * d + i`` is the spinor with the i-th scalar basis
    polynomial in component ``c`` (``d`` = scalar basis size).  ``matrix`` is
    the coordinate matrix ``A`` (so ``W~ phi_b = sum_a A[a, b] phi_a``); the
    Hermitian form ``gram @ matrix`` makes ``(gram @ matrix, gram)`` a
    symmetric-definite pencil.
    """

    degree: int
    params: BergerParams
    basis: tuple[tuple[int, int], ...]
    matrix: np.ndarray
    gram: np.ndarray
    exact_matrix: DomainMatrix | None = field(default=None, repr=False, compare=False)
    exact_gram: DomainMatrix | None = field(default=None, repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def hermitian_form(self) -> np.ndarray:
        return self.gram @ self.matrix


def _qq(x: Fraction):
    return QQ(x.numerator, x.denominator)


@lru_cache(maxsize=None)
def frame_matrices(n: int, sign: FrameSign = FrameSign.PLUS) -> tuple[tuple[tuple[Fraction, ...], ...], ...]:
    """Exact coordinate matrices of ``(L_sign)_j``, j = 1..3, on the degree-n basis."""
    basis = harmonic_basis(n)
    mats = []
    for j in (1, 2, 3):
        cols = [basis.coordinates(apply_L_poly(sign, j, p)) for p in basis.polys]
        d = len(basis)
        mats.append(tuple(tuple(cols[b][a] for b in range(d)) for a in range(d)))
    return tuple(mats)


@lru_cache(maxsize=None)
def _float_frames(n: int) -> tuple[np.ndarray, np.ndarray]:
    L = np.array([[[float(x) for x in row] for row in m] for m in frame_matrices(n)])
    G = np.array([[float(x) for x in row] for row in harmonic_basis(n).gram])
    return L, G


def _pauli_float(j: int) -> np.ndarray:
    return np.array([[complex(*e) for e in row] for row in _MINUS_I_PAULI[j]])


def _exact_block(n: int, b: Sequence[Fraction]) -> tuple[DomainMatrix, DomainMatrix]:
    Ls = frame_matrices(n)
    d = len(harmonic_basis(n))
    N = 2 * d
    rows = [[QQ_I.zero] * N for _ in range(N)]
    for j in range(3):
        bj = b[j]
        L = Ls[j]
        for c in range(2):
            for c2 in range(2):
                re, im = _MINUS_I_PAULI[j][c][c2]
                if not (re or im):
                    continue
                for a in range(d):
                    row = rows[c * d + a]
                    La = L[a]
                    for bb in range(d):
                        v = La[bb]
                        if v:
                            w = v * bj
                            row[c2 * d + bb] += QQ_I(_qq(w * re), _qq(w * im))
    A = DomainMatrix(rows, (N, N), QQ_I)
    gram = harmonic_basis(n).gram
    grows = [[QQ.zero] * N for _ in range(N)]
    for c in range(2):
        for a in range(d):
            for bb in range(d):
                grows[c * d + a][c * d + bb] = _qq(gram[a][bb])
    return A, DomainMatrix(grows, (N, N), QQ)


def assemble_block(params, n: int) -> DegreeBlock:
    """Assemble ``W - nu I`` on degree-n harmonic spinors (dimension 2(n+1)^2)."""
    params = BergerParams.of(params)
    if n < 0:
        raise ValueError("degree must be non-negative")
    L, G = _float_frames(n)
    d = G.shape[0]
    b = params.inverses
    A = np.zeros((2 * d, 2 * d), dtype=complex)
    for j in range(3):
        A += float(b[j]) * np.kron(_pauli_float(j), L[j])
    gram = np.kron(np.eye(2), G)
    basis = tuple((c, i) for c in range(2) for i in range(d))
    exact_A = exact_G = None
    if params.is_exact:
        exact_A, exact_G = _exact_block(n, b)
    return DegreeBlock(n, params, basis, A, gram, exact_A, exact_G)


def cluster_eigenvalues(values: Sequence[float], tol: float) -> list[tuple[float, int]]:
    out: list[list] = []
    for v in sorted(values):
        if out and abs(v - out[-1][-1]) <= tol * max(1.0, abs(v)):
            out[-1][0].append(v)
            out[-1][-1] = v
        else:
            out.append([[v], v])
    return [(float(np.mean(vs)), len(vs)) for vs, _ in out]


def block_spectrum(block: DegreeBlock, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> Spectrum:
    """Eigenvalues of ``W - nu I`` on the block, clustered into multiplicities."""
    if not cluster_tol > 0:
        raise ValueError("cluster_tol must be positive")
    H = block.hermitian_form
    H = (H + H.conj().T) / 2
    try:
        vals = scipy.linalg.eigh(H, block.gram, eigvals_only=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"eigensolver failed on degree {block.degree}: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise SolverError(f"non-finite eigenvalues on degree {block.degree}")
    clusters = cluster_eigenvalues(vals, cluster_tol)
    odd = [(v, m) for v, m in clusters if m % 2]
    if odd:
        raise SolverError(
            f"odd multiplicity {odd[0][1]} near {odd[0][0]:.12g} on degree {block.degree}; "
            "adjust cluster_tol"
        )
    return Spectrum(tuple(SpectrumEntry(v, m, block.degree) for v, m in clusters))


def nu_value(params) -> object:
    a1, a2, a3 = BergerParams.of(params).values
    return (a1 * a1 + a2 * a2 + a3 * a3) / (2 * a1 * a2 * a3)


def _certified_radius(params: BergerParams, n_max: int) -> float:
    # Weyl bound against beta * (unit-sphere operator): on degree n the unit
    # block has |lambda| >= min(beta n + nu, beta (n+2) - nu) and each
    # -i s^j L_j has norm n, so the perturbation costs at most n sum|b_j - beta|.
    b = sorted(float(x) for x in params.inverses)
    beta = b[1]
    spread = sum(abs(x - beta) for x in b)
    nu = float(nu_value(params))
    slope = beta - spread
    n = n_max + 1
    bound = min(beta * n + nu, beta * (n + 2) - nu) - n * spread
    if slope <= 0:
        return 0.0
    return max(bound, 0.0)


def full_spectrum(params, n_max: int, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> Spectrum:
    """Spectrum of W from the blocks of degree 0..n_max, shifted by nu."""
    params = BergerParams.of(params)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    nu = float(nu_value(params))
    entries: list[SpectrumEntry] = []
    for n in range(n_max + 1):
        entries.extend(block_spectrum(assemble_block(params, n), cluster_tol).shifted(nu).entries)
    entries.sort(key=lambda e: (e.eigenvalue, e.degree))
    return Spectrum(tuple(entries), _certified_radius(params, n_max))


def _rational_coeffs(coeffs) -> list[Fraction]:
    out = []
    for c in coeffs:
        if c.y != 0:
            raise IdentityMismatchError("characteristic polynomial has a non-real coefficient")
        out.append(Fraction(int(c.x.numerator), int(c.x.denominator)))
    return out


def block_charpoly(params, n: int) -> Poly:
    """Exact characteristic polynomial ``det(mu I - A)`` of the degree-n block, n <= 4."""
    params = BergerParams.of(params)
    if n > MAX_CHARPOLY_DEGREE:
        raise ValueError(f"exact characteristic polynomials are limited to degree <= {MAX_CHARPOLY_DEGREE}")
    if n < 0:
        raise ValueError("degree must be non-negative")
    if not params.is_exact:
        raise TypeError("exact characteristic polynomial needs rational parameters")
    A, _ = _exact_block(n, params.inverses)
    coeffs = _rational_coeffs(A.charpoly())
    return Poly([QQ(c.numerator, c.denominator) for c in coeffs], MU, domain=QQ)


def exact_trace(params, n: int) -> Fraction:
    params = BergerParams.of(params)
    A, _ = _exact_block(n, params.inverses)
    rows = A.to_dense().to_list()
    t = sum((rows[i][i] for i in range(len(rows))), QQ_I(0, 0))
    if t.y != 0:
        raise IdentityMismatchError("non-real trace")
    return Fraction(int(t.x.numerator), int(t.x.denominator))


def _identity(N: int, scale=1) -> DomainMatrix:
    return (DomainMatrix.eye(N, QQ_I) * QQ_I(scale, 0)).to_dense()


def same_matrix(a: DomainMatrix, b: DomainMatrix) -> bool:
    """Exact equality regardless of sparse/dense storage."""
    return a.shape == b.shape and a.to_dense().to_list() == b.to_dense().to_list()


def verify_square_identity(n: int) -> bool:
    """Check ``(W0 - I/2)^2 = (-Delta + 1) I`` on the degree-n block at unit params.

    With nu = 3/2 the block matrix A satisfies ``W0 - I/2 = A + I``.
    """
    A, G = _exact_block(n, UNIT.inverses)
    N = A.shape[0]
    lhs = (A + _identity(N)) ** 2
    ok = same_matrix(lhs, _identity(N, n * (n + 2) + 1))
    # the same statement for the Hermitian form: (A+I)^H G (A+I) = G (n+1)^2
    Gc = G.convert_to(QQ_I)
    S = Gc * (A + _identity(N))
    return ok and same_matrix(S * (A + _identity(N)), Gc * QQ_I(n * (n + 2) + 1, 0))


def resolvent_Q(n: int) -> DomainMatrix:
    """``Q = (-Delta)^{-1} (W0 + I/2)`` on the degree-n block, checked exactly.

    Q must equal the pseudoinverse of ``W0 - 3/2 I`` on the block; on n >= 1
    the 3/2-eigenspace is absent, so that is the ordinary inverse of A.
    """
    if n < 1:
        raise ValueError("the pseudoinverse relation is only meaningful for degree >= 1")
    A, _ = _exact_block(n, UNIT.inverses)
    N = A.shape[0]
    Q = (A + _identity(N, 2)) * QQ_I(QQ(1, n * (n + 2)), 0)
    inv = A.inv()
    if not same_matrix(Q, inv):
        raise IdentityMismatchError(f"resolvent relation fails on degree {n}")
    return Q


def degree_block_matrix(n: int, params=UNIT) -> DomainMatrix:
    return _exact_block(n, BergerParams.of(params).inverses)[0]


__all__ = [
    "BergerParams",
    "DegreeBlock",
    "MU",
    "SolverError",
    "Spectrum",
    "SpectrumEntry",
    "assemble_block",
    "block_charpoly",
    "block_spectrum",
    "full_spectrum",
    "nu_value",
    "resolvent_Q",
    "verify_square_identity",
]
