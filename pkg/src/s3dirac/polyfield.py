"""Exact polynomial algebra in four ambient variables and scalar fields on S^3.

Polynomials carry :class:`fractions.Fraction` coefficients.  A scalar field on
the unit sphere is stored in its canonical harmonic form: a finite sum of
homogeneous harmonic polynomials, one per degree.  Sphere integrals are
returned as rational multiples of the volume ``2*pi**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from sympy import Poly, QQ, symbols
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)
from sympy.polys.matrices import DomainMatrix

Exponent = tuple[int, int, int, int]

DEFAULT_DEGREE_CAP = 12
VARIABLES = ("x1", "x2", "x3", "x4")
_SYMBOLS = symbols(" ".join(VARIABLES))


class PolynomialSyntaxError(ValueError):
    """Raised when polynomial text cannot be parsed."""


class DegreeCapError(ArithmeticError):
    """Raised when a field operation would exceed the configured degree cap."""


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating point coefficients are not allowed in exact algebra")
    return Fraction(value)


def _gradlex_key(exp: Exponent):
    return (-sum(exp), tuple(-e for e in exp))


def monomials(degree: int) -> list[Exponent]:
    """All exponent tuples of total ``degree``, in graded-lex (descending) order."""
    out = []
    for a in range(degree, -1, -1):
        for b in range(degree - a, -1, -1):
            for c in range(degree - a - b, -1, -1):
                out.append((a, b, c, degree - a - b - c))
    return out


class Poly4:
    """Polynomial in ``x1..x4`` with exact rational coefficients.

    Instances are immutable.  Zero coefficients are never stored.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, object] | None = None):
        clean: dict[Exponent, Fraction] = {}
        if terms:
            for exp, c in terms.items():
                c = _frac(c)
                if c:
                    if len(exp) != 4 or any(e < 0 for e in exp):
                        raise ValueError(f"bad exponent {exp!r}")
                    clean[tuple(exp)] = c
        self._terms = clean
        self._hash = None

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, c) -> Poly4:
        return cls({(0, 0, 0, 0): c})

    @classmethod
    def variable(cls, index: int) -> Poly4:
        """The coordinate ``x<index>`` (1-based)."""
        exp = [0, 0, 0, 0]
        exp[index - 1] = 1
        return cls({tuple(exp): 1})

    @classmethod
    def monomial(cls, exp: Exponent, coeff=1) -> Poly4:
        return cls({tuple(exp): coeff})

    @classmethod
    def parse(cls, text: str) -> Poly4:
        """Parse text such as ``"3/2*x1^2*x4 - x2*x3"``."""
        local = dict(zip(VARIABLES, _SYMBOLS))
        try:
            expr = parse_expr(
                text,
                local_dict=local,
                transformations=standard_transformations + (convert_xor,),
            )
            poly = Poly(expr, *_SYMBOLS, domain=QQ)
        except Exception as exc:  # sympy raises a zoo of exception types here
            raise PolynomialSyntaxError(f"cannot parse polynomial {text!r}: {exc}") from None
        terms = {}
        for exp, c in poly.terms():
            terms[tuple(int(e) for e in exp)] = Fraction(int(c.numerator), int(c.denominator))
        return cls(terms)

    # inspection -----------------------------------------------------------

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: _gradlex_key(kv[0]))

    def coefficient(self, exp: Exponent) -> Fraction:
        return self._terms.get(tuple(exp), Fraction(0))

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def homogeneous_parts(self) -> dict[int, Poly4]:
        parts: dict[int, dict] = {}
        for exp, c in self._terms.items():
            parts.setdefault(sum(exp), {})[exp] = c
        return {d: Poly4(t) for d, t in sorted(parts.items())}

    def evaluate(self, point: Sequence) -> object:
        total = 0
        for exp, c in self._terms.items():
            term = c
            for x, e in zip(point, exp):
                if e:
                    term = term * x**e
            total = total + term
        return total

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Poly4):
            other = Poly4.constant(other)
        terms = dict(self._terms)
        for exp, c in other._terms.items():
            terms[exp] = terms.get(exp, 0) + c
        return Poly4(terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly4({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly4):
            other = Poly4.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly4):
            c = _frac(other)
            return Poly4({e: v * c for e, v in self._terms.items()})
        out: dict[Exponent, Fraction] = {}
        for (a0, a1, a2, a3), ca in self._terms.items():
            for (b0, b1, b2, b3), cb in other._terms.items():
                key = (a0 + b0, a1 + b1, a2 + b2, a3 + b3)
                out[key] = out.get(key, 0) + ca * cb
        return Poly4(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = Poly4.constant(1)
        for _ in range(k):
            result = result * self
        return result

    def derivative(self, index: int) -> Poly4:
        """Partial derivative in ``x<index>`` (1-based)."""
        i = index - 1
        out = {}
        for exp, c in self._terms.items():
            if exp[i]:
                new = list(exp)
                new[i] -= 1
                out[tuple(new)] = c * exp[i]
        return Poly4(out)

    # comparison / display -------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Poly4):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == Poly4.constant(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly4({format_poly(self)!r})"


def format_poly(p: Poly4) -> str:
    """Deterministic text form, graded-lex order, e.g. ``3/2*x1^2*x4 - x2*x3``."""
    if p.is_zero():
        return "0"
    pieces = []
    for exp, c in p.items():
        factors = []
        for name, e in zip(VARIABLES, exp):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = f"{mag}*" + "*".join(factors)
        sign = "-" if c < 0 else "+"
        pieces.append((sign, body))
    first_sign, first_body = pieces[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


R2 = Poly4({(2, 0, 0, 0): 1, (0, 2, 0, 0): 1, (0, 0, 2, 0): 1, (0, 0, 0, 2): 1})


@lru_cache(maxsize=None)
def _r2_power(k: int) -> Poly4:
    return R2**k


def laplacian4(p: Poly4) -> Poly4:
    """Flat Laplacian in R^4."""
    out: dict[Exponent, Fraction] = {}
    for exp, c in p._terms.items():
        for i in range(4):
            e = exp[i]
            if e >= 2:
                new = list(exp)
                new[i] -= 2
                key = tuple(new)
                out[key] = out.get(key, 0) + c * e * (e - 1)
    return Poly4(out)


# ---------------------------------------------------------------------------
# sphere integration


@dataclass(frozen=True)
class SphereIntegral:
    """An integral over the unit S^3, stored as ``coefficient * 2*pi**2``."""

    coefficient: Fraction

    @property
    def value(self) -> float:
        return float(self.coefficient) * 2 * math.pi**2

    def __add__(self, other: SphereIntegral) -> SphereIntegral:
        return SphereIntegral(self.coefficient + other.coefficient)

    def __mul__(self, c) -> SphereIntegral:
        return SphereIntegral(self.coefficient * _frac(c))

    __rmul__ = __mul__

    def __str__(self):
        return f"{self.coefficient}*2pi^2"


@lru_cache(maxsize=None)
def _moment(exp: Exponent) -> Fraction:
    if any(e % 2 for e in exp):
        return Fraction(0)
    # Gamma-function closed form for even moments, normalised by 2*pi^2:
    # prod[(2k)! / (4^k k!)] / (K+1)!
    ks = [e // 2 for e in exp]
    num = Fraction(1)
    for k in ks:
        num *= Fraction(math.factorial(2 * k), 4**k * math.factorial(k))
    return num / math.factorial(sum(ks) + 1)


def monomial_sphere_integral(exp: Sequence[int]) -> SphereIntegral:
    """Exact integral of ``x^exp`` over the unit S^3."""
    return SphereIntegral(_moment(tuple(exp)))


def integrate_poly(p: Poly4) -> SphereIntegral:
    total = Fraction(0)
    for exp, c in p._terms.items():
        total += c * _moment(exp)
    return SphereIntegral(total)


# ---------------------------------------------------------------------------
# harmonic decomposition


def _fischer(p: Poly4, m: int) -> dict[int, Poly4]:
    # Writes a homogeneous p of degree m as sum_j r^{2j} h_{m-2j} with h harmonic.
    # Uses Delta(r^{2j} h_k) = 4j(j+k+1) r^{2j-2} h_k in R^4, so the Fischer
    # parts of Delta p determine every h below the top degree.
    if p.is_zero():
        return {}
    if m < 2:
        return {m: p}
    below = _fischer(laplacian4(p), m - 2)
    parts: dict[int, Poly4] = {}
    top = p
    for deg, g in below.items():
        j = (m - deg) // 2
        h = g * Fraction(1, 4 * j * (m - j + 1))
        parts[deg] = h
        top = top - _r2_power(j) * h
    if top:
        parts[m] = top
    return parts


def harmonic_decompose(p: Poly4, cap: int = DEFAULT_DEGREE_CAP) -> SphericalField:
    """Canonical harmonic representative of ``p`` restricted to S^3."""
    if p.degree > cap:
        raise DegreeCapError(f"degree {p.degree} exceeds cap {cap}")
    comps: dict[int, Poly4] = {}
    for m, part in p.homogeneous_parts().items():
        for deg, h in _fischer(part, m).items():
            comps[deg] = comps[deg] + h if deg in comps else h
    return SphericalField(comps, _trusted=True)


class SphericalField:
    """Scalar field on S^3 as a sum of homogeneous harmonic polynomials.

    ``components`` maps degree ``n`` to a harmonic homogeneous polynomial of
    degree ``n``.  Build from an arbitrary polynomial with :meth:`from_poly`;
    the direct constructor validates its input.
    """

    __slots__ = ("_components",)

    def __init__(self, components: Mapping[int, Poly4] | None = None, *, _trusted: bool = False):
        comps = {}
        for deg, p in (components or {}).items():
            if p.is_zero():
                continue
            if not _trusted:
                if not p.is_homogeneous() or p.degree != deg:
                    raise ValueError(f"component of degree {deg} is not homogeneous of that degree")
                if not laplacian4(p).is_zero():
                    raise ValueError(f"component of degree {deg} is not harmonic")
            comps[deg] = p
        self._components = dict(sorted(comps.items()))

    @classmethod
    def from_poly(cls, p: Poly4 | str, cap: int = DEFAULT_DEGREE_CAP) -> SphericalField:
        if isinstance(p, str):
            p = Poly4.parse(p)
        return harmonic_decompose(p, cap)

    @classmethod
    def constant(cls, c) -> SphericalField:
        return cls({0: Poly4.constant(c)}, _trusted=True)

    @classmethod
    def zero(cls) -> SphericalField:
        return cls({}, _trusted=True)

    @property
    def components(self) -> dict[int, Poly4]:
        return dict(self._components)

    @property
    def degree(self) -> int:
        return max(self._components, default=-1)

    def is_zero(self) -> bool:
        return not self._components

    def to_poly(self) -> Poly4:
        total = Poly4()
        for p in self._components.values():
            total = total + p
        return total

    def mean(self) -> Fraction:
        """Average over S^3, i.e. the degree-0 component."""
        c = self._components.get(0)
        return c.coefficient((0, 0, 0, 0)) if c is not None else Fraction(0)

    def integral(self) -> SphereIntegral:
        return integrate_poly(self.to_poly())

    def evaluate(self, point: Sequence) -> object:
        return self.to_poly().evaluate(point)

    def map_components(self, fn) -> SphericalField:
        """Apply a degree-preserving map ``fn(degree, poly)`` componentwise."""
        return SphericalField({d: fn(d, p) for d, p in self._components.items()}, _trusted=True)

    def __add__(self, other):
        if not isinstance(other, SphericalField):
            other = SphericalField.constant(other)
        comps = dict(self._components)
        for d, p in other._components.items():
            comps[d] = comps[d] + p if d in comps else p
        return SphericalField(comps, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return self.map_components(lambda d, p: -p)

    def __sub__(self, other):
        if not isinstance(other, SphericalField):
            other = SphericalField.constant(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, SphericalField):
            return field_multiply(self, other)
        c = _frac(other)
        return self.map_components(lambda d, p: p * c)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, SphericalField):
            return self._components == other._components
        if isinstance(other, (int, Fraction)):
            return self == SphericalField.constant(other)
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._components.items()))

    def __repr__(self):
        inner = ", ".join(f"{d}: {format_poly(p)!r}" for d, p in self._components.items())
        return f"SphericalField({{{inner}}})"

    def __str__(self):
        return format_poly(self.to_poly())


def field_multiply(f: SphericalField, g: SphericalField, cap: int = DEFAULT_DEGREE_CAP) -> SphericalField:
    """Pointwise product on S^3, re-canonicalised."""
    if f.degree + g.degree > cap:
        raise DegreeCapError(f"product degree {f.degree + g.degree} exceeds cap {cap}")
    return harmonic_decompose(f.to_poly() * g.to_poly(), cap)


def inner_product(f: SphericalField, g: SphericalField) -> SphereIntegral:
    """L^2(S^3) inner product of two real fields."""
    return integrate_poly(f.to_poly() * g.to_poly())


def pseudo_inverse_laplacian(f: SphericalField) -> SphericalField:
    """Pseudoinverse of ``-Delta``: degree n is divided by n(n+2), constants are dropped."""
    return SphericalField(
        {d: p * Fraction(1, d * (d + 2)) for d, p in f.components.items() if d > 0},
        _trusted=True,
    )


def neg_sphere_laplacian(f: SphericalField) -> SphericalField:
    """``-Delta`` on S^3, acting on degree n as multiplication by n(n+2)."""
    return f.map_components(lambda d, p: p * (d * (d + 2)))


# ---------------------------------------------------------------------------
# harmonic bases


@dataclass(frozen=True)
class HarmonicBasis:
    """Basis of the degree-n harmonic homogeneous polynomials.

    Basis element ``i`` has coefficient 1 on ``free_monomials[i]`` and 0 on the
    other free monomials, so coordinates are read off directly.  ``gram`` holds
    the inner products in units of ``2*pi**2``.
    """

    degree: int
    polys: tuple[Poly4, ...]
    free_monomials: tuple[Exponent, ...]
    gram: tuple[tuple[Fraction, ...], ...]

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def coordinates(self, p: Poly4, check: bool = False) -> list[Fraction]:
        """Coordinates of a degree-n harmonic polynomial in this basis."""
        coords = [p.coefficient(e) for e in self.free_monomials]
        if check:
            rebuilt = Poly4()
            for c, b in zip(coords, self.polys):
                rebuilt = rebuilt + b * c
            if rebuilt != p:
                raise ValueError("polynomial is not in the span of this harmonic basis")
        return coords


def _to_qq(x: Fraction):
    return QQ(x.numerator, x.denominator)


def _from_qq(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def gram_matrix(polys: Sequence[Poly4]) -> list[list[Fraction]]:
    """Exact Gram matrix (units of 2*pi**2) via the monomial moment matrix."""
    mons = sorted({e for p in polys for e in p.terms}, key=_gradlex_key)
    if not mons:
        return [[Fraction(0)] * len(polys) for _ in polys]
    index = {e: i for i, e in enumerate(mons)}
    moments = [
        [_to_qq(_moment(tuple(a + b for a, b in zip(ea, eb)))) for eb in mons] for ea in mons
    ]
    coeffs = [[QQ.zero] * len(polys) for _ in mons]
    for j, p in enumerate(polys):
        for e, c in p.terms.items():
            coeffs[index[e]][j] = _to_qq(c)
    C = DomainMatrix(coeffs, (len(mons), len(polys)), QQ)
    Mom = DomainMatrix(moments, (len(mons), len(mons)), QQ)
    G = C.transpose() * Mom * C
    return [[_from_qq(x) for x in row] for row in G.to_list()]


@lru_cache(maxsize=None)
def harmonic_basis(n: int) -> HarmonicBasis:
    """Deterministic basis of degree-n harmonics, of size (n+1)^2, with Gram matrix."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    cols = monomials(n)
    if n < 2:
        polys = tuple(Poly4.monomial(e) for e in cols)
        free = tuple(cols)
    else:
        rows = monomials(n - 2)
        row_index = {e: i for i, e in enumerate(rows)}
        mat = [[QQ.zero] * len(cols) for _ in rows]
        for j, e in enumerate(cols):
            for exp, c in laplacian4(Poly4.monomial(e)).terms.items():
                mat[row_index[exp]][j] = _to_qq(c)
        rref, pivots = DomainMatrix(mat, (len(rows), len(cols)), QQ).rref()
        rref_rows = rref.to_list()
        pivot_set = set(pivots)
        free_cols = [j for j in range(len(cols)) if j not in pivot_set]
        polys_list = []
        for f in free_cols:
            terms = {cols[f]: Fraction(1)}
            for r, pc in enumerate(pivots):
                v = rref_rows[r][f]
                if v:
                    terms[cols[pc]] = -_from_qq(v)
            polys_list.append(Poly4(terms))
        polys = tuple(polys_list)
        free = tuple(cols[f] for f in free_cols)
    gram = tuple(tuple(row) for row in gram_matrix(polys))
    return HarmonicBasis(n, polys, free, gram)


def leading_minors_positive(mat: Sequence[Sequence[Fraction]]) -> bool:
    """Exact positive-definiteness test for a symmetric rational matrix.

    Gaussian elimination without pivoting; the pivots are ratios of
    consecutive leading principal minors.
    """
    a = [list(map(Fraction, row)) for row in mat]
    n = len(a)
    for i in range(n):
        for j in range(n):
            if a[i][j] != a[j][i]:
                return False
    for k in range(n):
        if a[k][k] <= 0:
            return False
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return True


def as_field(value) -> SphericalField:
    if isinstance(value, SphericalField):
        return value
    if isinstance(value, (Poly4, str)):
        return SphericalField.from_poly(value)
    return SphericalField.constant(value)


def sum_fields(fields: Iterable[SphericalField]) -> SphericalField:
    total = SphericalField.zero()
    for f in fields:
        total = total + f
    return total
