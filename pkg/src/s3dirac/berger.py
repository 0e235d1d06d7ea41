"""Closed-form quantities for generalized Berger spheres and their checks.

Contents: the constant ``nu``, the four degree-1 eigenvalues, the volume and
metric density, the degree <= 4 characteristic polynomials written as formula
objects (with explicit reading conventions), series expansions of the lowest
eigenvalues along a curve of parameters, and a finite-difference sweep that
ties those expansions to numerically computed spectra.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from sympy import Poly, QQ, Rational, Symbol, expand, sympify
from sympy import symbols as sp_symbols
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .dirac import (
    DEFAULT_CLUSTER_TOL,
    MU,
    BergerParams,
    SolverError,
    full_spectrum,
    nu_value,
)
from .killing import killing_field

A_SYMBOLS = sp_symbols("a1 a2 a3", positive=True)
EPS = Symbol("eps")

CONVENTIONS = ("printed", "corrected")
PAIR_SUMS = ("ordered", "unordered")
DEFAULT_EPS = (Fraction(-2, 100), Fraction(-1, 100), Fraction(-5, 1000),
               Fraction(5, 1000), Fraction(1, 100), Fraction(2, 100))
MAX_TRACKING_EPS = Fraction(1, 10)

N_PLUS = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


def nu(params) -> object:
    """``(a1^2 + a2^2 + a3^2) / (2 a1 a2 a3)``; exact for rational params."""
    return nu_value(params)


def closed_low_eigs(params) -> tuple:
    """The four degree-1 eigenvalues: nu - sum 1/a_j and its three one-sign flips."""
    params = BergerParams.of(params)
    n = nu(params)
    b = params.inverses
    return (
        n - b[0] - b[1] - b[2],
        n - b[0] + b[1] + b[2],
        n + b[0] - b[1] + b[2],
        n + b[0] + b[1] - b[2],
    )


def volume(params) -> object:
    """Riemannian volume in units of 2 pi^2."""
    a1, a2, a3 = BergerParams.of(params).values
    return a1 * a2 * a3


def density_ratio_squared(params, point: Sequence[Fraction], tangent: Sequence[Sequence[Fraction]]) -> Fraction:
    """``det g / det g0`` in the tangent basis ``tangent`` at ``point`` on S^3.

    The Berger metric is ``g(u, v) = sum_j a_j^2 <K_j, u><K_j, v>`` with the
    covectors obtained from the orthonormal Killing frame K+.
    """
    from sympy import Matrix

    params = BergerParams.of(params)
    a = params.values
    frame = []
    for j in (1, 2, 3):
        frame.append([Fraction(c) * Fraction(point[v - 1]) for c, v in killing_field(_plus(), j)])

    def dot(u, v):
        return sum(Fraction(x) * Fraction(y) for x, y in zip(u, v))

    g = Matrix(3, 3, lambda p, q: sum(
        Rational(str(a[j] ** 2)) * Rational(str(dot(frame[j], tangent[p]) * dot(frame[j], tangent[q])))
        for j in range(3)))
    g0 = Matrix(3, 3, lambda p, q: Rational(str(dot(tangent[p], tangent[q]))))
    r = g.det() / g0.det()
    return Fraction(int(r.p), int(r.q))


def rational_sphere_point(u: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Inverse stereographic image of ``u`` in Q^3; a rational point of S^3."""
    u = [Fraction(v) for v in u]
    r2 = sum(v * v for v in u)
    d = 1 + r2
    return tuple(2 * v / d for v in u) + ((1 - r2) / d,)


def tangent_basis(point: Sequence[Fraction]) -> list[tuple[Fraction, ...]]:
    """Three rational tangent vectors at ``point``: projections of coordinate vectors."""
    drop = max(range(4), key=lambda i: abs(point[i]))
    out = []
    for i in range(4):
        if i == drop:
            continue
        out.append(tuple(Fraction(int(i == a)) - point[i] * point[a] for a in range(4)))
    return out


def volume_density_matches(params, u: Sequence[Fraction]) -> bool:
    """Metric determinant ratio at the point ``u`` equals ``volume(params)^2``."""
    params = BergerParams.of(params)
    x = rational_sphere_point(u)
    return density_ratio_squared(params, x, tangent_basis(x)) == volume(params) ** 2


def _plus():
    from .killing import FrameSign

    return FrameSign.PLUS


# ---------------------------------------------------------------------------
# characteristic polynomial formulas


@dataclass(frozen=True)
class CharpolyFormula:
    """A characteristic polynomial ``chi_n(mu)`` as a symbolic expression in mu and a1..a3."""

    degree: int
    convention: str
    pair_sum: str
    expression: object

    def evaluate(self, params) -> Poly:
        params = BergerParams.of(params)
        if not params.is_exact:
            raise TypeError("formula evaluation needs rational parameters")
        subs = {s: Rational(v.numerator, v.denominator) for s, v in zip(A_SYMBOLS, params.values)}
        return Poly(expand(self.expression.subs(subs)), MU, domain=QQ)

    @property
    def mu_degree(self) -> int:
        # monic in mu, so any rational evaluation has the same degree
        return self.evaluate((Fraction(2), Fraction(3), Fraction(5))).degree()


def _pair_sum(terms, pair_sum: str):
    if pair_sum == "ordered":
        pairs = [(j, k) for j in range(3) for k in range(3) if j != k]
    elif pair_sum == "unordered":
        pairs = [(j, k) for j in range(3) for k in range(j + 1, 3)]
    else:
        raise ValueError(f"unknown pair-sum reading {pair_sum!r}")
    return sum(terms(j, k) for j, k in pairs)


def build_formula(n: int, convention: str = "printed", pair_sum: str = "ordered") -> CharpolyFormula:
    """Formula for ``chi_n`` under the given reading.

    ``printed`` is the closed form taken literally; a double sum
    over ``j != k`` is read as ordered pairs unless ``pair_sum="unordered"``.
    ``corrected`` differs only at n = 3, where the linear coefficient is
    doubled.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    if n < 0:
        raise ValueError("degree must be non-negative")
    if n > 4:
        raise ValueError("no closed formula is available for degree >= 5")
    a = A_SYMBOLS
    mu = MU
    inv2 = sum(1 / x**2 for x in a)
    prod = a[0] * a[1] * a[2]
    if n == 0:
        expr = mu**2
    elif n == 1:
        expr = 1
        for kappa in N_PLUS:
            expr *= (mu + sum(kappa[j] / a[j] for j in range(3))) ** 2
    elif n == 2:
        expr = (mu**3 - 4 * inv2 * mu + 16 / prod) ** 6
    elif n == 3:
        lin = 2 if convention == "corrected" else 1
        expr = 1
        for kappa in N_PLUS:
            s1 = sum(kappa[j] / a[j] for j in range(3))
            cross = _pair_sum(lambda j, k: kappa[j] * kappa[k] / (a[j] * a[k]), pair_sum)
            expr *= (mu**2 - lin * s1 * mu - 3 * (inv2 - cross)) ** 4
    else:
        cross = _pair_sum(lambda j, k: 1 / (a[j] ** 2 * a[k] ** 2), pair_sum)
        quintic = (
            mu**5
            - 20 * inv2 * mu**3
            + 80 / prod * mu**2
            + 64 * (sum(1 / x**4 for x in a) + 2 * cross) * mu
            - 768 * inv2 / prod
        )
        expr = quintic**10
    return CharpolyFormula(n, convention, pair_sum, expr)


def charpoly_formula(n: int, params, convention: str = "printed", pair_sum: str = "ordered") -> Poly:
    return build_formula(n, convention, pair_sum).evaluate(params)


# ---------------------------------------------------------------------------
# truncated power series in eps


def _ser_mul(a, b, order):
    out = [Fraction(0)] * order
    for i, x in enumerate(a[:order]):
        if x:
            for j, y in enumerate(b[: order - i]):
                out[i + j] += x * y
    return out


def _ser_inv(a, order):
    if a[0] == 0:
        raise ZeroDivisionError("series with zero constant term")
    out = [Fraction(0)] * order
    out[0] = 1 / a[0]
    for k in range(1, order):
        acc = sum((a[i] * out[k - i] for i in range(1, min(k, len(a) - 1) + 1)), Fraction(0))
        out[k] = -acc / a[0]
    return out


def _pad(a, order):
    a = list(a[:order])
    return a + [Fraction(0)] * (order - len(a))


@dataclass(frozen=True)
class BergerCurve:
    """Parameters ``a_j(eps) = sum_k coeffs[j][k] eps^k`` with ``a_j(0) = 1``.

    Curves parsed from expressions keep them in ``exprs``; ``params_at`` then
    evaluates the expressions exactly instead of the truncated series.
    """

    coeffs: tuple[tuple[Fraction, ...], ...]
    exprs: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.coeffs) != 3:
            raise ValueError("a curve has three coefficient lists")
        clean = tuple(tuple(Fraction(c) for c in row) or (Fraction(1),) for row in self.coeffs)
        for row in clean:
            if row[0] != 1:
                raise ValueError("curve parameters must equal 1 at eps = 0")
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def from_expressions(cls, texts: Sequence[str] | str, order: int = 8) -> BergerCurve:
        """Taylor coefficients (through ``eps^(order-1)``) of expressions in ``eps`` or ``e``."""
        if isinstance(texts, str):
            texts = [t for t in texts.split(",")]
        if len(texts) != 3:
            raise ValueError("expected three curve expressions")
        rows, exprs = [], []
        local = {"eps": EPS, "e": EPS, "epsilon": EPS}
        for text in texts:
            try:
                expr = parse_expr(text.strip(), local_dict=local,
                                  transformations=standard_transformations + (convert_xor,))
                expr = sympify(expr)
                if expr.free_symbols - {EPS}:
                    raise ValueError(f"unknown symbols in {text!r}")
                ser = expr.series(EPS, 0, order).removeO()
                poly = Poly(ser, EPS, domain=QQ)
            except ValueError:
                raise
            except Exception as exc:
                raise ValueError(f"cannot expand curve expression {text!r}: {exc}") from None
            coeffs = [Fraction(0)] * order
            for (k,), c in poly.terms():
                coeffs[k] = Fraction(int(c.numerator), int(c.denominator))
            rows.append(tuple(coeffs))
            exprs.append(expr)
        return cls(tuple(rows), tuple(exprs))

    @classmethod
    def linear(cls, a_prime) -> BergerCurve:
        return cls(tuple((Fraction(1), Fraction(d)) for d in a_prime))

    @property
    def derivatives(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(row[1] if len(row) > 1 else Fraction(0) for row in self.coeffs)

    def params_at(self, eps) -> BergerParams:
        if self.exprs is not None:
            e = Fraction(eps)
            vals = []
            for expr in self.exprs:
                v = expr.subs(EPS, Rational(e.numerator, e.denominator))
                if not v.is_Rational:
                    # irrational value (e.g. a square root): fall back to floats
                    vals.append(float(v))
                else:
                    vals.append(Fraction(int(v.p), int(v.q)))
            return BergerParams(*vals)
        vals = []
        for row in self.coeffs:
            v = 0
            for c in reversed(row):
                v = v * eps + c
            vals.append(v)
        return BergerParams(*vals)

    def series(self, order: int = 3) -> list[list[Fraction]]:
        return [_pad(list(row), order) for row in self.coeffs]


@dataclass(frozen=True)
class CurveExpansion:
    """Taylor coefficients of the lowest eigenvalues along a curve.

    ``order1`` and ``order2`` are ``(plus, minus)`` pairs; ``order2`` is
    ``None`` when the curve does not preserve volume through eps^2.
    """

    order1: tuple[Fraction, Fraction]
    order2: tuple[Fraction, Fraction] | None
    diagnostic: str | None = None


def curve_expansion(curve: BergerCurve) -> CurveExpansion:
    order = 3
    a = curve.series(order)
    prod = _ser_mul(_ser_mul(a[0], a[1], order), a[2], order)
    squares = [_ser_mul(x, x, order) for x in a]
    sq_sum = [sum(col) for col in zip(*squares)]
    plus = [x / 2 for x in _ser_mul(sq_sum, _ser_inv(prod, order), order)]
    inv_sum = [sum(col) for col in zip(*[_ser_inv(x, order) for x in a])]
    minus = [p - q for p, q in zip(plus, inv_sum)]
    order1 = (plus[1], minus[1])
    if prod[1] != 0 or prod[2] != 0:
        return CurveExpansion(
            order1,
            None,
            f"volume not preserved: a1 a2 a3 = 1 + ({prod[1]}) eps + ({prod[2]}) eps^2 + ...; "
            "second-order coefficients require a1 a2 a3 = 1 through eps^2",
        )
    return CurveExpansion(order1, (plus[2], minus[2]))


# ---------------------------------------------------------------------------
# finite-difference sweep


class TrackingError(RuntimeError):
    pass


def neville_zero(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Value at 0 of the interpolating polynomial through ``(xs, ys)``."""
    p = list(ys)
    n = len(xs)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i])
    return p[0]


def richardson(steps: Sequence[float], estimates: Sequence[float]) -> float:
    """Extrapolate symmetric-difference estimates with error series in h^2."""
    return neville_zero([h * h for h in steps], estimates)


@dataclass(frozen=True)
class SweepRow:
    eps: Fraction
    params: tuple[float, float, float]
    lambda_plus: float
    lambda_minus: float


@dataclass(frozen=True)
class FitResult:
    order: int
    branch: str
    fitted: float
    analytic: Fraction | None

    @property
    def residual(self) -> float | None:
        return None if self.analytic is None else self.fitted - float(self.analytic)


@dataclass
class SweepReport:
    rows: list[SweepRow]
    fits: list[FitResult]
    tracking_errors: list[str] = field(default_factory=list)
    diagnostic: str | None = None

    def fit(self, order: int, branch: str) -> FitResult:
        for f in self.fits:
            if f.order == order and f.branch == branch:
                return f
        raise KeyError((order, branch))

    def verdict(self, tol: float = 1e-4) -> dict:
        checked = [f for f in self.fits if f.analytic is not None]
        ok = not self.tracking_errors and bool(checked) and all(abs(f.residual) <= tol for f in checked)
        return {
            "tolerance": tol,
            "status": "pass" if ok else "fail",
            "tracking_errors": list(self.tracking_errors),
            "diagnostic": self.diagnostic,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "lambda_plus", "lambda_minus", "fitted_order", "analytic", "residual"])
        for r in self.rows:
            w.writerow([_fmt(float(r.eps)), _fmt(r.lambda_plus), _fmt(r.lambda_minus), "", "", ""])
        for f in self.fits:
            plus = _fmt(f.fitted) if f.branch == "plus" else ""
            minus = _fmt(f.fitted) if f.branch == "minus" else ""
            analytic = "" if f.analytic is None else _fmt(float(f.analytic))
            residual = "" if f.residual is None else _fmt(f.residual)
            w.writerow([f"fit{'+' if f.branch == 'plus' else '-'}", plus, minus, f.order, analytic, residual])
        return buf.getvalue()

    def to_json(self, tol: float = 1e-4) -> dict:
        return {
            "rows": [
                {"eps": str(r.eps), "lambda_plus": _fmt(r.lambda_plus), "lambda_minus": _fmt(r.lambda_minus)}
                for r in self.rows
            ],
            "fits": [
                {
                    "order": f.order,
                    "branch": f.branch,
                    "fitted": _fmt(f.fitted),
                    "analytic": None if f.analytic is None else {"exact": str(f.analytic), "decimal": float(f.analytic)},
                    "residual": None if f.residual is None else _fmt(f.residual),
                }
                for f in self.fits
            ],
            "verdict": self.verdict(tol),
        }


def _fmt(x: float) -> str:
    s = f"{x:.12g}"
    return "0" if s in ("-0", "0") else s


def _track(spectrum_pairs, previous: float, tol: float) -> float:
    ranked = sorted(spectrum_pairs, key=lambda vm: abs(vm[0] - previous))
    best = ranked[0]
    if best[1] % 2:
        raise TrackingError(f"odd multiplicity at {best[0]:.12g}")
    if len(ranked) > 1 and abs(abs(ranked[1][0] - previous) - abs(best[0] - previous)) <= tol:
        raise TrackingError(f"tie between {best[0]:.12g} and {ranked[1][0]:.12g} when tracking from {previous:.12g}")
    return best[0]


def fd_sweep(
    curve: BergerCurve,
    eps_list: Sequence = DEFAULT_EPS,
    n_max: int = 2,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> SweepReport:
    """Track the eigenvalues near +-3/2 along the curve and fit Taylor coefficients.

    ``eps_list`` must be symmetric (every h comes with -h).  The symmetric
    first and second differences at each h are Richardson-extrapolated in h^2.
    """
    eps_values = sorted({Fraction(e) for e in eps_list if Fraction(e) != 0})
    steps = sorted({abs(e) for e in eps_values})
    if not steps:
        raise ValueError("eps list must contain nonzero values")
    for h in steps:
        if h not in eps_values or -h not in eps_values:
            raise ValueError(f"eps list must be symmetric; missing partner of {h}")
    if steps[-1] > MAX_TRACKING_EPS:
        raise ValueError(f"tracking is only certified for |eps| <= {MAX_TRACKING_EPS}")

    values: dict[Fraction, tuple[float, float]] = {}
    rows = []
    errors = []
    params0 = curve.params_at(Fraction(0))
    spec0 = full_spectrum(params0, n_max, cluster_tol).pairs(cluster_tol)
    base_plus = _track(spec0, 1.5, cluster_tol)
    base_minus = _track(spec0, -1.5, cluster_tol)
    values[Fraction(0)] = (base_plus, base_minus)

    for direction in (1, -1):
        prev_plus, prev_minus = base_plus, base_minus
        for h in steps:
            e = direction * h
            params = curve.params_at(e)
            try:
                spec = full_spectrum(params, n_max, cluster_tol).pairs(cluster_tol)
                prev_plus = _track(spec, prev_plus, cluster_tol)
                prev_minus = _track(spec, prev_minus, cluster_tol)
            except (TrackingError, SolverError) as exc:
                errors.append(f"eps={e}: {exc}")
                prev_plus = prev_minus = math.nan
            values[e] = (prev_plus, prev_minus)

    for e in sorted(values):
        p = curve.params_at(e)
        rows.append(SweepRow(e, tuple(float(x) for x in p.values), values[e][0], values[e][1]))

    analytic = curve_expansion(curve)
    fits = []
    for b, branch in enumerate(("plus", "minus")):
        f0 = values[Fraction(0)][b]
        d1 = [(values[h][b] - values[-h][b]) / (2 * float(h)) for h in steps]
        d2 = [(values[h][b] + values[-h][b] - 2 * f0) / (2 * float(h) ** 2) for h in steps]
        hs = [float(h) for h in steps]
        fits.append(FitResult(1, branch, richardson(hs, d1), analytic.order1[b]))
        fits.append(FitResult(2, branch, richardson(hs, d2),
                              None if analytic.order2 is None else analytic.order2[b]))
    return SweepReport(rows, fits, errors, analytic.diagnostic)


def random_rational_params(rng, count: int, low=Fraction(1, 2), high=Fraction(2), denominator: int = 12):
    """Random rational triples in ``[low, high]^3`` with bounded denominators."""
    lo = math.ceil(low * denominator)
    hi = math.floor(high * denominator)
    out = []
    for _ in range(count):
        out.append(BergerParams(*(Fraction(rng.randint(lo, hi), denominator) for _ in range(3))))
    return out

