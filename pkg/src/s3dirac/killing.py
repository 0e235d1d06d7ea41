"""Killing frames K+ and K- on the round S^3 as exact derivations.

``(L_sign)_j`` is the first order operator ``(K_sign)_j^alpha d/dx^alpha``
acting on polynomials in the ambient coordinates.  The fields are tangent to
the sphere, so the result restricted to S^3 does not depend on the extension.
Frame indices are 1-based throughout.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from functools import lru_cache

from .polyfield import Poly4, SphericalField


class FrameSign(enum.Enum):
    PLUS = "+"
    MINUS = "-"

    @property
    def s(self) -> int:
        return 1 if self is FrameSign.PLUS else -1

    @classmethod
    def parse(cls, value) -> FrameSign:
        if isinstance(value, FrameSign):
            return value
        text = str(value).strip().lower()
        if text in ("+", "plus", "+1", "1"):
            return cls.PLUS
        if text in ("-", "minus", "-1"):
            return cls.MINUS
        raise ValueError(f"unknown frame sign {value!r}")


def levi_civita(i: int, j: int, k: int) -> int:
    """Totally antisymmetric symbol on 1-based indices, eps_123 = +1."""
    if len({i, j, k}) < 3:
        return 0
    return 1 if (i, j, k) in ((1, 2, 3), (2, 3, 1), (3, 1, 2)) else -1


@lru_cache(maxsize=None)
def killing_field(sign: FrameSign, j: int) -> tuple[tuple[int, int], ...]:
    """Components of (K_sign)_j in R^4 as ``(coefficient, variable)`` pairs.

    Component alpha equals ``coefficient * x<variable>``.
    """
    s = sign.s
    table = {
        1: ((-1, 4), (-s, 3), (s, 2), (1, 1)),
        2: ((s, 3), (-1, 4), (-s, 1), (1, 2)),
        3: ((-s, 2), (s, 1), (-1, 4), (1, 3)),
    }
    return table[j]


def apply_L_poly(sign: FrameSign, j: int, p: Poly4) -> Poly4:
    field = killing_field(sign, j)
    out: dict = {}
    for exp, c in p.terms.items():
        for alpha in range(4):
            e = exp[alpha]
            if not e:
                continue
            coeff, var = field[alpha]
            new = list(exp)
            new[alpha] -= 1
            new[var - 1] += 1
            key = tuple(new)
            out[key] = out.get(key, 0) + c * e * coeff
    return Poly4(out)


def apply_L(sign: FrameSign, j: int, f: SphericalField) -> SphericalField:
    """Apply ``(L_sign)_j`` to a field; degree and harmonicity are preserved."""
    sign = FrameSign.parse(sign)
    if j not in (1, 2, 3):
        raise ValueError("frame index must be 1, 2 or 3")
    return f.map_components(lambda d, p: apply_L_poly(sign, j, p))


def commutator(sign: FrameSign, j: int, k: int, f: SphericalField) -> SphericalField:
    """``[L_j, L_k] f`` in the given frame."""
    return apply_L(sign, j, apply_L(sign, k, f)) - apply_L(sign, k, apply_L(sign, j, f))


def commutator_rhs(sign: FrameSign, j: int, k: int, f: SphericalField) -> SphericalField:
    """The predicted value ``-/+ 2 eps_jkl L_l f`` (upper sign for the plus frame)."""
    sign = FrameSign.parse(sign)
    total = SphericalField.zero()
    for l in (1, 2, 3):
        e = levi_civita(j, k, l)
        if e:
            total = total + apply_L(sign, l, f) * (-2 * sign.s * e)
    return total


_O_TEXT = (
    ("x1^2 - x2^2 - x3^2 + x4^2", "2*(x1*x2 - x3*x4)", "2*(x1*x3 + x2*x4)"),
    ("2*(x1*x2 + x3*x4)", "-x1^2 + x2^2 - x3^2 + x4^2", "2*(x2*x3 - x1*x4)"),
    ("2*(x1*x3 - x2*x4)", "2*(x1*x4 + x2*x3)", "-x1^2 - x2^2 + x3^2 + x4^2"),
)


@lru_cache(maxsize=None)
def o_matrix() -> tuple[tuple[SphericalField, ...], ...]:
    """The orthogonal matrix of quadratic harmonics relating the two frames."""
    return tuple(tuple(SphericalField.from_poly(Poly4.parse(t)) for t in row) for row in _O_TEXT)


def o_identity_residuals() -> list[tuple[tuple[int, int, int], SphericalField]]:
    """Residuals of ``(L-)_i O_jk - 2 eps_ijl O_lk`` for all i, j, k."""
    O = o_matrix()
    out = []
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            for k in (1, 2, 3):
                rhs = SphericalField.zero()
                for l in (1, 2, 3):
                    e = levi_civita(i, j, l)
                    if e:
                        rhs = rhs + O[l - 1][k - 1] * (2 * e)
                out.append(((i, j, k), apply_L(FrameSign.MINUS, i, O[j - 1][k - 1]) - rhs))
    return out


def _conjugate(entries, left_transpose: bool):
    O = o_matrix()
    if left_transpose:
        def Om(a, b):
            return O[b][a]
    else:
        def Om(a, b):
            return O[a][b]
    out = []
    for i in range(3):
        row = []
        for l in range(3):
            total = SphericalField.zero()
            for j in range(3):
                for k in range(3):
                    h = entries[j][k]
                    if h.is_zero():
                        continue
                    total = total + Om(i, j) * h * Om(l, k)
            row.append(total)
        out.append(tuple(row))
    return tuple(out)


def convert_h_plus_to_minus(h):
    """``(h-)_il = O_ij (h+)_jk O_lk``."""
    from .tensor import PerturbationTensor

    if h.sign is not FrameSign.PLUS:
        raise ValueError("expected a plus-frame tensor")
    return PerturbationTensor(FrameSign.MINUS, _conjugate(h.entries, left_transpose=False))


def convert_h_minus_to_plus(h):
    """Inverse of :func:`convert_h_plus_to_minus`, using pointwise orthogonality of O."""
    from .tensor import PerturbationTensor

    if h.sign is not FrameSign.MINUS:
        raise ValueError("expected a minus-frame tensor")
    return PerturbationTensor(FrameSign.PLUS, _conjugate(h.entries, left_transpose=True))


def o_orthogonality_residuals() -> list[tuple[tuple[int, int], SphericalField]]:
    O = o_matrix()
    out = []
    for j in range(3):
        for l in range(3):
            total = SphericalField.zero()
            for k in range(3):
                total = total + O[j][k] * O[l][k]
            target = SphericalField.constant(Fraction(int(j == l)))
            out.append(((j + 1, l + 1), total - target))
    return out
