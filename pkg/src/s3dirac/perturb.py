"""First- and second-order coefficients of the two eigenvalues closest to zero.

The unperturbed eigenvalues are +3/2 and -3/2.  A metric perturbation is given
by its first-order frame components ``(h_sign)_jk``; the coefficients are

* order 1:  lambda_pm^(1) = -/+ V1 / (4 pi^2), V1 = (1/2) int tr h,
* order 2 (density-preserving perturbations only): lambda_pm^(2) is the mean
  over S^3 of a quadratic field P_pm built from h, the frame derivations L and
  the pseudoinverse of -Delta.

All quantities are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .killing import (
    FrameSign,
    apply_L,
    convert_h_minus_to_plus,
    convert_h_plus_to_minus,
    levi_civita,
)
from .polyfield import SphereIntegral, SphericalField, pseudo_inverse_laplacian
from .tensor import (
    AsymmetricTensorError,
    PerturbationFileError,
    PerturbationTensor,
    load_tensor,
    tensor_from_json,
)

__all__ = [
    "AsymmetricTensorError",
    "EigenCoefficients",
    "NON_SHEAR_MESSAGE",
    "NonShearError",
    "PerturbationFileError",
    "PerturbationTensor",
    "P_field",
    "berger_perturbation",
    "both_frames",
    "eigen_coefficients",
    "lambda1",
    "lambda2",
    "load_tensor",
    "p_terms",
    "second_derivative_vanishes",
    "shear_check",
    "tensor_from_json",
    "volume_increment",
]

NON_SHEAR_MESSAGE = "non-shear: second order unavailable (requires a density-preserving perturbation)"


class NonShearError(ValueError):
    """Second-order coefficients require a pointwise trace-free perturbation."""


@dataclass(frozen=True)
class EigenCoefficients:
    lambda1_plus: Fraction
    lambda1_minus: Fraction
    lambda2_plus: Fraction | None = None
    lambda2_minus: Fraction | None = None

    @property
    def has_second_order(self) -> bool:
        return self.lambda2_plus is not None


def volume_increment(h: PerturbationTensor) -> SphereIntegral:
    """First-order volume change ``V1 = (1/2) int tr h`` (frame trace = metric trace)."""
    return h.trace().integral() * Fraction(1, 2)


def lambda1(h: PerturbationTensor) -> tuple[Fraction, Fraction]:
    # V1 = c * 2 pi^2, so -/+ V1 / (4 pi^2) = -/+ c / 2
    c = volume_increment(h).coefficient
    return -c / 2, c / 2


def shear_check(h: PerturbationTensor) -> bool:
    return h.trace().is_zero()


def _L(sign, s, f):
    return apply_L(sign, s, f)


def p_terms(h: PerturbationTensor) -> tuple[SphericalField, SphericalField, SphericalField, SphericalField]:
    """The four terms of P_sign, in order of increasing number of L's."""
    if not shear_check(h):
        raise NonShearError(NON_SHEAR_MESSAGE)
    sign = h.sign
    pm = sign.s
    H = h.entries
    idx = (1, 2, 3)

    first = h.frobenius_square() * Fraction(pm, 4)

    # L_s h_jk, cached
    Lh = {(s, j, k): _L(sign, s, H[j - 1][k - 1]) for s in idx for j in idx for k in idx}

    second = SphericalField.zero()
    for q in idx:
        for k in idx:
            for s in idx:
                e = levi_civita(q, k, s)
                if not e:
                    continue
                for j in idx:
                    a, b = H[j - 1][q - 1], Lh[(s, j, k)]
                    if a.is_zero() or b.is_zero():
                        continue
                    second = second + a * b * e
    second = second * Fraction(-1, 16)

    # D_k = L_j h_jk (divergence), then L_s D_k and L_r L_s D_k
    div = {k: sum((Lh[(j, j, k)] for j in idx), SphericalField.zero()) for k in idx}
    LLh = {(s, k): _L(sign, s, div[k]) for s in idx for k in idx}

    third = SphericalField.zero()
    for k in idx:
        for s in idx:
            a = H[k - 1][s - 1]
            if a.is_zero() or LLh[(s, k)].is_zero():
                continue
            third = third + a * pseudo_inverse_laplacian(LLh[(s, k)])
    third = third * Fraction(pm, 8)

    fourth = SphericalField.zero()
    for q in idx:
        for k in idx:
            for s in idx:
                e = levi_civita(q, k, s)
                if not e or LLh[(s, k)].is_zero():
                    continue
                for r in idx:
                    a = H[r - 1][q - 1]
                    if a.is_zero():
                        continue
                    b = pseudo_inverse_laplacian(_L(sign, r, LLh[(s, k)]))
                    if b.is_zero():
                        continue
                    fourth = fourth + a * b * e
    fourth = fourth * Fraction(-1, 16)
    return first, second, third, fourth


def P_field(h: PerturbationTensor) -> SphericalField:
    a, b, c, d = p_terms(h)
    return a + b + c + d


def lambda2(h: PerturbationTensor) -> Fraction:
    """Second-order coefficient for the eigenvalue branch selected by ``h.sign``.

    The integral of P over S^3 divided by 2 pi^2 is the degree-0 component of P.
    """
    return P_field(h).mean()


def berger_perturbation(a_prime) -> PerturbationTensor:
    """Plus-frame tensor ``2 diag(a')`` of a Berger curve with derivatives ``a'``."""
    a = [Fraction(v) for v in a_prime]
    if len(a) != 3:
        raise ValueError("expected three derivatives")
    return PerturbationTensor.from_constants(FrameSign.PLUS, [[2 * a[j] if j == k else 0 for k in range(3)] for j in range(3)])


def both_frames(h: PerturbationTensor) -> tuple[PerturbationTensor, PerturbationTensor]:
    if h.sign is FrameSign.PLUS:
        return h, convert_h_plus_to_minus(h)
    return convert_h_minus_to_plus(h), h


def eigen_coefficients(h: PerturbationTensor) -> EigenCoefficients:
    """All available coefficients for one physical perturbation, given in either frame."""
    l1p, l1m = lambda1(h)
    if not shear_check(h):
        return EigenCoefficients(l1p, l1m)
    hp, hm = both_frames(h)
    return EigenCoefficients(l1p, l1m, lambda2(hp), lambda2(hm))


def second_derivative_vanishes(h: PerturbationTensor) -> bool:
    """Whether ``L_s L_j h_jk`` is identically zero for all s, k."""
    for k in (1, 2, 3):
        div = sum((apply_L(h.sign, j, h[j, k]) for j in (1, 2, 3)), SphericalField.zero())
        for s in (1, 2, 3):
            if not apply_L(h.sign, s, div).is_zero():
                return False
    return True
