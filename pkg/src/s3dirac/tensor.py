"""Frame components of a first-order metric perturbation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .killing import FrameSign
from .polyfield import Poly4, PolynomialSyntaxError, SphericalField, as_field, format_poly


class AsymmetricTensorError(ValueError):
    pass


class PerturbationFileError(ValueError):
    pass


@dataclass(frozen=True)
class PerturbationTensor:
    """Symmetric 3x3 matrix of fields ``(h_sign)_jk`` in one Killing frame."""

    sign: FrameSign
    entries: tuple[tuple[SphericalField, ...], ...]

    def __post_init__(self):
        sign = FrameSign.parse(self.sign)
        object.__setattr__(self, "sign", sign)
        if len(self.entries) != 3 or any(len(row) != 3 for row in self.entries):
            raise ValueError("perturbation tensor must be 3x3")
        entries = tuple(tuple(as_field(v) for v in row) for row in self.entries)
        object.__setattr__(self, "entries", entries)
        for j in range(3):
            for k in range(j + 1, 3):
                if entries[j][k] != entries[k][j]:
                    raise AsymmetricTensorError(f"entries ({j + 1},{k + 1}) and ({k + 1},{j + 1}) differ")

    @classmethod
    def from_constants(cls, sign, matrix) -> PerturbationTensor:
        return cls(sign, tuple(tuple(SphericalField.constant(Fraction(v)) for v in row) for row in matrix))

    @classmethod
    def zero(cls, sign=FrameSign.PLUS) -> PerturbationTensor:
        return cls.from_constants(sign, [[0] * 3] * 3)

    def __getitem__(self, jk) -> SphericalField:
        j, k = jk
        return self.entries[j - 1][k - 1]

    def trace(self) -> SphericalField:
        return self.entries[0][0] + self.entries[1][1] + self.entries[2][2]

    def frobenius_square(self) -> SphericalField:
        """Pointwise ``h_jk h_jk``."""
        total = SphericalField.zero()
        for row in self.entries:
            for h in row:
                if not h.is_zero():
                    total = total + h * h
        return total

    def to_json(self) -> dict:
        return {
            "frame": self.sign.value,
            "entries": [[format_poly(h.to_poly()) for h in row] for row in self.entries],
        }


def tensor_from_json(payload) -> PerturbationTensor:
    if not isinstance(payload, dict) or "frame" not in payload or "entries" not in payload:
        raise PerturbationFileError('expected an object with "frame" and "entries"')
    try:
        sign = FrameSign.parse(payload["frame"])
    except ValueError as exc:
        raise PerturbationFileError(str(exc)) from None
    rows = payload["entries"]
    if not isinstance(rows, list) or len(rows) != 3 or any(not isinstance(r, list) or len(r) != 3 for r in rows):
        raise PerturbationFileError('"entries" must be a 3x3 array of polynomial strings')
    parsed = []
    for row in rows:
        out_row = []
        for text in row:
            if isinstance(text, (int,)) and not isinstance(text, bool):
                text = str(text)
            if not isinstance(text, str):
                raise PerturbationFileError(f"entry {text!r} is not a polynomial string")
            try:
                out_row.append(SphericalField.from_poly(Poly4.parse(text)))
            except PolynomialSyntaxError as exc:
                raise PerturbationFileError(str(exc)) from None
        parsed.append(tuple(out_row))
    return PerturbationTensor(sign, tuple(parsed))


def load_tensor(path) -> PerturbationTensor:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PerturbationFileError(f"cannot read {path}: {exc}") from None
    return tensor_from_json(payload)
