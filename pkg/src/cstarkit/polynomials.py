"""Noncommutative *-polynomials with exact Gaussian-rational coefficients.

Terms are (coefficient, word) pairs where a word is a nonempty tuple of
generator symbols; a trailing ``*`` on a symbol means the adjoint of that
generator's image.  Constants are expressed through a distinguished unit
generator, so the zero polynomial is the only one without terms.
Coefficients stay exact Fractions until evaluation converts them to complex
floats at the last moment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import PreconditionError
from .operators import dagger

_SYMBOL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\*?\Z")

Scalar = "int | Fraction | GaussianRational"


@dataclass(frozen=True)
class GaussianRational:
    """Exact element of Q(i): real and imaginary parts are Fractions."""

    real: Fraction
    imag: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "real", Fraction(self.real))
        object.__setattr__(self, "imag", Fraction(self.imag))

    @classmethod
    def from_value(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(Fraction(value), Fraction(0))
        raise PreconditionError(f"cannot coerce {type(value).__name__} to a Gaussian rational")

    @classmethod
    def zero(cls) -> "GaussianRational":
        return cls(Fraction(0), Fraction(0))

    @classmethod
    def one(cls) -> "GaussianRational":
        return cls(Fraction(1), Fraction(0))

    @staticmethod
    def _coerce(other) -> "GaussianRational | None":
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(Fraction(other), Fraction(0))
        return None

    def __add__(self, other):
        other = GaussianRational._coerce(other)
        if other is None:
            return NotImplemented
        return GaussianRational(self.real + other.real, self.imag + other.imag)

    def __sub__(self, other):
        other = GaussianRational._coerce(other)
        if other is None:
            return NotImplemented
        return GaussianRational(self.real - other.real, self.imag - other.imag)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.real, -self.imag)

    def __mul__(self, other):
        other = GaussianRational._coerce(other)
        if other is None:
            return NotImplemented
        return GaussianRational(
            self.real * other.real - self.imag * other.imag,
            self.real * other.imag + self.imag * other.real,
        )

    __radd__ = __add__
    __rmul__ = __mul__

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.real, -self.imag)

    @property
    def is_zero(self) -> bool:
        return self.real == 0 and self.imag == 0

    def one_norm(self) -> Fraction:
        """|re| + |im|: exact rational upper bound for the modulus."""
        return abs(self.real) + abs(self.imag)

    def __complex__(self) -> complex:
        return complex(float(self.real), float(self.imag))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        if self.real != 0:
            parts.append(str(self.real))
        if self.imag != 0:
            if parts:
                sign = "-" if self.imag < 0 else "+"
                parts.append(f"{sign}{abs(self.imag)}i")
            else:
                parts.append(f"{self.imag}i")
        return "".join(parts)


def _check_word(word) -> tuple[str, ...]:
    word = tuple(word)
    if not word:
        raise PreconditionError(
            "constant terms are not allowed; multiply the unit generator instead")
    for symbol in word:
        if not isinstance(symbol, str) or not _SYMBOL_RE.match(symbol):
            raise PreconditionError(f"invalid generator symbol {symbol!r}")
    return word


def star_symbol(symbol: str) -> str:
    return symbol[:-1] if symbol.endswith("*") else symbol + "*"


def base_name(symbol: str) -> str:
    return symbol[:-1] if symbol.endswith("*") else symbol


@dataclass(frozen=True)
class NCPolynomial:
    """Canonical sum of (Gaussian-rational coefficient, word) terms.

    Construction merges duplicate words, drops zero coefficients and sorts
    terms by (length, word), so structural equality is semantic equality.
    """

    terms: tuple

    def __post_init__(self) -> None:
        merged: dict[tuple[str, ...], GaussianRational] = {}
        for coeff, word in self.terms:
            word = _check_word(word)
            coeff = GaussianRational.from_value(coeff)
            merged[word] = merged.get(word, GaussianRational.zero()) + coeff
        canon = tuple(
            (coeff, word)
            for word, coeff in sorted(merged.items(), key=lambda kv: (len(kv[0]), kv[0]))
            if not coeff.is_zero
        )
        object.__setattr__(self, "terms", canon)

    @classmethod
    def from_terms(cls, terms: Iterable) -> "NCPolynomial":
        return cls(tuple(terms))

    @classmethod
    def zero(cls) -> "NCPolynomial":
        return cls(())

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def symbols(self) -> frozenset[str]:
        """Base generator names mentioned by any term (stars stripped)."""
        return frozenset(base_name(s) for _, word in self.terms for s in word)

    def adjoint(self) -> "NCPolynomial":
        return NCPolynomial(tuple(
            (coeff.conjugate(), tuple(star_symbol(s) for s in reversed(word)))
            for coeff, word in self.terms
        ))

    def scalar_mul(self, value) -> "NCPolynomial":
        c = GaussianRational.from_value(value)
        return NCPolynomial(tuple((c * coeff, word) for coeff, word in self.terms))

    def __add__(self, other: "NCPolynomial") -> "NCPolynomial":
        return NCPolynomial(self.terms + other.terms)

    def __sub__(self, other: "NCPolynomial") -> "NCPolynomial":
        return self + (-other)

    def __neg__(self) -> "NCPolynomial":
        return self.scalar_mul(-1)

    def __mul__(self, other: "NCPolynomial") -> "NCPolynomial":
        return NCPolynomial(tuple(
            (c1 * c2, w1 + w2)
            for c1, w1 in self.terms
            for c2, w2 in other.terms
        ))

    def __rmul__(self, value) -> "NCPolynomial":
        return self.scalar_mul(value)

    def evaluate(self, images: Mapping[str, np.ndarray], dim: int) -> np.ndarray:
        """Substitute matrices for symbols (star = conjugate transpose)."""
        out = np.zeros((dim, dim), dtype=np.complex128)
        for coeff, word in self.terms:
            acc = None
            for symbol in word:
                img = _image(images, symbol)
                acc = img if acc is None else acc @ img
            out += complex(coeff) * acc
        return out

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        return " + ".join(
            f"({coeff}) {' '.join(word)}" for coeff, word in self.terms)


def _image(images: Mapping[str, np.ndarray], symbol: str) -> np.ndarray:
    name = base_name(symbol)
    if name not in images:
        raise PreconditionError(f"no image for generator '{name}'")
    img = np.asarray(images[name], dtype=np.complex128)
    return dagger(img) if symbol.endswith("*") else img


def generator(name: str) -> NCPolynomial:
    """The polynomial consisting of the single generator `name`."""
    return NCPolynomial(((GaussianRational.one(), (name,)),))


def lipschitz_bound(p: NCPolynomial, bounds: Mapping[str, Fraction]) -> Fraction:
    """Exact rational Lipschitz constant of p over the generator-bound ball.

    Each term contributes |coeff| * len(word) * B^(len-1) where B is the
    largest generator bound; a telescoping product bound shows a joint
    perturbation of size t moves the term by at most that times t.
    Coefficient moduli use the one-norm |re|+|im|, a rational upper bound.
    """
    if not bounds:
        return Fraction(0)
    big = max(Fraction(b) for b in bounds.values())
    total = Fraction(0)
    for coeff, word in p.terms:
        total += coeff.one_norm() * len(word) * big ** (len(word) - 1)
    return total


def triangle_norm_bound(p: NCPolynomial, bounds: Mapping[str, Fraction]) -> Fraction:
    """Upper bound for |p(rep)| over reps obeying the generator bounds."""
    total = Fraction(0)
    for coeff, word in p.terms:
        prod = Fraction(1)
        for symbol in word:
            name = base_name(symbol)
            if name not in bounds:
                raise PreconditionError(f"no norm bound declared for generator '{name}'")
            prod *= Fraction(bounds[name])
        total += coeff.one_norm() * prod
    return total
