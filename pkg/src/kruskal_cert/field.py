"""Exact scalar fields: the rationals and prime fields GF(p).

Scalars are plain Python objects: ``fractions.Fraction`` over the rationals
and ``int`` in ``range(p)`` over GF(p).  A :class:`Field` converts user input
into its canonical scalars and supplies the handful of operations the
elimination routines need.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional

__all__ = ["Field", "QQ", "GF", "parse_scalar", "format_scalar"]

MAX_PRIME = 1 << 61


def _is_prime(p: int) -> bool:
    from sympy import isprime

    return bool(isprime(p))


def parse_scalar(value: Any) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string into a Fraction."""
    if isinstance(value, bool):
        raise TypeError("booleans are not field scalars")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    raise TypeError(f"unsupported scalar type {type(value).__name__}")


def format_scalar(value: Any) -> int | str:
    """Serialize a scalar: bare int when integral, else ``"p/q"``."""
    frac = Fraction(value)
    if frac.denominator == 1:
        return frac.numerator
    return f"{frac.numerator}/{frac.denominator}"


@dataclass(frozen=True)
class Field:
    """Either the rationals (``p is None``) or GF(p) for a prime p < 2**61."""

    p: Optional[int] = None

    def __post_init__(self) -> None:
        if self.p is None:
            return
        if not isinstance(self.p, int) or isinstance(self.p, bool):
            raise TypeError("field modulus must be an int")
        if self.p < 2 or self.p >= MAX_PRIME or not _is_prime(self.p):
            raise ValueError(f"{self.p} is not a prime below 2**61")

    @property
    def is_rational(self) -> bool:
        return self.p is None

    @property
    def characteristic(self) -> int:
        return 0 if self.p is None else self.p

    @property
    def zero(self):
        return Fraction(0) if self.p is None else 0

    @property
    def one(self):
        return Fraction(1) if self.p is None else 1

    def __call__(self, value: Any):
        """Canonical scalar for ``value`` (int, Fraction, or rational string)."""
        if self.p is None:
            return parse_scalar(value)
        if isinstance(value, int) and not isinstance(value, bool):
            return value % self.p
        frac = parse_scalar(value)
        den = frac.denominator % self.p
        if den == 0:
            raise ValueError(f"denominator of {value!r} vanishes in GF({self.p})")
        return frac.numerator * pow(den, -1, self.p) % self.p

    def vector(self, values) -> tuple:
        return tuple(self(v) for v in values)

    def add(self, a, b):
        return a + b if self.p is None else (a + b) % self.p

    def sub(self, a, b):
        return a - b if self.p is None else (a - b) % self.p

    def mul(self, a, b):
        return a * b if self.p is None else a * b % self.p

    def neg(self, a):
        return -a if self.p is None else -a % self.p

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(a) if self.p is None else pow(a, -1, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def random_element(self, rng: random.Random, bound: int = 5, nonzero: bool = False):
        """Uniform element of GF(p), or a small random integer over the rationals."""
        while True:
            if self.p is None:
                x = Fraction(rng.randint(-bound, bound))
            else:
                x = rng.randrange(self.p)
            if not nonzero or x != 0:
                return x

    def random_vector(self, rng: random.Random, dim: int, bound: int = 5) -> tuple:
        """Random nonzero vector of length ``dim``."""
        while True:
            v = tuple(self.random_element(rng, bound) for _ in range(dim))
            if any(v):
                return v

    def to_json(self) -> dict:
        if self.p is None:
            return {"type": "rational"}
        return {"type": "prime", "p": self.p}

    def __str__(self) -> str:
        return "QQ" if self.p is None else f"GF({self.p})"


QQ = Field()


def GF(p: int) -> Field:
    return Field(p)
