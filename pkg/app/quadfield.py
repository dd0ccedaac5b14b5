"""Exact arithmetic in Z[θ] and Q(θ) for θ² = pθ + q, plus high-precision embeddings."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Literal, Tuple, Union

import mpmath
from mpmath import mp

from app.errors import (
    DomainError,
    InvalidRingError,
    PrecisionExhaustedError,
    RingMismatchError,
)

# Сколько дробных бит должно остаться после вычитания целой части
GUARD_BITS = 32
# Запас сверх n·log2(θ) для фаз на уровне n
PHASE_HEADROOM_BITS = 128

Embedding = Literal["principal", "conjugate"]
RealLike = Union[int, float, Fraction, mpmath.mpf, str]


@dataclass(frozen=True)
class RingParams:
    """Parameters of the ring Z[θ] with θ² = pθ + q.

    Attributes:
        p: number of letters ``a`` in the image of ``a``.
        q: number of letters ``b`` in the image of ``a``.
        validate: set to ``False`` only for negative controls outside the class.
    """

    p: int
    q: int
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.validate:
            return
        if self.p < 1 or self.q < 1:
            raise InvalidRingError(f"p and q must be positive, got p={self.p}, q={self.q}")
        if self.q > self.p:
            raise InvalidRingError(
                f"q={self.q} > p={self.p}: the substitution is not a Pisot substitution"
            )
        root = math.isqrt(self.discriminant)
        if root * root == self.discriminant:
            raise InvalidRingError(
                f"discriminant {self.discriminant} is a perfect square, θ would be rational"
            )

    @property
    def discriminant(self) -> int:
        return self.p * self.p + 4 * self.q

    @property
    def one(self) -> "QuadElem":
        return QuadElem(1, 0, self)

    @property
    def theta_elem(self) -> "QuadElem":
        return QuadElem(0, 1, self)

    def log2_theta(self) -> float:
        return math.log2((self.p + math.sqrt(self.discriminant)) / 2)

    def theta(self) -> mpmath.mpf:
        """θ at the current mpmath precision."""

        return _theta_values(self.p, self.q, mp.prec)[0]

    def theta_conj(self) -> mpmath.mpf:
        """θ' at the current mpmath precision."""

        return _theta_values(self.p, self.q, mp.prec)[1]


@lru_cache(maxsize=256)
def _theta_values(p: int, q: int, bits: int) -> Tuple[mpmath.mpf, mpmath.mpf]:
    with mp.workprec(bits + GUARD_BITS):
        root = mp.sqrt(p * p + 4 * q)
        theta = (p + root) / 2
        theta_conj = (p - root) / 2
    with mp.workprec(bits):
        return +theta, +theta_conj


@dataclass(frozen=True)
class Precision:
    """Working precision in bits for every mpmath evaluation."""

    bits: int = 256

    def __post_init__(self) -> None:
        if self.bits < 64:
            raise DomainError(f"precision must be at least 64 bits, got {self.bits}")

    def context(self):
        return mp.workprec(self.bits)

    def at_least(self, other: "Precision") -> "Precision":
        return self if self.bits >= other.bits else other

    @classmethod
    def for_level(cls, ring: RingParams, n_max: int, *, floor_bits: int = 64) -> "Precision":
        """Precision for phases at level ``n_max``: ceil(n_max·log2 θ) + 128 bits.

        Позиции на уровне n имеют порядок θ^n, поэтому столько старших бит
        уходит на целую часть произведения k·x.
        """

        needed = math.ceil(max(n_max, 0) * ring.log2_theta()) + PHASE_HEADROOM_BITS
        return cls(max(floor_bits, needed))


def rational_to_mpf(value: Rational) -> mpmath.mpf:
    """Rounds an exact rational at the current precision."""

    if value.denominator == 1:
        return mp.mpf(value.numerator)
    return mp.mpf(value.numerator) / value.denominator


@dataclass(frozen=True)
class QuadElem:
    """Element u + vθ of Q(θ) with exact rational coordinates."""

    u: Rational
    v: Rational
    ring: RingParams

    def __post_init__(self) -> None:
        if not isinstance(self.u, Rational) or not isinstance(self.v, Rational):
            raise TypeError(
                f"QuadElem coordinates must be exact rationals, got {self.u!r}, {self.v!r}"
            )

    # --- арифметика -------------------------------------------------------

    def _coerce(self, other: object) -> "QuadElem":
        if isinstance(other, QuadElem):
            if other.ring != self.ring:
                raise RingMismatchError(
                    f"cannot combine elements of Z[θ] for (p, q)={self.ring.p, self.ring.q} "
                    f"and (p, q)={other.ring.p, other.ring.q}"
                )
            return other
        if isinstance(other, Rational):
            return QuadElem(other, 0, self.ring)
        return NotImplemented

    def __add__(self, other: object) -> "QuadElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadElem(self.u + other.u, self.v + other.v, self.ring)

    __radd__ = __add__

    def __neg__(self) -> "QuadElem":
        return QuadElem(-self.u, -self.v, self.ring)

    def __sub__(self, other: object) -> "QuadElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadElem(self.u - other.u, self.v - other.v, self.ring)

    def __rsub__(self, other: object) -> "QuadElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other: object) -> "QuadElem":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p, q = self.ring.p, self.ring.q
        vv = self.v * other.v
        # θ² = pθ + q
        return QuadElem(
            self.u * other.u + q * vv,
            self.u * other.v + self.v * other.u + p * vv,
            self.ring,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "QuadElem":
        if isinstance(other, Rational):
            if other == 0:
                raise ZeroDivisionError("division of a QuadElem by zero")
            return QuadElem(Fraction(self.u) / other, Fraction(self.v) / other, self.ring)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, n: int) -> "QuadElem":
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ring.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # --- инварианты поля --------------------------------------------------

    def conjugate(self) -> "QuadElem":
        """Galois image u + vθ' written back in the basis (1, θ)."""

        # θ' = p − θ
        return QuadElem(self.u + self.ring.p * self.v, -self.v, self.ring)

    def trace(self) -> Rational:
        return 2 * self.u + self.ring.p * self.v

    def norm(self) -> Rational:
        return self.u * self.u + self.ring.p * self.u * self.v - self.ring.q * self.v * self.v

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("QuadElem has zero norm and no inverse")
        conj = self.conjugate()
        return QuadElem(Fraction(conj.u) / n, Fraction(conj.v) / n, self.ring)

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    def is_rational(self) -> bool:
        return self.v == 0

    def is_integral(self) -> bool:
        return self.u.denominator == 1 and self.v.denominator == 1

    def floor(self) -> int:
        """Exact integer part, decided with integer square roots only."""

        den = math.lcm(self.u.denominator, self.v.denominator)
        big_u = self.u.numerator * (den // self.u.denominator)
        big_v = self.v.numerator * (den // self.v.denominator)
        # x = (A + B·√D) / C
        a = 2 * big_u + self.ring.p * big_v
        b = big_v
        c = 2 * den
        if b == 0:
            return a // c
        radicand = b * b * self.ring.discriminant
        s = math.isqrt(radicand)
        if s * s == radicand:
            return (a + s) // c if b > 0 else (a - s) // c
        # √radicand лежит строго между s и s + 1
        if b > 0:
            return (a + s) // c
        return (a - s - 1) // c

    def embed(self, prec: Precision, which: Embedding = "principal") -> mpmath.mpf:
        return embed(self, prec, which)

    def __repr__(self) -> str:
        return f"QuadElem({self.u}, {self.v}; p={self.ring.p}, q={self.ring.q})"


def mul(x: QuadElem, y: QuadElem) -> QuadElem:
    """Exact product with θ² reduced to pθ + q."""

    if x.ring != y.ring:
        raise RingMismatchError(
            f"cannot multiply elements of different rings {x.ring} and {y.ring}"
        )
    return x * y


def theta_power(ring: RingParams, n: int) -> QuadElem:
    """θ^n as an exact element; equals qF_{n-1} + F_nθ for n ≥ 1."""

    if n < 0:
        raise DomainError(f"theta_power expects n ≥ 0, got {n}")
    return ring.theta_elem ** n


@lru_cache(maxsize=4096)
def _recurrence(p: int, q: int, n: int) -> int:
    prev, cur = 0, 1
    if n == 0:
        return 0
    for _ in range(n - 1):
        prev, cur = cur, p * cur + q * prev
    return cur


def recurrence_f(ring: RingParams, n: int) -> int:
    """F_n with F_0 = 0, F_1 = 1 and F_n = pF_{n-1} + qF_{n-2}."""

    if n < 0:
        raise DomainError(f"recurrence_f expects n ≥ 0, got {n}")
    return _recurrence(ring.p, ring.q, n)


def _embed_principal(x: QuadElem) -> mpmath.mpf:
    """u + vθ at the current precision, without cancellation near zero."""

    if x.v == 0:
        return rational_to_mpf(x.u)
    theta = x.ring.theta()
    head = rational_to_mpf(x.u)
    tail = rational_to_mpf(x.v) * theta
    value = head + tail
    if value != 0 and mpmath.mag(value) >= max(mpmath.mag(head), mpmath.mag(tail)) - mp.prec // 2:
        return value
    norm = x.norm()
    if norm == 0:
        return value
    # x = N(x) / x', а x' велико, когда x мало
    conj = rational_to_mpf(x.u + x.ring.p * x.v) - rational_to_mpf(x.v) * theta
    return rational_to_mpf(norm) / conj


def embed(x: QuadElem, prec: Precision, which: Embedding = "principal") -> mpmath.mpf:
    """Real value of x under the principal (θ) or conjugate (θ') embedding."""

    if which == "conjugate":
        x = x.conjugate()
    elif which != "principal":
        raise DomainError(f"unknown embedding {which!r}")
    with prec.context():
        return _embed_principal(x)


def frac_and_dist(
    x: Union[QuadElem, RealLike], prec: Precision
) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """Returns ({x}, ‖x‖) at the requested precision.

    Для элементов поля целая часть вычисляется точно, поэтому исчерпание
    точности возможно только для вещественных значений, у которых целая
    часть съела почти всю мантиссу.
    """

    with prec.context():
        if isinstance(x, QuadElem):
            frac = field_fraction(x)
        elif isinstance(x, Rational):
            frac = rational_to_mpf(x - math.floor(x))
        else:
            value = mp.mpf(x)
            if not mp.isfinite(value):
                raise DomainError(f"frac_and_dist expects a finite value, got {value}")
            frac = reduce_mod_one(value)
        if frac >= 1:
            frac -= 1
        elif frac < 0:
            frac += 1
        return frac, min(frac, 1 - frac)


def field_fraction(x: QuadElem) -> mpmath.mpf:
    """{x} for a field element; the caller holds the precision context."""

    return _embed_principal(x - x.floor())


def reduce_mod_one(value: mpmath.mpf) -> mpmath.mpf:
    """{value} for a rounded real; the caller holds the precision context."""

    whole = mp.floor(value)
    if whole != 0 and mpmath.mag(value) > mp.prec - GUARD_BITS:
        raise PrecisionExhaustedError(mp.prec, int(mpmath.mag(value)))
    return value - whole
