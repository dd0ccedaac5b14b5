"""Wave numbers: real literals evaluated on demand, or exact elements of Q(θ)."""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Dict, Literal, Optional

import mpmath
from mpmath import mp

from app.errors import DomainError
from app.quadfield import (
    Precision,
    QuadElem,
    RingParams,
    field_fraction,
    rational_to_mpf,
    reduce_mod_one,
)

Kind = Literal["real", "field"]

_CONSTANTS: Dict[str, Callable[[], mpmath.mpf]] = {
    "pi": lambda: +mp.pi,
    "e": lambda: +mp.e,
}
_SQRT = re.compile(r"sqrt\((?P<arg>[^()]+)\)")
_INTEGER = re.compile(r"-?\d+")
_RATIONAL = re.compile(r"-?\d+/\d+")
_ELEMENT = re.compile(
    r"\[\s*(?P<u>-?\d+(?:/\d+)?)\s*,\s*(?P<v>-?\d+(?:/\d+)?)\s*\](?:/(?P<den>\d+))?"
)


def _number(token: str) -> mpmath.mpf:
    numerator, _, denominator = token.partition("/")
    value = mp.mpf(numerator.strip())
    if denominator:
        value /= mp.mpf(denominator.strip())
    return value


def evaluate_real(expr: str) -> mpmath.mpf:
    """Evaluates ``[-]factor[*factor…]`` with factors pi, e, sqrt(x) or decimals.

    Точность берется из текущего контекста mpmath.
    """

    text = expr.strip()
    sign = 1
    if text.startswith("-"):
        sign, text = -1, text[1:]
    value = mp.mpf(1)
    try:
        for factor in text.split("*"):
            factor = factor.strip()
            if factor in _CONSTANTS:
                value *= _CONSTANTS[factor]()
                continue
            match = _SQRT.fullmatch(factor)
            if match:
                value *= mp.sqrt(_number(match.group("arg")))
            else:
                value *= _number(factor)
    except ValueError as exc:
        raise DomainError(f"cannot evaluate wave number {expr!r}: {exc}") from exc
    if not mp.isfinite(value):
        raise DomainError(f"wave number {expr!r} is not finite")
    return sign * value


@dataclass(frozen=True)
class WaveNumber:
    """Wave number k: a real literal or (u + vθ)/den with den ≥ 1."""

    kind: Kind
    expr: Optional[str] = None
    numerator: Optional[QuadElem] = None
    den: int = 1

    def __post_init__(self) -> None:
        if self.kind == "real":
            if not self.expr:
                raise DomainError("a real wave number needs an expression")
            with mp.workprec(64):
                evaluate_real(self.expr)
        elif self.kind == "field":
            if self.numerator is None:
                raise DomainError("a field wave number needs a numerator")
            if self.den < 1:
                raise DomainError(f"denominator must be at least 1, got {self.den}")
        else:
            raise DomainError(f"unknown wave number kind {self.kind!r}")

    @classmethod
    def real(cls, expr: str) -> "WaveNumber":
        return cls("real", expr=expr)

    @classmethod
    def field(cls, numerator: QuadElem, den: int = 1) -> "WaveNumber":
        return cls("field", numerator=numerator, den=den)

    @classmethod
    def rational(cls, value: Rational, ring: RingParams) -> "WaveNumber":
        value = Fraction(value)
        return cls.field(QuadElem(value.numerator, 0, ring), value.denominator)

    @classmethod
    def parse(cls, text: str, ring: RingParams) -> "WaveNumber":
        """Integers, ``a/b`` and ``[u,v]/den`` are field elements; the rest is a real literal."""

        token = text.strip()
        if _INTEGER.fullmatch(token) or _RATIONAL.fullmatch(token):
            return cls.rational(Fraction(token), ring)
        match = _ELEMENT.fullmatch(token)
        if match:
            element = QuadElem(Fraction(match.group("u")), Fraction(match.group("v")), ring)
            return cls.field(element, int(match.group("den") or 1))
        return cls.real(token)

    @property
    def is_field(self) -> bool:
        return self.kind == "field"

    @property
    def element(self) -> QuadElem:
        if not self.is_field:
            raise DomainError(f"{self.label} is a real literal, not a field element")
        return self.numerator / self.den if self.den != 1 else self.numerator

    @property
    def label(self) -> str:
        if not self.is_field:
            return self.expr
        x = self.numerator
        if x.v == 0:
            return str(Fraction(x.u) / self.den)
        suffix = f"/{self.den}" if self.den != 1 else ""
        return f"[{x.u},{x.v}]{suffix}"

    def value(self, prec: Precision) -> mpmath.mpf:
        with prec.context():
            if self.is_field:
                return self.element.embed(prec)
            return evaluate_real(self.expr)

    def phase_function(self, ring: RingParams) -> Callable[[QuadElem], mpmath.mpf]:
        """Returns x ↦ {k·x}; call it inside the precision context.

        Для элементов поля произведение точное, для литералов k·θ
        вычисляется один раз на текущей точности.
        """

        if self.is_field:
            k = self.element
            if k.ring != ring:
                k = QuadElem(k.u, k.v, ring) if k.is_rational() else k
            return lambda x: field_fraction(k * x)
        k_value = evaluate_real(self.expr)
        k_theta = k_value * ring.theta()

        def phase(x: QuadElem) -> mpmath.mpf:
            return reduce_mod_one(k_value * rational_to_mpf(x.u) + k_theta * rational_to_mpf(x.v))

        return phase
