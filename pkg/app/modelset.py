"""Fourier module Z[λ_m]/√(m²+4) of the noble means family and closed-form amplitudes."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Literal, Optional, Sequence, Tuple, Union

import mpmath
from mpmath import mp

from app.errors import DomainError, RefusedInputError, RingMismatchError
from app.geometry import WindowEstimate, window_estimate
from app.quadfield import Precision, QuadElem, RingParams, embed, theta_power
from app.substitution import DEFAULT_SIZE_CAP, BinaryPisotRule, counts
from app.wavenumber import WaveNumber

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_LEVEL = 24

Classification = Literal["module", "field", "off-field"]
SpectrumRow = Tuple[int, int, mpmath.mpf, mpmath.mpf, mpmath.mpf, mpmath.mpf]


def _ring(m: int) -> RingParams:
    if m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    return RingParams(m, 1)


@dataclass(frozen=True)
class ModulePoint:
    """k = (c + d·λ_m)/√(m²+4); (c, d) is unique per k."""

    c: int
    d: int
    m: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")

    def _check(self, other: "ModulePoint") -> None:
        if other.m != self.m:
            raise RingMismatchError(f"module points for m={self.m} and m={other.m} do not mix")

    def __add__(self, other: "ModulePoint") -> "ModulePoint":
        self._check(other)
        return ModulePoint(self.c + other.c, self.d + other.d, self.m)

    def __sub__(self, other: "ModulePoint") -> "ModulePoint":
        self._check(other)
        return ModulePoint(self.c - other.c, self.d - other.d, self.m)

    def __neg__(self) -> "ModulePoint":
        return ModulePoint(-self.c, -self.d, self.m)

    @property
    def ring(self) -> RingParams:
        return _ring(self.m)

    def element(self) -> QuadElem:
        """k as an element of Q(λ_m), using 1/√(m²+4) = (2λ_m − m)/(m²+4)."""

        ring = self.ring
        numerator = QuadElem(self.c, self.d, ring) * QuadElem(-self.m, 2, ring)
        return numerator / (self.m * self.m + 4)

    def to_wave_number(self) -> WaveNumber:
        ring = self.ring
        numerator = QuadElem(self.c, self.d, ring) * QuadElem(-self.m, 2, ring)
        return WaveNumber.field(numerator, self.m * self.m + 4)

    def value(self, prec: Precision) -> mpmath.mpf:
        return embed(self.element(), prec)

    def star(self, prec: Precision) -> mpmath.mpf:
        """k* = (c + dλ'_m)/(−√(m²+4)), the Galois image of k."""

        return embed(self.element(), prec, "conjugate")


@dataclass(frozen=True)
class WindowSpec:
    lo: mpmath.mpf
    hi: mpmath.mpf
    certified: bool

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise DomainError(f"window needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def measure(self) -> mpmath.mpf:
        return self.hi - self.lo

    @classmethod
    def from_estimate(cls, estimate: WindowEstimate) -> "WindowSpec":
        return cls(estimate.lo, estimate.hi, estimate.certified)


def _coordinates(k: WaveNumber, m: int) -> QuadElem:
    if not k.is_field:
        raise RefusedInputError(
            f"k={k.label} is a real literal; module membership cannot be decided numerically"
        )
    ring = _ring(m)
    element = k.element
    if element.ring != ring:
        if not element.is_rational():
            raise RingMismatchError(
                f"k={k.label} belongs to Q(θ) for (p, q)={element.ring.p, element.ring.q}, not to Q(λ_{m})"
            )
        element = QuadElem(element.u, element.v, ring)
    return element


def module_point(k: WaveNumber, m: int) -> Optional[ModulePoint]:
    """(c, d) with k = (c + dλ_m)/√(m²+4), or None when k is outside the module."""

    element = _coordinates(k, m)
    u, v = Fraction(element.u), Fraction(element.v)
    c = 2 * v - m * u
    d = 2 * u + m * v
    if c.denominator != 1 or d.denominator != 1:
        return None
    return ModulePoint(int(c), int(d), m)


def is_in_module(k: WaveNumber, m: int) -> bool:
    return module_point(k, m) is not None


def classify_wave_number(k: WaveNumber, m: int) -> Classification:
    """``module``, ``field`` (in Q(λ_m) but not the module) or ``off-field`` for real literals."""

    if not k.is_field:
        return "off-field"
    return "module" if is_in_module(k, m) else "field"


def enumerate_module(
    m: int, k_max: Union[int, float, mpmath.mpf], coeff_bound: int, prec: Precision = Precision()
) -> List[ModulePoint]:
    """Module points with |c|, |d| ≤ coeff_bound and 0 ≤ k ≤ k_max, ascending in k."""

    if k_max < 0:
        raise DomainError(f"k_max must be nonnegative, got {k_max}")
    if coeff_bound < 1:
        raise DomainError(f"coeff_bound must be at least 1, got {coeff_bound}")
    found = []
    with prec.context():
        limit = mp.mpf(k_max)
        for c in range(-coeff_bound, coeff_bound + 1):
            for d in range(-coeff_bound, coeff_bound + 1):
                point = ModulePoint(c, d, m)
                value = point.value(prec)
                if 0 <= value <= limit:
                    found.append((value, c, d, point))
    found.sort(key=lambda item: item[:3])
    return [item[3] for item in found]


def modelset_amplitude(
    m: int,
    pt: ModulePoint,
    window: WindowSpec,
    dens: Union[int, mpmath.mpf],
    prec: Precision,
) -> mpmath.mpc:
    """dens/μ(W)·∫_W e^{2πik*t} dt for the interval window W = [lo, hi]."""

    if pt.m != m:
        raise RingMismatchError(f"module point for m={pt.m} used with m={m}")
    if not window.certified:
        raise RefusedInputError("the window is not certified; the closed form needs an interval window")
    width = window.measure
    if width <= 0:
        raise DomainError("window has zero measure")
    star = pt.star(prec)
    with prec.context():
        # ∫_lo^hi e^{2πist} dt = w·e^{πis(lo+hi)}·sinc(πsw)
        return dens * mp.expjpi(star * (window.lo + window.hi)) * mp.sincpi(star * width)


def window_and_density(
    rule: BinaryPisotRule,
    prec: Precision,
    *,
    level: int = DEFAULT_WINDOW_LEVEL,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> Tuple[WindowSpec, mpmath.mpf]:
    """Window hull and point density taken from the level-``level`` patch."""

    if rule.q != 1:
        raise RefusedInputError(
            f"{rule.spec()} has q={rule.q}; only the q = 1 family has interval windows"
        )
    window = WindowSpec.from_estimate(window_estimate(rule, level, prec, size_cap=size_cap))
    a_count, b_count = counts(rule, level)
    length = embed(theta_power(rule.ring, level), prec)
    with prec.context():
        dens = (a_count + b_count) / length
    logger.debug("Window for %s at level %s: [%s, %s], dens=%s", rule.spec(), level, window.lo, window.hi, dens)
    return window, dens


def relative_error(formula: mpmath.mpf, measured: mpmath.mpf) -> mpmath.mpf:
    diff = abs(formula - measured)
    return diff / formula if formula > 0 else diff


def spectrum_rows(
    rule: BinaryPisotRule,
    points: Sequence[ModulePoint],
    measured: Sequence[mpmath.mpf],
    window: WindowSpec,
    dens: mpmath.mpf,
    prec: Precision,
) -> List[SpectrumRow]:
    """Rows (c, d, k_value, intensity_formula, intensity_expsum, rel_error)."""

    rows: List[SpectrumRow] = []
    for point, intensity in zip(points, measured):
        amplitude = modelset_amplitude(rule.p, point, window, dens, prec)
        with prec.context():
            formula = abs(amplitude) ** 2
            rows.append(
                (point.c, point.d, point.value(prec), formula, intensity, relative_error(formula, intensity))
            )
    return rows
