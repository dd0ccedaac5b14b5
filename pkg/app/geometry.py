"""Geometric realisation of words on the line, star map, windows and densities."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import mpmath
from mpmath import mp

from app.errors import DomainError
from app.quadfield import Precision, QuadElem, RingParams, embed, rational_to_mpf
from app.substitution import DEFAULT_SIZE_CAP, BinaryPisotRule, Word, iterate

logger = logging.getLogger(__name__)

PatchRow = Tuple[int, str, int, int, mpmath.mpf, mpmath.mpf]


@dataclass(frozen=True)
class Patch:
    """Tiles of a word laid out from 0: a has length θ, b has length 1.

    Attributes:
        letters: the underlying word.
        positions: exact left endpoints of the tiles in Z[θ].
        ring: ring of the inflation factor.
        total_length: exact length of the patch, θ^n for w^(n).
    """

    letters: Word
    positions: Tuple[QuadElem, ...]
    ring: RingParams
    total_length: QuadElem

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def level(self) -> Optional[int]:
        return self.letters.level


@dataclass(frozen=True)
class WindowEstimate:
    """Hull [lo, hi] of the star images of a level-n patch."""

    lo: mpmath.mpf
    hi: mpmath.mpf
    certified: bool
    level: int

    @property
    def width(self) -> mpmath.mpf:
        return self.hi - self.lo


def realize(word: Word, ring: RingParams) -> Patch:
    """Left endpoints as cumulative exact sums of the tile lengths."""

    positions: List[QuadElem] = []
    u = v = 0
    for letter in word.letters:
        positions.append(QuadElem(u, v, ring))
        if letter == "a":
            v += 1
        else:
            u += 1
    return Patch(word, tuple(positions), ring, QuadElem(u, v, ring))


def translate(patch: Patch, shift: QuadElem) -> Patch:
    """Moves every point of the patch by the same exact offset."""

    return Patch(
        patch.letters,
        tuple(x + shift for x in patch.positions),
        patch.ring,
        patch.total_length,
    )


def star_points(patch: Patch, prec: Precision) -> List[mpmath.mpf]:
    """Images u + vθ' of all positions under the conjugate embedding."""

    with prec.context():
        theta_conj = patch.ring.theta_conj()
        return [
            rational_to_mpf(x.u) + rational_to_mpf(x.v) * theta_conj
            for x in patch.positions
        ]


def window_estimate(
    rule: BinaryPisotRule,
    n: int,
    prec: Precision,
    *,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> WindowEstimate:
    """[min, max] of the star images of w^(n); certified only for q = 1."""

    patch = realize(iterate(rule, n, size_cap=size_cap), rule.ring)
    stars = star_points(patch, prec)
    certified = rule.q == 1
    if not certified:
        # окно при q ≥ 2 может быть фрактальным, оценка только справочная
        logger.warning(
            "Window for %s is not certified (q=%s); the hull is advisory only",
            rule.spec(),
            rule.q,
        )
    return WindowEstimate(lo=min(stars), hi=max(stars), certified=certified, level=n)


def density(patch: Patch, prec: Precision) -> mpmath.mpf:
    """Point count per unit length of the patch."""

    if len(patch) == 0:
        raise DomainError("density of an empty patch is undefined")
    length = embed(patch.total_length, prec)
    with prec.context():
        return mp.mpf(len(patch)) / length


def patch_rows(patch: Patch, prec: Precision) -> List[PatchRow]:
    """Rows (index, letter, u, v, position, star) for the patch export."""

    stars = star_points(patch, prec)
    rows: List[PatchRow] = []
    for index, (letter, x, star) in enumerate(zip(patch.letters.letters, patch.positions, stars)):
        rows.append((index, letter, x.u, x.v, embed(x, prec), star))
    return rows
