"""Binary Pisot substitutions, random noble-means substitutions and their sampling."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from app.errors import DomainError, InvalidRingError, RuleSpecError, SizeCapError
from app.quadfield import Precision, QuadElem, RingParams

logger = logging.getLogger(__name__)

DEFAULT_SIZE_CAP = 10_000_000
PROBABILITY_TOLERANCE = 1e-12

Matrix2 = Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]


def _check_letters(letters: str) -> None:
    if letters.replace("a", "").replace("b", ""):
        bad = next(ch for ch in letters if ch not in "ab")
        raise DomainError(f"words are over the alphabet {{a, b}}, found {bad!r}")


@dataclass(frozen=True)
class Word:
    """Finite word over {a, b}; ``level`` is n when the word is σ^n(b).

    Letters are kept as a plain ``str``: one byte per letter, and the
    substitution itself is a single ``str.translate`` per level.
    """

    letters: str
    level: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.letters:
            raise DomainError("a word must contain at least one letter")
        _check_letters(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters

    def counts(self) -> Tuple[int, int]:
        a_count = self.letters.count("a")
        return a_count, len(self.letters) - a_count


@dataclass(frozen=True)
class BinaryPisotRule:
    """σ: a ↦ w(a, b), b ↦ a, with p letters a and q letters b in w."""

    image_word: str
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.image_word:
            raise DomainError("the image of a must be a nonempty word")
        _check_letters(self.image_word)
        # создание кольца проверяет p ≥ q ≥ 1
        _ = self.ring

    @property
    def p(self) -> int:
        return self.image_word.count("a")

    @property
    def q(self) -> int:
        return self.image_word.count("b")

    @cached_property
    def ring(self) -> RingParams:
        return RingParams(self.p, self.q, validate=self.validate)

    def matrix(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return ((self.p, 1), (self.q, 0))

    def spec(self) -> str:
        return f"w={self.image_word}"


@dataclass(frozen=True)
class RnmsRule:
    """Random noble-means substitution ζ_m with probability vector (p_0, …, p_m)."""

    m: int
    probs: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        if len(self.probs) != self.m + 1:
            raise DomainError(
                f"ζ_{self.m} needs {self.m + 1} probabilities, got {len(self.probs)}"
            )
        exact = tuple(Fraction(p) for p in self.probs)
        if any(p < 0 or p > 1 for p in exact):
            raise DomainError(f"probabilities must lie in [0, 1], got {self.probs}")
        total = sum(exact)
        if abs(total - 1) > PROBABILITY_TOLERANCE:
            raise DomainError(f"probabilities must sum to 1, got {float(total)!r}")
        # точная перенормировка, чтобы сумма была ровно 1
        object.__setattr__(self, "probs", tuple(p / total for p in exact))

    @cached_property
    def ring(self) -> RingParams:
        return RingParams(self.m, 1)

    def variant_word(self, i: int) -> str:
        """Image a^i b a^(m-i) of the letter a under variant i."""

        if not 0 <= i <= self.m:
            raise DomainError(f"variant index must lie in [0, {self.m}], got {i}")
        return "a" * i + "b" + "a" * (self.m - i)

    def as_deterministic(self) -> Optional[BinaryPisotRule]:
        """Deterministic rule reached by a unit probability vector, if any."""

        for i, prob in enumerate(self.probs):
            if prob == 1:
                return BinaryPisotRule(self.variant_word(i))
        return None

    def spec(self) -> str:
        return f"m={self.m};probs=" + ",".join(str(p) for p in self.probs)


Rule = Union[BinaryPisotRule, RnmsRule]


@dataclass(frozen=True)
class Eigensystem:
    """Perron–Frobenius data of a substitution matrix."""

    theta: QuadElem
    theta_value: mpmath.mpf
    theta_conj: mpmath.mpf
    is_pv: bool
    left_eigenvector: Tuple[QuadElem, QuadElem]


def _counts_for_ring(ring: RingParams, n: int) -> Tuple[int, int]:
    if n < 0:
        raise DomainError(f"level must be nonnegative, got {n}")
    a_count, b_count = 0, 1
    for _ in range(n):
        # (a, b) ↦ M_σ·(a, b)
        a_count, b_count = ring.p * a_count + b_count, ring.q * a_count
    return a_count, b_count


def counts(rule: Rule, n: int) -> Tuple[int, int]:
    """Letter counts (a_n, b_n) of σ^n(b) without building the word."""

    return _counts_for_ring(rule.ring, n)


def _check_size(ring: RingParams, n: int, size_cap: int) -> None:
    predicted = sum(_counts_for_ring(ring, n))
    if predicted > size_cap:
        raise SizeCapError(predicted, size_cap)


def iterate(rule: BinaryPisotRule, n: int, *, size_cap: int = DEFAULT_SIZE_CAP) -> Word:
    """w^(n) = σ^n(b)."""

    _check_size(rule.ring, n, size_cap)
    table = str.maketrans({"a": rule.image_word, "b": "a"})
    letters = "b"
    for _ in range(n):
        letters = letters.translate(table)
    return Word(letters, level=n)


def _eigen_for_ring(ring: RingParams, prec: Precision) -> Eigensystem:
    with prec.context():
        root = mpmath.mp.sqrt(ring.discriminant)
        theta = (ring.p + root) / 2
        theta_conj = (ring.p - root) / 2
        is_pv = bool(theta > 1 and abs(theta_conj) < 1)
    return Eigensystem(
        theta=ring.theta_elem,
        theta_value=theta,
        theta_conj=theta_conj,
        is_pv=is_pv,
        left_eigenvector=(ring.theta_elem, ring.one),
    )


def eigen(rule: BinaryPisotRule, prec: Precision = Precision()) -> Eigensystem:
    """θ, θ' and the PV verdict for the substitution matrix of ``rule``."""

    return _eigen_for_ring(rule.ring, prec)


def blocks(rule: BinaryPisotRule, n: int) -> List[Tuple[str, int]]:
    """Concatenation rule w^(n) = w^(j_0)···w^(j_{L-1})."""

    if n < 2:
        raise DomainError(f"blocks needs n ≥ 2, got {n}")
    return [(letter, n - 1 if letter == "a" else n - 2) for letter in rule.image_word]


def level_generator(seed: int, stream: int, level: int) -> np.random.Generator:
    """Counter-based Philox stream for one inflation level of one realization."""

    if seed < 0:
        raise DomainError(f"seed must be nonnegative, got {seed}")
    sequence = np.random.SeedSequence(seed, spawn_key=(stream, level))
    return np.random.Generator(np.random.Philox(sequence))


def sample_rnms(
    rule: RnmsRule,
    n: int,
    seed: int,
    *,
    stream: int = 0,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> Word:
    """One realization of ζ_m^n(b); every letter a draws its variant independently."""

    _check_size(rule.ring, n, size_cap)
    probs = np.array([float(p) for p in rule.probs])
    # 0 = a, 1 = b
    word = np.ones(1, dtype=np.uint8)
    for level in range(n):
        rng = level_generator(seed, stream, level)
        is_a = word == 0
        lengths = np.where(is_a, rule.m + 1, 1)
        starts = np.cumsum(lengths) - lengths
        variants = rng.choice(rule.m + 1, size=int(is_a.sum()), p=probs)
        image = np.zeros(int(lengths.sum()), dtype=np.uint8)
        image[starts[is_a] + variants] = 1
        word = image
        logger.debug("RNMS level %s: %s letters", level + 1, word.size)
    letters = np.where(word == 1, ord("b"), ord("a")).astype(np.uint8).tobytes().decode("ascii")
    return Word(letters, level=n)


def stochastic_matrix(rule: RnmsRule) -> Matrix2:
    """Expected letter counts of the images, weighted by the probability vector."""

    column_a = [Fraction(0), Fraction(0)]
    for i, prob in enumerate(rule.probs):
        image = rule.variant_word(i)
        column_a[0] += prob * image.count("a")
        column_a[1] += prob * image.count("b")
    # b ↦ a детерминировано
    column_b = (Fraction(1), Fraction(0))
    return ((column_a[0], column_b[0]), (column_a[1], column_b[1]))


def rnms_matrix(rule: RnmsRule) -> np.ndarray:
    """M_m = [[m, 1], [1, 0]]; does not depend on the probability vector."""

    return np.array(stochastic_matrix(rule), dtype=float)


def rnms_eigen(rule: RnmsRule, prec: Precision = Precision()) -> Eigensystem:
    """λ_m, λ'_m and the left eigenvector (λ_m, 1)."""

    return _eigen_for_ring(rule.ring, prec)


def parse_rule(text: str) -> Rule:
    """Parses ``w=<word>`` or ``m=<int>;probs=<comma-list>``."""

    source = text.strip()
    offset = len(text) - len(text.lstrip())
    if source.startswith("w="):
        word = source[2:]
        if not word:
            raise RuleSpecError("empty image word", text=text, position=offset + 2)
        for index, letter in enumerate(word):
            if letter not in "ab":
                raise RuleSpecError(
                    f"unexpected letter {letter!r}", text=text, position=offset + 2 + index
                )
        try:
            return BinaryPisotRule(word)
        except InvalidRingError as exc:
            raise RuleSpecError(str(exc), text=text, position=offset + 2) from exc
    if source.startswith("m="):
        return _parse_rnms(text, source, offset)
    raise RuleSpecError("expected 'w=<word>' or 'm=<int>;probs=<list>'", text=text, position=offset)


def _parse_rnms(text: str, source: str, offset: int) -> RnmsRule:
    head, sep, tail = source.partition(";")
    try:
        m = int(head[2:])
    except ValueError:
        raise RuleSpecError("m must be an integer", text=text, position=offset + 2) from None
    if not sep or not tail.startswith("probs="):
        raise RuleSpecError(
            "expected ';probs=' after m", text=text, position=offset + len(head)
        )
    position = offset + len(head) + 1 + len("probs=")
    probs: List[Fraction] = []
    for chunk in tail[len("probs="):].split(","):
        try:
            probs.append(Fraction(chunk.strip()))
        except (ValueError, ZeroDivisionError):
            raise RuleSpecError(
                f"cannot read probability {chunk!r}", text=text, position=position
            ) from None
        position += len(chunk) + 1
    try:
        return RnmsRule(m, tuple(probs))
    except DomainError as exc:
        raise RuleSpecError(str(exc), text=text, position=offset) from exc


def pisot_rules(words: Sequence[str]) -> List[BinaryPisotRule]:
    """Rules for every listed image word, skipping words outside the Pisot class."""

    rules = []
    for word in words:
        try:
            rules.append(BinaryPisotRule(word))
        except InvalidRingError:
            logger.debug("Skipping %s: not a Pisot substitution", word)
    return rules
