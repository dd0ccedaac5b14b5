"""Exception types shared by the numeric core and the command line.

Исключения с дополнительными полями переопределяют ``__reduce__``: они
передаются из процессов пула обратно через pickle.
"""
from __future__ import annotations


class PisotError(Exception):
    """Base class for all domain failures raised by the package."""


class ConfigError(PisotError, ValueError):
    """Invalid configuration value, flag or config file."""


def _rule_spec_error(message: str, text: str, position: int) -> "RuleSpecError":
    return RuleSpecError(message, text=text, position=position)


class RuleSpecError(ConfigError):
    """Rule string that cannot be parsed; keeps the offending position."""

    def __init__(self, message: str, *, text: str, position: int) -> None:
        self.message = message
        self.text = text
        self.position = position
        caret = " " * position + "^"
        super().__init__(f"{message} at position {position}\n  {text}\n  {caret}")

    def __reduce__(self):
        return _rule_spec_error, (self.message, self.text, self.position)


class InvalidRingError(PisotError, ValueError):
    """Parameters outside the binary Pisot class."""


class RingMismatchError(PisotError, ValueError):
    """Arithmetic between elements of different quadratic rings."""


class DomainError(PisotError, ValueError):
    """Argument outside the domain of an operation."""


class RefusedInputError(PisotError, ValueError):
    """Input excluded by the hypothesis of an operation."""


class WitnessNotFoundError(PisotError):
    """No (δ, r) pair passed the scan; ``best_r`` maps each δ to its smallest r or None."""

    def __init__(self, best_r: dict) -> None:
        self.best_r = best_r
        super().__init__(
            f"no δ on the grid admits r within bounds (scanned {len(best_r)} values of δ)"
        )

    def __reduce__(self):
        return type(self), (self.best_r,)


class SizeCapError(PisotError):
    """A word would grow beyond the configured size cap."""

    def __init__(self, predicted: int, cap: int) -> None:
        self.predicted = predicted
        self.cap = cap
        super().__init__(
            f"Word of {predicted} letters exceeds the size cap of {cap} letters. "
            "Lower the level or raise PISOT_SIZE_CAP."
        )

    def __reduce__(self):
        return type(self), (self.predicted, self.cap)


class PrecisionExhaustedError(PisotError, ArithmeticError):
    """Working precision leaves too few fractional bits; retry with more bits."""

    def __init__(self, bits: int, magnitude: int) -> None:
        self.bits = bits
        self.magnitude = magnitude
        super().__init__(
            f"{bits} bits cannot resolve the fractional part of a value of "
            f"magnitude 2^{magnitude}; increase the precision"
        )

    def __reduce__(self):
        return type(self), (self.bits, self.magnitude)
