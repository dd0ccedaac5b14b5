from __future__ import annotations

from fractions import Fraction
from pathlib import Path
import sys
import unittest

from mpmath import mp

sys.path.append(str(Path(__file__).resolve().parents[1]))

from app.errors import DomainError, InvalidRingError, PrecisionExhaustedError, RingMismatchError
from app.quadfield import (
    Precision,
    QuadElem,
    RingParams,
    embed,
    frac_and_dist,
    mul,
    recurrence_f,
    theta_power,
)

FIBONACCI = RingParams(1, 1)


def class_rings(p_max: int):
    return [RingParams(p, q) for p in range(1, p_max + 1) for q in range(1, p + 1)]


class TestRingParams(unittest.TestCase):
    def test_rejects_rules_outside_the_class(self) -> None:
        with self.assertRaises(InvalidRingError):
            RingParams(1, 2)
        with self.assertRaises(InvalidRingError):
            RingParams(0, 1)

    def test_unchecked_ring_outside_the_class(self) -> None:
        ring = RingParams(1, 2, validate=False)
        with mp.workprec(128):
            self.assertEqual(ring.theta(), 2)
            self.assertEqual(ring.theta_conj(), -1)

    def test_conjugate_lies_inside_unit_disc(self) -> None:
        with mp.workprec(128):
            for ring in class_rings(6):
                self.assertGreater(ring.theta(), 1)
                self.assertLess(abs(ring.theta_conj()), 1, ring)

    def test_precision_scaling_rule(self) -> None:
        self.assertEqual(Precision.for_level(FIBONACCI, 30).bits, 21 + 128)
        self.assertEqual(Precision.for_level(FIBONACCI, 0).bits, 128)
        with self.assertRaises(DomainError):
            Precision(32)


class TestQuadElemArithmetic(unittest.TestCase):
    def test_theta_power_matches_recurrence(self) -> None:
        for ring in class_rings(4):
            for n in range(1, 26):
                expected = QuadElem(ring.q * recurrence_f(ring, n - 1), recurrence_f(ring, n), ring)
                self.assertEqual(theta_power(ring, n), expected)

    def test_fibonacci_table(self) -> None:
        self.assertEqual(
            [recurrence_f(FIBONACCI, n) for n in range(11)],
            [0, 1, 1, 2, 3, 5, 8, 13, 21, 34, 55],
        )

    def test_recurrence_matches_closed_form(self) -> None:
        with mp.workprec(512):
            for ring in class_rings(4):
                root = mp.sqrt(ring.discriminant)
                theta, conj = ring.theta(), ring.theta_conj()
                for n in range(51):
                    closed = mp.nint((theta ** n - conj ** n) / root)
                    self.assertEqual(recurrence_f(ring, n), int(closed), (ring, n))

    def test_field_laws(self) -> None:
        ring = RingParams(2, 1)
        x = QuadElem(Fraction(3, 2), -2, ring)
        y = QuadElem(-1, Fraction(1, 3), ring)
        self.assertEqual(x * x.inverse(), ring.one)
        self.assertEqual((x * y) / y, x)
        self.assertEqual((x * y).norm(), x.norm() * y.norm())
        self.assertEqual(QuadElem(x.trace(), 0, ring), x + x.conjugate())
        self.assertEqual(x ** 3, x * x * x)
        self.assertEqual(x ** -2, (x * x).inverse())

    def test_mixing_rings_is_rejected(self) -> None:
        with self.assertRaises(RingMismatchError):
            mul(FIBONACCI.theta_elem, RingParams(2, 1).theta_elem)
        with self.assertRaises(RingMismatchError):
            FIBONACCI.one + RingParams(2, 2).one

    def test_floor_is_exact(self) -> None:
        with mp.workprec(2048):
            for ring in class_rings(3):
                for n in range(0, 60, 7):
                    x = theta_power(ring, n) * QuadElem(Fraction(-2, 3), Fraction(5, 7), ring)
                    value = mp.mpf(x.u.numerator) / x.u.denominator
                    value += mp.mpf(x.v.numerator) / x.v.denominator * ring.theta()
                    self.assertEqual(x.floor(), int(mp.floor(value)))
        self.assertEqual(QuadElem(0, -1, FIBONACCI).floor(), -2)
        self.assertEqual(QuadElem(Fraction(7, 2), 0, FIBONACCI).floor(), 3)


class TestEmbedding(unittest.TestCase):
    def test_principal_and_conjugate(self) -> None:
        prec = Precision(128)
        with mp.workprec(128):
            tau = (1 + mp.sqrt(5)) / 2
        self.assertAlmostEqual(float(embed(FIBONACCI.theta_elem, prec)), float(tau), places=14)
        self.assertAlmostEqual(
            float(embed(FIBONACCI.theta_elem, prec, "conjugate")), float(1 - tau), places=14
        )

    def test_small_elements_keep_relative_accuracy(self) -> None:
        prec = Precision(256)
        small = theta_power(FIBONACCI, 40).inverse()
        value = embed(small, prec)
        with mp.workprec(1024):
            reference = mp.power((1 + mp.sqrt(5)) / 2, -40)
            self.assertLess(abs(value - reference) / reference, mp.mpf(2) ** -200)

    def test_theta_power_embeds_as_power(self) -> None:
        prec = Precision(256)
        for ring in class_rings(4):
            theta = embed(ring.theta_elem, prec)
            for n in range(0, 51, 5):
                value = embed(theta_power(ring, n), prec)
                with prec.context():
                    self.assertLess(abs(value - theta ** n) / value, mp.mpf(2) ** -200, (ring, n))

    def test_frac_and_dist(self) -> None:
        prec = Precision(128)
        frac, dist = frac_and_dist(FIBONACCI.theta_elem, prec)
        self.assertAlmostEqual(float(frac), 0.6180339887498949, places=14)
        self.assertAlmostEqual(float(dist), 0.3819660112501051, places=14)
        frac, dist = frac_and_dist(Fraction(7, 2), prec)
        self.assertEqual((frac, dist), (0.5, 0.5))
        frac, _ = frac_and_dist(theta_power(FIBONACCI, 200), prec)
        self.assertGreater(frac, 0.99)

    def test_real_value_beyond_precision_is_refused(self) -> None:
        with self.assertRaises(PrecisionExhaustedError):
            frac_and_dist(mp.mpf(2) ** 300 + mp.mpf(1) / 3, Precision(256))
        with mp.workprec(256):
            value = mp.mpf(2) ** 100 + mp.mpf(1) / 4
        frac, _ = frac_and_dist(value, Precision(256))
        self.assertEqual(frac, 0.25)


if __name__ == "__main__":
    unittest.main()
