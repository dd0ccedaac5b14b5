from __future__ import annotations

from pathlib import Path
import sys
import unittest

from mpmath import mp

sys.path.append(str(Path(__file__).resolve().parents[1]))

from app.geometry import density, patch_rows, realize, star_points, translate, window_estimate
from app.quadfield import Precision, QuadElem, theta_power
from app.substitution import BinaryPisotRule, Word, iterate

FIBONACCI = BinaryPisotRule("ab")
GOLDEN = 1.618033988749895


class TestRealize(unittest.TestCase):
    def test_left_endpoints(self) -> None:
        ring = FIBONACCI.ring
        patch = realize(Word("aba"), ring)
        self.assertEqual(
            patch.positions,
            (QuadElem(0, 0, ring), QuadElem(0, 1, ring), QuadElem(1, 1, ring)),
        )
        self.assertEqual(patch.total_length, QuadElem(1, 2, ring))

    def test_total_length_is_theta_power(self) -> None:
        for rule in (FIBONACCI, BinaryPisotRule("aab"), BinaryPisotRule("abab")):
            for n in range(0, 11):
                patch = realize(iterate(rule, n), rule.ring)
                self.assertEqual(patch.total_length, theta_power(rule.ring, n))
                self.assertEqual(patch.level, n)

    def test_translate(self) -> None:
        ring = FIBONACCI.ring
        patch = realize(iterate(FIBONACCI, 5), ring)
        shift = QuadElem(2, -1, ring)
        moved = translate(patch, shift)
        self.assertEqual(len(moved), len(patch))
        self.assertEqual(moved.positions[3], patch.positions[3] + shift)


class TestWindow(unittest.TestCase):
    def test_fibonacci_window_has_length_theta(self) -> None:
        estimate = window_estimate(FIBONACCI, 16, Precision(128))
        self.assertTrue(estimate.certified)
        self.assertAlmostEqual(float(estimate.width), GOLDEN, delta=1e-2)
        self.assertLessEqual(estimate.lo, 0)
        self.assertGreater(estimate.hi, 0)

    def test_window_stabilizes(self) -> None:
        prec = Precision(128)
        first = window_estimate(FIBONACCI, 22, prec)
        second = window_estimate(FIBONACCI, 24, prec)
        with mp.workprec(128):
            self.assertLess(abs(second.width - first.width), 1e-3)

    def test_hull_grows_with_the_level(self) -> None:
        prec = Precision(128)
        estimates = [window_estimate(FIBONACCI, n, prec) for n in range(2, 19)]
        for previous, current in zip(estimates, estimates[1:]):
            self.assertLessEqual(current.lo, previous.lo, current.level)
            self.assertGreaterEqual(current.hi, previous.hi, current.level)

    def test_q_two_window_is_advisory(self) -> None:
        with self.assertLogs("app.geometry", level="WARNING"):
            estimate = window_estimate(BinaryPisotRule("aabb"), 6, Precision(128))
        self.assertFalse(estimate.certified)

    def test_density_converges(self) -> None:
        prec = Precision(128)
        patch = realize(iterate(FIBONACCI, 20), FIBONACCI.ring)
        with mp.workprec(128):
            expected = (1 + mp.sqrt(5)) / 2 / mp.sqrt(5)
        self.assertAlmostEqual(float(density(patch, prec)), float(expected), places=6)

    def test_density_error_shrinks_geometrically(self) -> None:
        prec = Precision(256)
        with mp.workprec(256):
            theta = (1 + mp.sqrt(5)) / 2
            expected = theta / mp.sqrt(5)
        for n in range(4, 21):
            dens = density(realize(iterate(FIBONACCI, n), FIBONACCI.ring), prec)
            with mp.workprec(256):
                # ошибка равна θ^(-2n-1)/√5
                self.assertLessEqual(abs(dens - expected) * theta ** (2 * n), 1, n)
                self.assertGreater(abs(dens - expected), 0, n)

    def test_patch_rows(self) -> None:
        prec = Precision(128)
        patch = realize(iterate(FIBONACCI, 6), FIBONACCI.ring)
        rows = patch_rows(patch, prec)
        stars = star_points(patch, prec)
        self.assertEqual(len(rows), 13)
        index, letter, u, v, position, star = rows[1]
        self.assertEqual((index, letter, u, v), (1, "b", 0, 1))
        self.assertAlmostEqual(float(position), GOLDEN, places=12)
        self.assertEqual(star, stars[1])


if __name__ == "__main__":
    unittest.main()
