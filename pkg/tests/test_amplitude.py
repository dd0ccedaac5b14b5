from __future__ import annotations

from fractions import Fraction
from pathlib import Path
import sys
import unittest

from mpmath import mp

sys.path.append(str(Path(__file__).resolve().parents[1]))

from app.amplitude import (
    DecayCertificate,
    certify_decay,
    decay_profile,
    delta_prime,
    direct_amplitude,
    feasibility_bound,
    fg_coefficients,
    intensity_estimate,
    minimal_n0,
    recursive_amplitudes,
    rnms_intensity,
    series_rows,
)
from app.errors import DomainError, RefusedInputError
from app.geometry import realize, translate
from app.quadfield import Precision, QuadElem, recurrence_f, theta_power
from app.substitution import BinaryPisotRule, RnmsRule, counts, iterate, pisot_rules
from app.wavenumber import WaveNumber

FIBONACCI = BinaryPisotRule("ab")
SMALL_RULES = ["ab", "ba", "aab", "aba", "aabb", "abab", "aaab", "aabab", "aaabbb"]
PATCH_LIMIT = 400


class TestDirectAndRecursive(unittest.TestCase):
    def test_zero_mode_intensity(self) -> None:
        prec = Precision(256)
        series = recursive_amplitudes(FIBONACCI, WaveNumber.rational(0, FIBONACCI.ring), 30, prec)
        estimate = intensity_estimate(series)
        with mp.workprec(256):
            expected = ((1 + mp.sqrt(5)) / 2) ** 2 / 5
            self.assertLess(abs(estimate.intensity - expected), 1e-4)
        self.assertTrue(estimate.converged)

    def test_recursion_matches_direct_sums(self) -> None:
        prec = Precision(256)
        tolerance = mp.mpf(2) ** -64
        for rule in pisot_rules(SMALL_RULES):
            ring = rule.ring
            levels = [n for n in range(2, 15) if sum(counts(rule, n)) <= PATCH_LIMIT]
            ks = [
                WaveNumber.rational(Fraction(1, 3), ring),
                WaveNumber.field(QuadElem(1, 2, ring), 7),
                WaveNumber.real("sqrt(2)"),
                WaveNumber.real("pi"),
            ]
            for k in ks:
                series = recursive_amplitudes(rule, k, levels[-1], prec)
                for n in levels:
                    direct = direct_amplitude(realize(iterate(rule, n), ring), k, prec)
                    with prec.context():
                        self.assertLess(abs(series.entries[n].amplitude - direct), tolerance, (rule, k, n))

    def test_fg_at_zero_counts_blocks(self) -> None:
        rule = BinaryPisotRule("aab")
        f, g = fg_coefficients(rule, 4, WaveNumber.rational(0, rule.ring), Precision(128))
        self.assertEqual((f, g), (2, 1))
        with self.assertRaises(DomainError):
            fg_coefficients(rule, 1, WaveNumber.rational(0, rule.ring), Precision(128))

    def test_fg_bounded_by_letter_counts(self) -> None:
        prec = Precision(128)
        tolerance = mp.mpf(2) ** -100
        for rule in pisot_rules(SMALL_RULES):
            ks = [
                WaveNumber.real("sqrt(3)"),
                WaveNumber.real("0.137"),
                WaveNumber.real("0.25*e"),
                WaveNumber.rational(Fraction(2, 5), rule.ring),
                WaveNumber.field(QuadElem(-1, 3, rule.ring), 4),
            ]
            for n in (2, 3, 5, 8, 11):
                for k in ks:
                    f, g = fg_coefficients(rule, n, k, prec)
                    with prec.context():
                        self.assertLessEqual(abs(f), rule.p + tolerance, (rule, n, k))
                        self.assertLessEqual(abs(g), rule.q + tolerance, (rule, n, k))

    def test_translation_only_changes_the_phase(self) -> None:
        prec = Precision(256)
        ring = FIBONACCI.ring
        patch = realize(iterate(FIBONACCI, 10), ring)
        k = WaveNumber.real("sqrt(2)")
        base = direct_amplitude(patch, k, prec)
        moved = direct_amplitude(translate(patch, QuadElem(3, -2, ring)), k, prec)
        with prec.context():
            self.assertLess(abs(abs(base) - abs(moved)), mp.mpf(2) ** -100)

    def test_short_series_has_no_estimate(self) -> None:
        series = recursive_amplitudes(FIBONACCI, WaveNumber.real("pi"), 3, Precision(128))
        with self.assertRaises(DomainError):
            intensity_estimate(series)
        self.assertEqual(len(series_rows(series)), 4)


class TestDecay(unittest.TestCase):
    def test_off_field_intensity_vanishes(self) -> None:
        prec = Precision(512)
        for expr in ("sqrt(2)", "pi", "e"):
            series = recursive_amplitudes(FIBONACCI, WaveNumber.real(expr), 60, prec)
            profile = decay_profile(series)
            with prec.context():
                self.assertLess(abs(series.entries[60].normalized) ** 2, 1e-2, expr)
            running = profile.running_max
            self.assertTrue(all(a <= b for a, b in zip(running, running[1:])))
            self.assertEqual(profile.c, max(value for _, value in profile.points))
            # за n = 30 максимум уже набран
            self.assertLessEqual(running[60], mp.mpf("1.05") * running[30], expr)

    def test_delta_prime(self) -> None:
        self.assertEqual(delta_prime(mp.mpf(0)), 0)
        self.assertAlmostEqual(float(delta_prime(mp.mpf("0.5"))), 2.0, places=12)

    def test_feasibility_bound_is_zero_without_slack(self) -> None:
        prec = Precision(256)
        for rule in pisot_rules(["ab", "aab", "aabb", "aaab"]):
            for r in range(1, 8):
                self.assertEqual(feasibility_bound(rule.ring, r, 0, prec), 0)

    def test_minimal_n0(self) -> None:
        self.assertEqual(minimal_n0(1, mp.mpf(1)), 5)
        for r, eps in ((3, mp.mpf("0.5")), (7, mp.mpf("2.25")), (2, mp.mpf("0.01"))):
            n0 = minimal_n0(r, eps)
            self.assertLessEqual(mp.mpf(n0 + 1) / (n0 - r - 1), 1 + eps)
            if n0 - 1 > r + 1:
                self.assertGreater(mp.mpf(n0) / (n0 - r - 2), 1 + eps)

    def test_certificate_for_sqrt_two(self) -> None:
        prec = Precision(256)
        k = WaveNumber.real("sqrt(2)")
        cert = certify_decay(FIBONACCI, k, 60, 20, prec)
        self.assertIsInstance(cert, DecayCertificate)
        self.assertEqual(len(cert.profile.points), 61)
        self.assertGreater(cert.epsilon, 0)
        ring = FIBONACCI.ring
        with mp.workprec(1024):
            theta = (1 + mp.sqrt(5)) / 2
            bracket = recurrence_f(ring, cert.r + 2) - cert.delta2 + ring.q * recurrence_f(ring, cert.r + 1) / theta
            recomputed = theta ** (2 * cert.r + 2) / bracket ** 2 - 1
            self.assertLess(abs(recomputed - cert.epsilon), mp.mpf(2) ** -200)
        self.assertLessEqual(mp.mpf(cert.n0 + 1) / (cert.n0 - cert.r - 1), 1 + cert.epsilon)
        series = recursive_amplitudes(FIBONACCI, k, 60, prec.at_least(Precision.for_level(ring, 60)))
        with prec.context():
            for entry in series.entries[cert.n0:]:
                self.assertLessEqual(abs(entry.normalized) ** 2, cert.c / entry.n + mp.mpf(2) ** -100)
        self.assertEqual(cert.to_dict()["scan_range"], [cert.n0, 60])
        self.assertNotIn("profile", cert.to_dict())
        with prec.context():
            for (n, value), entry in zip(cert.profile.points, series.entries):
                self.assertEqual(n, entry.n)
                self.assertLess(abs(value - entry.n * abs(entry.normalized) ** 2), mp.mpf(2) ** -200)

    def test_field_wave_number_is_refused(self) -> None:
        with self.assertRaises(RefusedInputError):
            certify_decay(FIBONACCI, WaveNumber.rational(1, FIBONACCI.ring), 30, 10, Precision(256))


class TestRandomIntensity(unittest.TestCase):
    def test_off_module_mean_is_small(self) -> None:
        rule = RnmsRule(1, (Fraction(1, 2), Fraction(1, 2)))
        prec = Precision(192)
        for k in (WaveNumber.rational(Fraction(1, 3), rule.ring), WaveNumber.real("sqrt(2)")):
            stats = rnms_intensity(rule, k, 18, 50, seed=2024, prec=prec)
            self.assertLess(stats.mean, 1e-2, k.label)
            self.assertLess(stats.stderr, stats.mean, k.label)
            self.assertEqual(len(stats.values), 50)

    def test_degenerate_vector_reproduces_deterministic_value(self) -> None:
        rule = RnmsRule(1, (Fraction(0), Fraction(1)))
        prec = Precision(192)
        k = WaveNumber.real("pi")
        stats = rnms_intensity(rule, k, 10, 4, seed=1, prec=prec)
        patch = realize(iterate(rule.as_deterministic(), 10), rule.ring)
        amplitude = direct_amplitude(patch, k, prec.at_least(Precision.for_level(rule.ring, 10)))
        scale = theta_power(rule.ring, 20).embed(prec.at_least(Precision.for_level(rule.ring, 10)))
        with prec.at_least(Precision.for_level(rule.ring, 10)).context():
            expected = abs(amplitude) ** 2 / scale
        self.assertEqual(stats.mean, expected)
        self.assertEqual(stats.stderr, 0)

    def test_zero_mode_has_no_spread(self) -> None:
        rule = RnmsRule(1, (Fraction(1, 2), Fraction(1, 2)))
        stats = rnms_intensity(rule, WaveNumber.rational(0, rule.ring), 8, 5, seed=3, prec=Precision(128))
        self.assertEqual(stats.stderr, 0)


if __name__ == "__main__":
    unittest.main()
