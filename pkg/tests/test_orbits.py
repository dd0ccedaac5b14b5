from __future__ import annotations

from pathlib import Path
import sys
import unittest

from mpmath import mp

sys.path.append(str(Path(__file__).resolve().parents[1]))

from app.errors import DomainError, RefusedInputError, WitnessNotFoundError
from app.orbits import (
    OrbitReport,
    cluster_count,
    find_delta_r,
    gap_estimate,
    orbit,
    orbit_rows,
)
from app.quadfield import Precision, QuadElem, RingParams
from app.wavenumber import WaveNumber

FIBONACCI = RingParams(1, 1)
SIZES = (250, 500, 1000, 2000)


def scaled(N: int) -> Precision:
    return Precision.for_level(FIBONACCI, N)


def handmade_report(fracs, xi: str = "sqrt(2)") -> OrbitReport:
    values = tuple(mp.mpf(f) for f in fracs)
    return OrbitReport(
        xi=WaveNumber.real(xi),
        ring=FIBONACCI,
        N=len(values),
        fracs=values,
        dists=tuple(min(f, 1 - f) for f in values),
        gap=max(values) - min(values),
        clusters=(),
        prec=Precision(64),
        tail_start=1,
    )


class TestOrbit(unittest.TestCase):
    def test_golden_powers(self) -> None:
        report = orbit(WaveNumber.rational(1, FIBONACCI), FIBONACCI, 5, Precision(128))
        expected = [0.618034, 0.618034, 0.236068, 0.854102, 0.090170]
        for got, want in zip(report.fracs, expected):
            self.assertAlmostEqual(float(got), want, places=5)
        self.assertEqual(len(report.fracs), 5)
        self.assertEqual([row[0] for row in orbit_rows(report)], [1, 2, 3, 4, 5])

    def test_zero_and_half(self) -> None:
        zero = orbit(WaveNumber.rational(0, FIBONACCI), FIBONACCI, 20, Precision(128))
        self.assertTrue(all(f == 0 for f in zero.fracs))
        self.assertEqual(gap_estimate(zero, 4).gap, 0)
        half = orbit(WaveNumber.parse("1/2", FIBONACCI), FIBONACCI, 1, Precision(128))
        self.assertAlmostEqual(float(half.fracs[0]), 0.809017, places=5)

    def test_field_orbit_matches_big_float(self) -> None:
        xi = WaveNumber.field(QuadElem(1, 1, FIBONACCI))
        report = orbit(xi, FIBONACCI, 200, Precision(1024))
        with mp.workprec(4096):
            theta = (1 + mp.sqrt(5)) / 2
            value = 1 + theta
            for n in range(1, 201):
                value *= theta
                reference = value - mp.floor(value)
                diff = abs(report.fracs[n - 1] - reference)
                self.assertLess(min(diff, 1 - diff), mp.mpf(2) ** -512, n)


class TestGap(unittest.TestCase):
    def test_sqrt_two_gap_meets_bound(self) -> None:
        report = orbit(WaveNumber.real("sqrt(2)"), FIBONACCI, 2000, scaled(2000))
        estimate = gap_estimate(report, 100)
        self.assertTrue(estimate.satisfied)
        self.assertGreaterEqual(estimate.gap, mp.mpf("0.381966") - 1e-6)

    def test_bound_equals_inverse_square(self) -> None:
        report = orbit(WaveNumber.real("pi"), FIBONACCI, 10, Precision(256))
        bound = gap_estimate(report, 2).bound
        with mp.workprec(256):
            theta = FIBONACCI.theta()
            self.assertLess(abs(bound - 1 / theta ** 2), mp.mpf(2) ** -248)

    def test_tail_start_must_be_inside(self) -> None:
        report = orbit(WaveNumber.real("pi"), FIBONACCI, 10, Precision(256))
        with self.assertRaises(DomainError):
            gap_estimate(report, 10)


class TestClusters(unittest.TestCase):
    def test_field_orbits_stabilise(self) -> None:
        for xi in (WaveNumber.rational(1, FIBONACCI), WaveNumber.field(FIBONACCI.theta_elem)):
            found = [
                cluster_count(orbit(xi, FIBONACCI, N, scaled(N)), 1e-4, N // 5) for N in SIZES
            ]
            self.assertEqual(len(set(found)), 1, (xi.label, found))
        one = orbit(WaveNumber.rational(1, FIBONACCI), FIBONACCI, 400, scaled(400))
        self.assertEqual(cluster_count(one, 0.01, 80), 1)

    def test_off_field_orbits_keep_growing(self) -> None:
        for expr in ("sqrt(2)", "pi"):
            xi = WaveNumber.real(expr)
            found = [
                cluster_count(orbit(xi, FIBONACCI, N, scaled(N)), 1e-4, N // 5) for N in SIZES
            ]
            self.assertTrue(all(a < b for a, b in zip(found, found[1:])), (expr, found))

    def test_circle_identifies_zero_and_one(self) -> None:
        report = handmade_report([0.999, 0.001, 0.9995, 0.0004])
        self.assertEqual(cluster_count(report, 0.01, 1), 1)
        self.assertEqual(cluster_count(handmade_report([0.3]), 0.01, 1), 1)
        self.assertEqual(cluster_count(handmade_report([0.1, 0.5, 0.9]), 0.01, 1), 3)

    def test_eps_range(self) -> None:
        report = handmade_report([0.1, 0.2])
        for eps in (0, 0.25, -0.1):
            with self.assertRaises(DomainError):
                cluster_count(report, eps, 1)


class TestDeltaR(unittest.TestCase):
    def test_sqrt_two_witness(self) -> None:
        report = orbit(WaveNumber.real("sqrt(2)"), FIBONACCI, 500, scaled(500))
        witness = find_delta_r(report, 20, 25)
        self.assertGreaterEqual(witness.delta, 0.05)
        self.assertLessEqual(witness.r, 25)
        # повторная проверка простым проходом
        dists = report.dists
        N = report.N
        for n in range(1, N - witness.r + 1):
            if dists[n - 1] < witness.delta:
                window = dists[n: n + witness.r]
                self.assertTrue(any(d >= witness.delta for d in window), n)

    def test_vacuous_implication(self) -> None:
        witness = find_delta_r(handmade_report([0.5] * 12), 2, 25)
        self.assertEqual((witness.delta, witness.r), (0.5, 1))

    def test_field_xi_is_refused(self) -> None:
        report = orbit(WaveNumber.rational(1, FIBONACCI), FIBONACCI, 50, Precision(128))
        with self.assertRaises(RefusedInputError):
            find_delta_r(report, 20, 25)

    def test_failure_reports_best_r(self) -> None:
        with self.assertRaises(WitnessNotFoundError) as ctx:
            find_delta_r(handmade_report([0.0] * 40), 4, 5)
        self.assertEqual(set(ctx.exception.best_r.values()), {None})
        self.assertEqual(sorted(ctx.exception.best_r), [0.25, 0.5, 0.75])


if __name__ == "__main__":
    unittest.main()
