"""Fourier amplitudes A_n(k) by direct sums and by the f/g recursion, with decay certificates."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import mpmath
from mpmath import mp

from app import orbits
from app.errors import DomainError, RefusedInputError
from app.geometry import Patch, realize
from app.quadfield import Precision, QuadElem, RingParams, embed, recurrence_f, theta_power
from app.substitution import (
    DEFAULT_SIZE_CAP,
    BinaryPisotRule,
    RnmsRule,
    blocks,
    sample_rnms,
)
from app.wavenumber import WaveNumber

logger = logging.getLogger(__name__)

TAIL_LEVELS = 5
CONVERGENCE_TOLERANCE = 1e-4
R_MAX = 25
EMPIRICAL_LABEL = "empirical up to n_scan"

__all__ = [
    "AmplitudeEntry",
    "AmplitudeSeries",
    "CertificationFailure",
    "DecayCertificate",
    "DecayProfile",
    "IntensityEstimate",
    "RnmsIntensity",
    "WaveNumber",
    "certify_decay",
    "decay_profile",
    "delta_prime",
    "direct_amplitude",
    "feasibility_bound",
    "fg_coefficients",
    "intensity_estimate",
    "minimal_n0",
    "recursive_amplitudes",
    "rnms_intensity",
    "series_rows",
]


@dataclass(frozen=True)
class AmplitudeEntry:
    n: int
    amplitude: mpmath.mpc
    normalized: mpmath.mpc


@dataclass(frozen=True)
class AmplitudeSeries:
    """Amplitudes A_n(k) for n = 0..n_max and their values A_n/θ^n."""

    k: WaveNumber
    ring: RingParams
    entries: Tuple[AmplitudeEntry, ...]
    prec: Precision


@dataclass(frozen=True)
class IntensityEstimate:
    intensity: mpmath.mpf
    converged: bool
    tail_variation: mpmath.mpf


@dataclass(frozen=True)
class DecayProfile:
    """Pairs (n, n·|A_n|²/θ^{2n}) with their running maximum."""

    points: Tuple[Tuple[int, mpmath.mpf], ...]
    running_max: Tuple[mpmath.mpf, ...]

    @property
    def c(self) -> mpmath.mpf:
        return self.running_max[-1]


@dataclass(frozen=True)
class DecayCertificate:
    """Witness (δ, r, δ'', ε, n₀, c) of |A_n|²/θ^{2n} ≤ c/n for n₀ ≤ n ≤ n_scan."""

    delta: mpmath.mpf
    r: int
    delta1: mpmath.mpf
    delta2: mpmath.mpf
    epsilon: mpmath.mpf
    n0: int
    c: mpmath.mpf
    n_scan: int
    rule: str = ""
    k: str = ""
    label: str = EMPIRICAL_LABEL
    profile: Optional[DecayProfile] = field(default=None, compare=False, repr=False)

    def to_dict(self) -> Dict[str, object]:
        return {
            "rule": self.rule,
            "k": self.k,
            "delta": float(self.delta),
            "r": self.r,
            "delta_prime": float(self.delta1),
            "delta_double_prime": float(self.delta2),
            "epsilon": float(self.epsilon),
            "n0": self.n0,
            "c": float(self.c),
            "scan_range": [self.n0, self.n_scan],
            "label": self.label,
        }


@dataclass(frozen=True)
class CertificationFailure:
    """Scan data of a search that found no usable (δ, r)."""

    reason: str
    n_scan: int
    best_r: Dict[float, Optional[int]]
    rejected: List[Dict[str, object]] = field(default_factory=list)
    profile: Optional[DecayProfile] = field(default=None, compare=False, repr=False)

    def to_dict(self) -> Dict[str, object]:
        return {
            "reason": self.reason,
            "n_scan": self.n_scan,
            "best_r": {str(k): v for k, v in self.best_r.items()},
            "rejected": self.rejected,
        }


@dataclass(frozen=True)
class RnmsIntensity:
    mean: mpmath.mpf
    stderr: mpmath.mpf
    samples: int
    values: Tuple[mpmath.mpf, ...]


def _phase_term(phase: mpmath.mpf) -> mpmath.mpc:
    # e^{−2πi·{k·x}}
    return mp.expjpi(-2 * phase)


def direct_amplitude(patch: Patch, k: WaveNumber, prec: Precision) -> mpmath.mpc:
    """Σ_j exp(−2πi·{k·x_j}) with every phase reduced mod 1 before exponentiation."""

    with prec.context():
        phase = k.phase_function(patch.ring)
        total = mp.mpc(0)
        for x in patch.positions:
            total += _phase_term(phase(x))
        return total


def fg_coefficients(
    rule: BinaryPisotRule, n: int, k: WaveNumber, prec: Precision
) -> Tuple[mpmath.mpc, mpmath.mpc]:
    """Coefficients of A_n = f·A_{n-1} + g·A_{n-2} from the concatenation rule."""

    ring = rule.ring
    parts = blocks(rule, n)
    with prec.context():
        phase = k.phase_function(ring)
        f = mp.mpc(0)
        g = mp.mpc(0)
        offset = QuadElem(0, 0, ring)
        for letter, level in parts:
            term = _phase_term(phase(offset))
            if letter == "a":
                f += term
            else:
                g += term
            offset = offset + theta_power(ring, level)
        return f, g


def recursive_amplitudes(
    rule: BinaryPisotRule, k: WaveNumber, n_max: int, prec: Precision
) -> AmplitudeSeries:
    """A_0 = A_1 = 1 advanced by A_n = f·A_{n-1} + g·A_{n-2}."""

    if n_max < 2:
        raise DomainError(f"recursive_amplitudes needs n_max ≥ 2, got {n_max}")
    ring = rule.ring
    with prec.context():
        amplitudes = [mp.mpc(1), mp.mpc(1)]
        for n in range(2, n_max + 1):
            f, g = fg_coefficients(rule, n, k, prec)
            amplitudes.append(f * amplitudes[n - 1] + g * amplitudes[n - 2])
            logger.debug("A_%s(%s) = %s", n, k.label, amplitudes[-1])
        entries = tuple(
            AmplitudeEntry(n, a, a / embed(theta_power(ring, n), prec))
            for n, a in enumerate(amplitudes)
        )
    return AmplitudeSeries(k=k, ring=ring, entries=entries, prec=prec)


def intensity_estimate(series: AmplitudeSeries) -> IntensityEstimate:
    """I ≈ |A_n|²/θ^{2n} at the last level, with a tail-variation convergence flag."""

    if len(series.entries) < TAIL_LEVELS + 1:
        raise DomainError(
            f"intensity_estimate needs at least {TAIL_LEVELS + 1} levels, got {len(series.entries)}"
        )
    with series.prec.context():
        values = [abs(entry.normalized) ** 2 for entry in series.entries]
        tail = values[-TAIL_LEVELS:]
        variation = max(tail) - min(tail)
        return IntensityEstimate(
            intensity=values[-1],
            converged=bool(variation < CONVERGENCE_TOLERANCE),
            tail_variation=variation,
        )


def decay_profile(series: AmplitudeSeries) -> DecayProfile:
    """n·|A_n|²/θ^{2n}; its boundedness witnesses the c/n law."""

    points: List[Tuple[int, mpmath.mpf]] = []
    running: List[mpmath.mpf] = []
    with series.prec.context():
        for entry in series.entries:
            value = entry.n * abs(entry.normalized) ** 2
            points.append((entry.n, value))
            running.append(value if not running else max(running[-1], value))
    return DecayProfile(points=tuple(points), running_max=tuple(running))


def delta_prime(delta: mpmath.mpf) -> mpmath.mpf:
    """|1 + e^{−2πiz}| = 2|cos(πz)|, so ‖z‖ ≥ δ gives |1 + e^{−2πiz}| ≤ 2 − δ'."""

    return 2 - 2 * abs(mp.cospi(delta))


def feasibility_bound(
    ring: RingParams, r: int, delta2: Union[int, mpmath.mpf], prec: Precision
) -> mpmath.mpf:
    """θ^{2r+2}·((F_{r+2} − δ'') + qF_{r+1}/θ)^{−2} − 1.

    F_{r+2} + qF_{r+1}/θ равно θ^{r+1} точно, поэтому при δ'' = 0
    результат ровно 0.
    """

    power = theta_power(ring, r + 1)
    bracket = QuadElem(ring.q * recurrence_f(ring, r), recurrence_f(ring, r + 1), ring)
    with prec.context():
        denominator = embed(bracket, prec) - delta2
        if denominator <= 0:
            raise DomainError(f"δ''={delta2} leaves a nonpositive bracket for r={r}")
        ratio = embed(power, prec) / denominator
        return ratio * ratio - 1


def minimal_n0(r: int, epsilon: mpmath.mpf) -> int:
    """Smallest n₀ > r + 1 with (n₀ + 1)/(n₀ − r − 1) ≤ 1 + ε."""

    if epsilon <= 0:
        raise DomainError(f"ε must be positive, got {epsilon}")
    n0 = max(r + 2, int(mp.ceil((1 + (1 + epsilon) * (r + 1)) / epsilon)) - 1)
    while mp.mpf(n0 + 1) / (n0 - r - 1) > 1 + epsilon:
        n0 += 1
    return n0


def certify_decay(
    rule: BinaryPisotRule,
    k: WaveNumber,
    n_scan: int,
    grid_steps: int,
    prec: Precision,
    *,
    r_max: int = R_MAX,
) -> Union[DecayCertificate, CertificationFailure]:
    """Searches (δ, r) and builds the c/n certificate, verified directly up to ``n_scan``.

    Both outcomes carry the scanned ``profile`` so callers do not rerun the recursion.
    """

    if k.is_field:
        raise RefusedInputError(
            f"k={k.label} lies in Q(θ); the decay certificate only covers k outside the field"
        )
    ring = rule.ring
    prec = prec.at_least(Precision.for_level(ring, n_scan))
    report = orbits.orbit(k, ring, n_scan, prec)
    profile = decay_profile(recursive_amplitudes(rule, k, n_scan, prec))
    values = dict(profile.points)
    rejected: List[Dict[str, object]] = []

    with prec.context():
        for delta, r in orbits.delta_r_candidates(report, grid_steps, r_max):
            d1 = delta_prime(delta)
            d2 = recurrence_f(ring, r + 1) * d1
            reason = None
            if d2 >= recurrence_f(ring, r + 2):
                reason = "δ'' ≥ F_{r+2}"
            else:
                epsilon = feasibility_bound(ring, r, d2, prec)
                if epsilon <= 0:
                    reason = "ε ≤ 0"
                else:
                    n0 = minimal_n0(r, epsilon)
                    if n0 + 2 * r > n_scan:
                        reason = f"base window [{n0}, {n0 + 2 * r}] exceeds n_scan"
                    else:
                        c = max(values[n] for n in range(n0, n0 + 2 * r + 1))
                        violations = [n for n in range(n0, n_scan + 1) if values[n] > c]
                        if not violations:
                            logger.info(
                                "Certified %s at k=%s: δ=%s r=%s ε=%s n0=%s",
                                rule.spec(), k.label, mp.nstr(delta, 6), r,
                                mp.nstr(epsilon, 6), n0,
                            )
                            return DecayCertificate(
                                delta=delta, r=r, delta1=d1, delta2=d2,
                                epsilon=epsilon, n0=n0, c=c, n_scan=n_scan,
                                rule=rule.spec(), k=k.label,
                                profile=profile,
                            )
                        reason = f"bound violated at n={violations[0]}"
            rejected.append({"delta": float(delta), "r": r, "reason": reason})

    logger.warning("No decay certificate for %s at k=%s up to n=%s", rule.spec(), k.label, n_scan)
    return CertificationFailure(
        reason="no (δ, r) candidate produced a verified bound",
        n_scan=n_scan,
        best_r=orbits.best_r_table(report, grid_steps, r_max),
        rejected=rejected,
        profile=profile,
    )


def rnms_intensity(
    rule: RnmsRule,
    k: WaveNumber,
    n: int,
    samples: int,
    seed: int,
    prec: Precision,
    *,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> RnmsIntensity:
    """Mean and standard error of |A_n|²/λ^{2n} over sampled realizations."""

    if samples < 1:
        raise DomainError(f"samples must be at least 1, got {samples}")
    ring = rule.ring
    prec = prec.at_least(Precision.for_level(ring, n))
    scale = embed(theta_power(ring, 2 * n), prec)
    values: List[mpmath.mpf] = []
    for stream in range(samples):
        patch = realize(sample_rnms(rule, n, seed, stream=stream, size_cap=size_cap), ring)
        amplitude = direct_amplitude(patch, k, prec)
        with prec.context():
            values.append(abs(amplitude) ** 2 / scale)
    # лишние биты делают сумму одинаковых значений точной
    with mp.workprec(prec.bits + 64):
        mean = mp.fsum(values) / samples
        if samples > 1:
            variance = mp.fsum((value - mean) ** 2 for value in values) / (samples - 1)
            stderr = mp.sqrt(variance / samples)
        else:
            stderr = mp.zero
    return RnmsIntensity(mean=mean, stderr=stderr, samples=samples, values=tuple(values))


def series_rows(series: AmplitudeSeries) -> List[Tuple[int, mpmath.mpf, mpmath.mpf, mpmath.mpf, mpmath.mpf]]:
    """Rows (n, Re A_n, Im A_n, |A_n|/θ^n, n·|A_n|²/θ^{2n}) for the series export."""

    rows = []
    with series.prec.context():
        for entry in series.entries:
            modulus = abs(entry.normalized)
            rows.append((entry.n, entry.amplitude.real, entry.amplitude.imag, modulus, entry.n * modulus ** 2))
    return rows
