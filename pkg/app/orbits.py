"""Fractional parts {ξθ^n}: gap bounds, cluster counts and (δ, r) witness search."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mp

from app.errors import DomainError, RefusedInputError, WitnessNotFoundError
from app.quadfield import Precision, RingParams
from app.wavenumber import WaveNumber

logger = logging.getLogger(__name__)

DEFAULT_CLUSTER_EPS = 0.01
GAP_TOLERANCE = 1e-6


@dataclass(frozen=True)
class OrbitReport:
    """Fractional parts of ξθ^n for n = 1..N; ``fracs[n - 1]`` belongs to n."""

    xi: WaveNumber
    ring: RingParams
    N: int
    fracs: Tuple[mpmath.mpf, ...]
    dists: Tuple[mpmath.mpf, ...]
    gap: mpmath.mpf
    clusters: Tuple[Tuple[float, int], ...]
    prec: Precision
    tail_start: int

    @property
    def alpha(self) -> float:
        with mp.workprec(64):
            return float(self.ring.theta())


@dataclass(frozen=True)
class GapEstimate:
    gap: mpmath.mpf
    bound: mpmath.mpf
    satisfied: bool


@dataclass(frozen=True)
class DeltaRWitness:
    delta: mpmath.mpf
    r: int


def default_tail_start(N: int) -> int:
    return max(1, N // 5)


def _tail(values: Sequence, tail_start: int) -> Sequence:
    return values[max(tail_start, 1) - 1:]


def orbit(
    xi: WaveNumber,
    ring: RingParams,
    N: int,
    prec: Precision,
    *,
    eps: float = DEFAULT_CLUSTER_EPS,
) -> OrbitReport:
    """{ξθ^n} for n = 1..N with θ^n kept exact in Z[θ]."""

    if N < 1:
        raise DomainError(f"orbit length must be positive, got {N}")
    fracs: List[mpmath.mpf] = []
    dists: List[mpmath.mpf] = []
    with prec.context():
        phase = xi.phase_function(ring)
        power = ring.one
        for _ in range(N):
            power = power * ring.theta_elem
            frac = phase(power)
            fracs.append(frac)
            dists.append(min(frac, 1 - frac))
        tail_start = default_tail_start(N)
        tail = _tail(fracs, tail_start)
        gap = max(tail) - min(tail)
    clusters = _circle_cover([float(f) for f in _tail(fracs, tail_start)], eps)
    logger.debug("Orbit of %s: N=%s gap=%s clusters=%s", xi.label, N, mp.nstr(gap, 6), len(clusters))
    return OrbitReport(
        xi=xi,
        ring=ring,
        N=N,
        fracs=tuple(fracs),
        dists=tuple(dists),
        gap=gap,
        clusters=tuple(clusters),
        prec=prec,
        tail_start=tail_start,
    )


def gap_estimate(report: OrbitReport, tail_start: int) -> GapEstimate:
    """max − min of the tail fractional parts against the bound 1/(1 + θ)."""

    if tail_start >= report.N:
        raise DomainError(f"tail_start={tail_start} must be below N={report.N}")
    with report.prec.context():
        tail = _tail(report.fracs, tail_start)
        gap = max(tail) - min(tail)
        bound = 1 / (1 + report.ring.theta())
        return GapEstimate(gap=gap, bound=bound, satisfied=bool(gap >= bound - GAP_TOLERANCE))


def _circle_cover(points: Sequence[float], eps: float) -> List[Tuple[float, int]]:
    """Greedy cover of points on R/Z by arcs of length 2·eps."""

    if not points:
        return []
    pts = sorted(p % 1.0 for p in points)
    n = len(pts)
    gaps = [(pts[(i + 1) % n] - pts[i]) % 1.0 for i in range(n)]
    # начинаем сразу после самого широкого промежутка, 0 и 1 склеены
    widest = max(range(n), key=lambda i: (gaps[i], i))
    start = (widest + 1) % n
    unwrapped = [pts[(start + i) % n] + (1.0 if start + i >= n else 0.0) for i in range(n)]
    clusters: List[Tuple[float, int]] = []
    i = 0
    while i < n:
        left = unwrapped[i]
        j = i
        while j < n and unwrapped[j] <= left + 2 * eps:
            j += 1
        clusters.append(((left + eps) % 1.0, j - i))
        i = j
    return clusters


def cluster_count(report: OrbitReport, eps: float, tail_start: int) -> int:
    """Number of eps-clusters needed to cover the tail on the circle."""

    if not 0 < eps < 0.25:
        raise DomainError(f"eps must lie in (0, 1/4), got {eps}")
    tail = [float(f) for f in _tail(report.fracs, tail_start)]
    return len(_circle_cover(tail, eps))


def _implication_holds(far: Sequence[bool], r: int) -> bool:
    """For every n ≤ N − r with ‖y_n‖ < δ some j in n+1..n+r has ‖y_j‖ ≥ δ."""

    n_total = len(far)
    next_far = float("inf")
    for idx in range(n_total - 1, -1, -1):
        if idx <= n_total - 1 - r and not far[idx] and next_far - idx > r:
            return False
        if far[idx]:
            next_far = idx
    return True


def _minimal_r(dists: Sequence[float], delta: float, r_max: int) -> Optional[int]:
    far = [d >= delta for d in dists]
    for r in range(1, r_max + 1):
        if _implication_holds(far, r):
            return r
    return None


def _grid(delta_grid: int) -> List[mpmath.mpf]:
    if delta_grid < 2:
        raise DomainError(f"delta grid needs at least 2 steps, got {delta_grid}")
    return [mp.mpf(i) / delta_grid for i in range(delta_grid - 1, 0, -1)]


def delta_r_candidates(
    report: OrbitReport, delta_grid: int, r_max: int
) -> Iterator[Tuple[mpmath.mpf, int]]:
    """All admissible (δ, r): δ descending, then r ascending from its smallest value."""

    dists = [float(d) for d in report.dists]
    for delta in _grid(delta_grid):
        r_min = _minimal_r(dists, float(delta), r_max)
        if r_min is None:
            continue
        for r in range(r_min, r_max + 1):
            yield delta, r


def best_r_table(report: OrbitReport, delta_grid: int, r_max: int) -> Dict[float, Optional[int]]:
    dists = [float(d) for d in report.dists]
    return {float(delta): _minimal_r(dists, float(delta), r_max) for delta in _grid(delta_grid)}


def find_delta_r(report: OrbitReport, delta_grid: int, r_max: int) -> DeltaRWitness:
    """Largest grid δ with the smallest r ≤ r_max satisfying the implication on the scan."""

    if report.xi.is_field:
        raise RefusedInputError(
            f"ξ={report.xi.label} lies in Q(θ); the (δ, r) search needs ξ outside the field"
        )
    for delta, r in delta_r_candidates(report, delta_grid, r_max):
        return DeltaRWitness(delta=delta, r=r)
    raise WitnessNotFoundError(best_r_table(report, delta_grid, r_max))


def orbit_rows(report: OrbitReport) -> List[Tuple[int, mpmath.mpf, mpmath.mpf]]:
    """Rows (n, frac, dist_to_int) for the orbit export."""

    return [(n, frac, dist) for n, (frac, dist) in enumerate(zip(report.fracs, report.dists), start=1)]
