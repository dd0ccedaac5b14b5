"""Evaluation of k-point jobs, inline or in a process pool."""
from __future__ import annotations

import asyncio
import logging
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, TypeVar

import mpmath

from app.amplitude import intensity_estimate, recursive_amplitudes, rnms_intensity
from app.errors import ConfigError, PrecisionExhaustedError
from app.modelset import classify_wave_number
from app.quadfield import Precision
from app.substitution import DEFAULT_SIZE_CAP, BinaryPisotRule, RnmsRule, parse_rule
from app.wavenumber import WaveNumber

logger = logging.getLogger(__name__)

Job = TypeVar("Job")
Result = TypeVar("Result")


@dataclass(frozen=True)
class SpectrumJob:
    rule: str
    k: str
    n_max: int
    prec_bits: int


@dataclass(frozen=True)
class SpectrumResult:
    label: str
    value: Optional[mpmath.mpf]
    intensity: Optional[mpmath.mpf]
    converged: Optional[bool]
    status: str = "ok"
    error: Optional[str] = None


@dataclass(frozen=True)
class RnmsJob:
    rule: str
    k: str
    n: int
    samples: int
    seed: int
    prec_bits: int
    size_cap: int = DEFAULT_SIZE_CAP


@dataclass(frozen=True)
class RnmsResult:
    label: str
    value: Optional[mpmath.mpf]
    classification: str
    mean: Optional[mpmath.mpf]
    stderr: Optional[mpmath.mpf]
    samples: int
    status: str = "ok"
    error: Optional[str] = None


def _binary_rule(spec: str) -> BinaryPisotRule:
    rule = parse_rule(spec)
    if not isinstance(rule, BinaryPisotRule):
        raise ConfigError(f"{spec!r} is a random rule; use the rnms command")
    return rule


def _random_rule(spec: str) -> RnmsRule:
    rule = parse_rule(spec)
    if not isinstance(rule, RnmsRule):
        raise ConfigError(f"{spec!r} is a deterministic rule; rnms expects 'm=<int>;probs=<list>'")
    return rule


def spectrum_point(job: SpectrumJob) -> SpectrumResult:
    """Intensity estimate for one k; precision exhaustion becomes a failed row."""

    rule = _binary_rule(job.rule)
    ring = rule.ring
    k = WaveNumber.parse(job.k, ring)
    prec = Precision(job.prec_bits).at_least(Precision.for_level(ring, job.n_max))
    value = k.value(prec)
    try:
        estimate = intensity_estimate(recursive_amplitudes(rule, k, job.n_max, prec))
    except PrecisionExhaustedError as exc:
        logger.warning("Skipping k=%s for %s: %s", k.label, job.rule, exc)
        return SpectrumResult(k.label, value, None, None, "failed", str(exc))
    return SpectrumResult(k.label, value, estimate.intensity, estimate.converged)


def rnms_point(job: RnmsJob) -> RnmsResult:
    rule = _random_rule(job.rule)
    ring = rule.ring
    k = WaveNumber.parse(job.k, ring)
    prec = Precision(job.prec_bits)
    value = k.value(prec)
    classification = classify_wave_number(k, rule.m)
    try:
        stats = rnms_intensity(rule, k, job.n, job.samples, job.seed, prec, size_cap=job.size_cap)
    except PrecisionExhaustedError as exc:
        logger.warning("Skipping k=%s for %s: %s", k.label, job.rule, exc)
        return RnmsResult(k.label, value, classification, None, None, job.samples, "failed", str(exc))
    return RnmsResult(k.label, value, classification, stats.mean, stats.stderr, stats.samples)


async def _run_jobs(
    fn: Callable[[Job], Result],
    jobs: Sequence[Job],
    workers: int,
    on_error: Callable[[Job, BaseException], Result],
) -> List[Result]:
    if workers <= 1:
        results = []
        for job in jobs:
            try:
                results.append(fn(job))
            except ConfigError:
                raise
            except Exception as exc:  # noqa: BLE001 фиксируем ошибку и продолжаем
                results.append(on_error(job, exc))
        return results

    loop = asyncio.get_running_loop()
    executor: Executor = ProcessPoolExecutor(max_workers=workers)
    try:
        futures = [loop.run_in_executor(executor, fn, job) for job in jobs]
        outcomes = await asyncio.gather(*futures, return_exceptions=True)
    finally:
        executor.shutdown(wait=True)
    results = []
    for job, outcome in zip(jobs, outcomes):
        if isinstance(outcome, ConfigError):
            raise outcome
        if isinstance(outcome, BaseException):
            results.append(on_error(job, outcome))
        else:
            results.append(outcome)
    return results


def _sort_key(result) -> tuple:
    # строки без значения k уходят в конец
    return (result.value is None, result.value if result.value is not None else 0, result.label)


async def evaluate_spectrum(jobs: Sequence[SpectrumJob], workers: int = 1) -> List[SpectrumResult]:
    """Runs every spectrum job; the result is sorted by k whatever the completion order."""

    def failed(job: SpectrumJob, exc: BaseException) -> SpectrumResult:
        logger.error("Spectrum job k=%s failed", job.k, exc_info=exc)
        return SpectrumResult(job.k, None, None, None, "failed", str(exc))

    results = await _run_jobs(spectrum_point, jobs, workers, failed)
    logger.info("Evaluated %s k-points with %s worker(s)", len(results), workers)
    return sorted(results, key=_sort_key)


async def evaluate_rnms(jobs: Sequence[RnmsJob], workers: int = 1) -> List[RnmsResult]:
    """Sampled intensity statistics for every k, sorted by k."""

    def failed(job: RnmsJob, exc: BaseException) -> RnmsResult:
        logger.error("RNMS job k=%s failed", job.k, exc_info=exc)
        return RnmsResult(job.k, None, "unknown", None, None, job.samples, "failed", str(exc))

    results = await _run_jobs(rnms_point, jobs, workers, failed)
    logger.info("Sampled %s k-points, %s realizations each", len(results), jobs[0].samples if jobs else 0)
    return sorted(results, key=_sort_key)
