"""Handlers for spectra, amplitude series, decay certificates, orbits and RNMS statistics."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from mpmath import mp

from app.amplitude import (
    R_MAX,
    TAIL_LEVELS,
    DecayCertificate,
    certify_decay,
    intensity_estimate,
    recursive_amplitudes,
    series_rows,
)
from app.commands import Outcome, RunContext
from app.errors import ConfigError, WitnessNotFoundError
from app.export import write_json, write_table
from app.handlers.common import parse_k, precision_for, require_rule
from app.modelset import (
    ModulePoint,
    enumerate_module,
    module_point,
    spectrum_rows,
    window_and_density,
)
from app.orbits import (
    cluster_count,
    default_tail_start,
    find_delta_r,
    gap_estimate,
    orbit,
    orbit_rows,
)
from app.quadfield import Precision
from app.substitution import BinaryPisotRule, Rule, RnmsRule
from app.wavenumber import WaveNumber
from app.worker import RnmsJob, SpectrumJob, evaluate_rnms, evaluate_spectrum

logger = logging.getLogger(__name__)

SPECTRUM_HEADER = (
    "k", "c", "d", "k_value", "intensity", "converged", "status", "intensity_formula", "rel_error",
)
SERIES_HEADER = ("n", "re", "im", "abs_normalized", "n_intensity")
PROFILE_HEADER = ("n", "n_intensity", "running_max")
ORBIT_HEADER = ("n", "frac", "dist_to_int")
RNMS_HEADER = ("k", "k_value", "class", "mean", "stderr", "samples", "status")


def _binary_rule(ctx: RunContext, command: str) -> BinaryPisotRule:
    rule = require_rule(ctx)
    if not isinstance(rule, BinaryPisotRule):
        raise ConfigError(f"{command} expects 'w=<word>'; use rnms for random rules")
    return rule


def _single_k(ctx: RunContext, command: str) -> str:
    if not ctx.config.k:
        raise ConfigError(f"{command} needs --k")
    if len(ctx.config.k) > 1:
        logger.warning("%s uses only the first k, ignoring %s", command, ctx.config.k[1:])
    return ctx.config.k[0]


def _parse_k_list(texts: List[str], rule: Rule) -> Dict[str, WaveNumber]:
    # все k разбираются до запуска пула, одинаковые считаются один раз
    parsed: Dict[str, WaveNumber] = {}
    for text in texts:
        k = parse_k(text, rule.ring)
        parsed.setdefault(k.label, k)
    return parsed


def _spectrum_k_list(ctx: RunContext, rule: BinaryPisotRule) -> Dict[str, WaveNumber]:
    labels = list(ctx.config.k)
    if ctx.config.module_kmax is not None:
        if rule.q != 1:
            raise ConfigError(f"module points exist only for q = 1, {rule.spec()} has q={rule.q}")
        points = enumerate_module(rule.p, ctx.config.module_kmax, ctx.config.coeff_bound)
        labels.extend(point.to_wave_number().label for point in points)
    return _parse_k_list(labels, rule)


async def handle_spectrum(ctx: RunContext) -> Outcome:
    """Интенсивности по списку k, с формулой модельного множества для q = 1."""

    rule = _binary_rule(ctx, "spectrum")
    if ctx.config.n_max < TAIL_LEVELS:
        raise ConfigError(f"spectrum needs --n-max ≥ {TAIL_LEVELS} for the convergence check")
    wave_numbers = _spectrum_k_list(ctx, rule)
    jobs = [
        SpectrumJob(rule.spec(), label, ctx.config.n_max, ctx.config.prec_bits)
        for label in wave_numbers
    ]
    results = await evaluate_spectrum(jobs, ctx.workers)

    points: Dict[str, ModulePoint] = {}
    if rule.q == 1:
        for result in results:
            k = wave_numbers.get(result.label)
            if k is None or result.status != "ok" or not k.is_field:
                continue
            point = module_point(k, rule.p)
            if point is not None and result.intensity is not None:
                points[result.label] = point

    formula: Dict[str, Tuple] = {}
    if points:
        prec = Precision(ctx.config.prec_bits)
        window, dens = window_and_density(
            rule, prec, level=ctx.config.window_level, size_cap=ctx.settings.size_cap
        )
        labels = list(points)
        measured = [next(r.intensity for r in results if r.label == label) for label in labels]
        for label, row in zip(labels, spectrum_rows(rule, [points[x] for x in labels], measured, window, dens, prec)):
            formula[label] = row

    rows = []
    for result in results:
        point = points.get(result.label)
        extra = formula.get(result.label)
        rows.append(
            (
                result.label,
                point.c if point else None,
                point.d if point else None,
                result.value,
                result.intensity,
                result.converged,
                result.status,
                extra[3] if extra else None,
                extra[5] if extra else None,
            )
        )
    path = ctx.output_path("spectrum")
    written = write_table(
        path,
        SPECTRUM_HEADER,
        rows,
        fmt=ctx.config.format,
        digits=ctx.config.digits,
        timestamp=ctx.config.timestamp,
        extra={"rule": rule.spec(), "n_max": ctx.config.n_max},
    )
    failed = sum(1 for result in results if result.status != "ok")
    if failed:
        logger.warning("%s of %s k-points failed; see the status column", failed, len(results))
    return Outcome(
        output_path=path,
        rows=written,
        results=[
            (r.label, _as_float(r.value), _as_float(r.intensity), r.converged, r.status) for r in results
        ],
    )


def _as_float(value) -> Optional[float]:
    return None if value is None else float(value)


async def handle_amplitude(ctx: RunContext) -> Outcome:
    """Ряд A_n(k) для n = 0..n_max."""

    rule = _binary_rule(ctx, "amplitude")
    k = parse_k(_single_k(ctx, "amplitude"), rule.ring)
    n_max = max(ctx.config.n_max, 2)
    prec = precision_for(ctx, rule.ring, n_max)
    series = recursive_amplitudes(rule, k, n_max, prec)
    intensity = None
    converged = None
    if len(series.entries) > TAIL_LEVELS:
        estimate = intensity_estimate(series)
        intensity, converged = estimate.intensity, estimate.converged
        ctx.echo(
            f"I({k.label}) ≈ {mp.nstr(estimate.intensity, ctx.config.digits)}"
            f" (сходимость: {'да' if estimate.converged else 'нет'})"
        )
    path = ctx.output_path("amplitude")
    written = write_table(
        path,
        SERIES_HEADER,
        series_rows(series),
        fmt=ctx.config.format,
        digits=ctx.config.digits,
        timestamp=ctx.config.timestamp,
        extra={"rule": rule.spec(), "k": k.label},
    )
    return Outcome(
        output_path=path,
        rows=written,
        results=[(k.label, float(k.value(prec)), _as_float(intensity), converged, "ok")],
    )


def _certificate_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


async def handle_decay(ctx: RunContext) -> Outcome:
    """Профиль затухания и сертификат оценки c/n."""

    rule = _binary_rule(ctx, "decay")
    k = parse_k(_single_k(ctx, "decay"), rule.ring)
    n_scan = ctx.config.n_scan
    prec = precision_for(ctx, rule.ring, n_scan)
    outcome = certify_decay(rule, k, n_scan, ctx.config.grid_steps, prec, r_max=R_MAX)
    profile = outcome.profile
    rows = [
        (n, value, running)
        for (n, value), running in zip(profile.points, profile.running_max)
    ]

    if isinstance(outcome, DecayCertificate):
        ctx.echo(
            f"Сертификат: δ={mp.nstr(outcome.delta, 4)}, r={outcome.r}, ε={mp.nstr(outcome.epsilon, 6)}, "
            f"n0={outcome.n0}, c={mp.nstr(outcome.c, 6)} ({outcome.label})"
        )
        status = "certified"
    else:
        ctx.echo(f"Сертификат не найден: {outcome.reason}")
        status = "not-certified"

    path = ctx.output_path("decay")
    certificate = {"rule": rule.spec(), "k": k.label, "status": status, **outcome.to_dict()}
    if ctx.config.format == "csv":
        written = write_table(path, PROFILE_HEADER, rows, digits=ctx.config.digits, timestamp=ctx.config.timestamp)
        write_json(_certificate_path(path), certificate, digits=ctx.config.digits, timestamp=ctx.config.timestamp)
    else:
        written = write_table(
            path,
            PROFILE_HEADER,
            rows,
            fmt="json",
            digits=ctx.config.digits,
            timestamp=ctx.config.timestamp,
            extra={"certificate": certificate},
        )
    return Outcome(
        output_path=path,
        rows=written,
        results=[(k.label, float(k.value(prec)), float(profile.c), None, status)],
    )


async def handle_orbit(ctx: RunContext) -> Outcome:
    """Дробные части {ξθ^n}: зазор, число кластеров и пара (δ, r)."""

    rule = require_rule(ctx)
    ring = rule.ring
    text = ctx.config.xi or (ctx.config.k[0] if ctx.config.k else None)
    if text is None:
        raise ConfigError("orbit needs --xi")
    xi = parse_k(text, ring)
    N = ctx.config.n_max
    if N < 2:
        raise ConfigError(f"orbit needs --n-max ≥ 2, got {N}")
    tail_start = ctx.config.tail_start or default_tail_start(N)
    if not 1 <= tail_start < N:
        raise ConfigError(f"--tail-start must lie in [1, {N - 1}] for an orbit of length {N}, got {tail_start}")
    prec = precision_for(ctx, ring, N)
    report = orbit(xi, ring, N, prec, eps=ctx.config.eps)
    gap = gap_estimate(report, tail_start)
    clusters = cluster_count(report, ctx.config.eps, tail_start)

    summary = {
        "xi": xi.label,
        "N": N,
        "tail_start": tail_start,
        "gap": gap.gap,
        "bound": gap.bound,
        "satisfied": gap.satisfied,
        "clusters": clusters,
        "eps": ctx.config.eps,
    }
    ctx.echo(f"ξ = {xi.label}, N = {N}, хвост с n = {tail_start}")
    ctx.echo(f"Зазор: {mp.nstr(gap.gap, 8)} (граница {mp.nstr(gap.bound, 8)}, выполнено: {'да' if gap.satisfied else 'нет'})")
    ctx.echo(f"Кластеров: {clusters}")
    if not xi.is_field:
        try:
            witness = find_delta_r(report, ctx.config.grid_steps, R_MAX)
            summary["delta"] = witness.delta
            summary["r"] = witness.r
            ctx.echo(f"(δ, r) = ({mp.nstr(witness.delta, 4)}, {witness.r})")
        except WitnessNotFoundError as exc:
            summary["best_r"] = exc.best_r
            ctx.echo(f"Пара (δ, r) не найдена: {exc}")

    path = ctx.output_path("orbit")
    written = write_table(
        path,
        ORBIT_HEADER,
        orbit_rows(report),
        fmt=ctx.config.format,
        digits=ctx.config.digits,
        timestamp=ctx.config.timestamp,
        extra={"summary": summary},
    )
    return Outcome(
        output_path=path,
        rows=written,
        results=[(xi.label, float(xi.value(prec)), float(gap.gap), gap.satisfied, f"clusters={clusters}")],
    )


async def handle_rnms(ctx: RunContext) -> Outcome:
    """Средняя интенсивность и ее стандартная ошибка по реализациям."""

    rule = require_rule(ctx)
    if not isinstance(rule, RnmsRule):
        raise ConfigError("rnms expects 'm=<int>;probs=<list>'")
    jobs = [
        RnmsJob(
            rule.spec(),
            label,
            ctx.config.n_max,
            ctx.config.samples,
            ctx.config.seed,
            ctx.config.prec_bits,
            ctx.settings.size_cap,
        )
        for label in _parse_k_list(list(ctx.config.k), rule)
    ]
    results = await evaluate_rnms(jobs, ctx.workers)
    rows = [
        (r.label, r.value, r.classification, r.mean, r.stderr, r.samples, r.status) for r in results
    ]
    for r in results:
        if r.mean is not None:
            ctx.echo(f"k={r.label} [{r.classification}]: I = {mp.nstr(r.mean, 8)} ± {mp.nstr(r.stderr, 4)}")
    path = ctx.output_path("rnms")
    written = write_table(
        path,
        RNMS_HEADER,
        rows,
        fmt=ctx.config.format,
        digits=ctx.config.digits,
        timestamp=ctx.config.timestamp,
        extra={"rule": rule.spec(), "n": ctx.config.n_max, "seed": ctx.config.seed},
    )
    return Outcome(
        output_path=path,
        rows=written,
        results=[(r.label, _as_float(r.value), _as_float(r.mean), None, r.status) for r in results],
    )
