"""Handlers for rule inspection, patch export and the run history."""
from __future__ import annotations

import logging
from typing import Optional

from mpmath import mp

from app.commands import Outcome, RunContext
from app.errors import ConfigError, DomainError
from app.export import write_json, write_table
from app.geometry import density, patch_rows, realize
from app.quadfield import Precision, RingParams, embed, recurrence_f
from app.substitution import (
    BinaryPisotRule,
    Rule,
    RnmsRule,
    counts,
    eigen,
    iterate,
    parse_rule,
    rnms_eigen,
    sample_rnms,
    stochastic_matrix,
)
from app.wavenumber import WaveNumber

logger = logging.getLogger(__name__)

F_TABLE_SIZE = 21
PATCH_HEADER = ("index", "letter", "u", "v", "position", "star")


def require_rule(ctx: RunContext) -> Rule:
    if not ctx.config.rule:
        raise ConfigError("--rule is required for this command")
    return parse_rule(ctx.config.rule)


def precision_for(ctx: RunContext, ring: RingParams, level: int) -> Precision:
    """Configured precision, raised to the scaling rule for ``level``."""

    return Precision(ctx.config.prec_bits).at_least(Precision.for_level(ring, level))


def _yes_no(flag: bool) -> str:
    return "да" if flag else "нет"


async def handle_inspect(ctx: RunContext) -> Outcome:
    """Печатает матрицу, θ, θ', признак PV и таблицу F_n."""

    rule = require_rule(ctx)
    ring = rule.ring
    prec = Precision(ctx.config.prec_bits)
    if isinstance(rule, BinaryPisotRule):
        system = eigen(rule, prec)
        matrix = [list(row) for row in rule.matrix()]
    else:
        system = rnms_eigen(rule, prec)
        matrix = [[str(value) for value in row] for row in stochastic_matrix(rule)]
    f_table = [recurrence_f(ring, n) for n in range(F_TABLE_SIZE)]
    a_count, b_count = counts(rule, ctx.config.n_max)

    ctx.echo(f"Правило: {rule.spec()}")
    ctx.echo(f"Матрица: {matrix}")
    ctx.echo(f"θ  = {mp.nstr(system.theta_value, ctx.config.digits)}")
    ctx.echo(f"θ' = {mp.nstr(system.theta_conj, ctx.config.digits)}")
    ctx.echo(f"PV: {_yes_no(system.is_pv)}")
    ctx.echo(f"F_n (n=0..{F_TABLE_SIZE - 1}): " + ", ".join(str(f) for f in f_table))
    ctx.echo(f"Букв в w^({ctx.config.n_max}): a={a_count}, b={b_count}")
    if isinstance(rule, RnmsRule):
        for i, prob in enumerate(rule.probs):
            ctx.echo(f"  вариант {i}: a ↦ {rule.variant_word(i)} с вероятностью {prob}")

    if not ctx.config.out:
        return Outcome(rows=F_TABLE_SIZE)
    path = ctx.output_path("inspect")
    write_json(
        path,
        {
            "rule": rule.spec(),
            "matrix": matrix,
            "theta": system.theta_value,
            "theta_conj": system.theta_conj,
            "pv": system.is_pv,
            "f_table": f_table,
            "counts": {"n": ctx.config.n_max, "a": a_count, "b": b_count},
        },
        digits=ctx.config.digits,
        timestamp=ctx.config.timestamp,
    )
    return Outcome(output_path=path, rows=F_TABLE_SIZE)


async def handle_patch(ctx: RunContext) -> Outcome:
    """Экспортирует позиции w^(n) и их звездные образы."""

    rule = require_rule(ctx)
    n = ctx.config.n_max
    if isinstance(rule, BinaryPisotRule):
        word = iterate(rule, n, size_cap=ctx.settings.size_cap)
    else:
        word = sample_rnms(rule, n, ctx.config.seed, size_cap=ctx.settings.size_cap)
    patch = realize(word, rule.ring)
    prec = precision_for(ctx, rule.ring, n)
    rows = patch_rows(patch, prec)
    stars = [row[-1] for row in rows]

    ctx.echo(f"Точек: {len(patch)}, длина: {mp.nstr(embed(patch.total_length, prec), ctx.config.digits)}")
    ctx.echo(f"Плотность: {mp.nstr(density(patch, prec), ctx.config.digits)}")
    ctx.echo(f"Звездные образы: [{mp.nstr(min(stars), 8)}, {mp.nstr(max(stars), 8)}]")

    path = ctx.output_path("patch")
    written = write_table(
        path,
        PATCH_HEADER,
        rows,
        fmt=ctx.config.format,
        digits=ctx.config.digits,
        timestamp=ctx.config.timestamp,
        extra={"rule": rule.spec(), "n": n},
    )
    return Outcome(output_path=path, rows=written)


def _describe_run(row) -> str:
    output: Optional[str] = row["output_path"]
    suffix = f" → {output}" if output else ""
    error = f" ({row['error']})" if row["error"] else ""
    return f"#{row['id']} {row['created_at']} {row['command']} {row['rule'] or '-'} [{row['status']}]{suffix}{error}"


async def handle_history(ctx: RunContext) -> Outcome:
    """Показывает последние запуски из журнала."""

    runs = ctx.store.list_runs(limit=20)
    if not runs:
        ctx.echo("Журнал пуст.")
    for row in runs:
        ctx.echo(_describe_run(row))
    return Outcome(rows=len(runs))


def parse_k(text: str, ring: RingParams) -> WaveNumber:
    try:
        return WaveNumber.parse(text, ring)
    except DomainError as exc:
        raise ConfigError(f"cannot read wave number {text!r}: {exc}") from exc
