"""Command-line entry point: ``python -m app.cli <command> [flags]``."""
from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from typing import Any, Dict, List, Optional, TextIO

from app.commands import Outcome, RunContext
from app.config import RunConfig, Settings, load_config_file
from app.db import RunStore
from app.errors import ConfigError, PisotError, PrecisionExhaustedError
from app.handlers import register_handlers

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_NON_CONFIG_FLAGS = {"config", "runs_db", "workers", "log_level", "handler", "command", "records"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.cli",
        description="Дифракция бинарных пизо-подстановок через экспоненциальные суммы",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_handlers(subparsers)
    return parser


def _flag_values(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: value for key, value in vars(args).items() if key not in _NON_CONFIG_FLAGS}


def _configure_logging(level_name: str) -> None:
    level = logging.getLevelName(level_name.upper())
    if not isinstance(level, int):
        raise ConfigError(f"Unknown log level {level_name!r}")
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(message)s",
    )
    logging.getLogger().setLevel(level)


async def run(ctx: RunContext, args: argparse.Namespace) -> Outcome:
    """Runs the selected handler and records the outcome in the journal."""

    logger.info("Starting %s (rule=%s)", args.command, ctx.config.rule)
    outcome = await args.handler(ctx)
    if ctx.run_id is not None:
        ctx.store.add_results(ctx.run_id, outcome.results)
        ctx.store.mark_done(
            ctx.run_id,
            output_path=str(outcome.output_path) if outcome.output_path else None,
            rows=outcome.rows,
        )
    logger.info("Finished %s: %s rows → %s", args.command, outcome.rows, outcome.output_path or "stdout")
    return outcome


def main(argv: Optional[List[str]] = None, *, stdout: Optional[TextIO] = None) -> int:
    """Точка входа: разбирает флаги, настраивает журнал и запускает команду."""

    args = build_parser().parse_args(argv)
    store: Optional[RunStore] = None
    run_id: Optional[int] = None
    try:
        settings = Settings.from_env()
        _configure_logging(args.log_level or settings.log_level)
        file_values = {"prec_bits": settings.prec_bits, **load_config_file(args.config)}
        config = RunConfig.build(file_values, _flag_values(args))
        workers = args.workers if args.workers is not None else settings.workers
        if workers < 1:
            raise ConfigError(f"--workers must be positive, got {workers}")
        store = RunStore(args.runs_db or settings.runs_db_path)
        if args.records:
            run_id = store.add_run(command=args.command, rule=config.rule, config_json=config.to_json())
        ctx = RunContext(
            config=config,
            settings=settings,
            store=store,
            run_id=run_id,
            workers=workers,
            stdout=stdout or sys.stdout,
        )
        asyncio.run(run(ctx, args))
        return EXIT_OK
    except ConfigError as exc:
        logger.error("Configuration error: %s", exc)
        _record_failure(store, run_id, exc)
        return EXIT_CONFIG
    except PrecisionExhaustedError as exc:
        logger.error("Precision exhausted: %s", exc)
        _record_failure(store, run_id, exc)
        return EXIT_NUMERIC
    except PisotError as exc:
        logger.error("%s failed: %s", args.command, exc)
        _record_failure(store, run_id, exc)
        return EXIT_NUMERIC
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        _record_failure(store, run_id, exc)
        return EXIT_CONFIG
    finally:
        if store is not None:
            store.close()


def _record_failure(store: Optional[RunStore], run_id: Optional[int], exc: BaseException) -> None:
    if store is not None and run_id is not None:
        store.mark_failed(run_id, str(exc))


if __name__ == "__main__":
    sys.exit(main())
