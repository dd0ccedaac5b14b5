"""Handler registration helpers for the command-line parser."""
from __future__ import annotations

import argparse
from typing import Awaitable, Callable, Dict

from app.commands import COMMANDS, Outcome, RunContext, add_run_flags
from app.handlers import analysis, common

Handler = Callable[[RunContext], Awaitable[Outcome]]

HANDLERS: Dict[str, Handler] = {
    "inspect": common.handle_inspect,
    "patch": common.handle_patch,
    "history": common.handle_history,
    "spectrum": analysis.handle_spectrum,
    "amplitude": analysis.handle_amplitude,
    "decay": analysis.handle_decay,
    "orbit": analysis.handle_orbit,
    "rnms": analysis.handle_rnms,
}


def register_handlers(subparsers: argparse._SubParsersAction) -> None:
    """Attach every command of the table to the parser."""

    for command in COMMANDS:
        parser = subparsers.add_parser(command.name, help=command.description, description=command.description)
        add_run_flags(parser)
        parser.set_defaults(handler=HANDLERS[command.name], command=command.name, records=command.records)
