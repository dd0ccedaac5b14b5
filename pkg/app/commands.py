"""Command table and the flags every command accepts."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, List, Optional, TextIO

from app.db import ResultRow

if TYPE_CHECKING:
    from app.config import RunConfig, Settings
    from app.db import RunStore


@dataclass(frozen=True)
class Command:
    name: str
    description: str
    records: bool = True


COMMANDS: List[Command] = [
    Command("inspect", "Матрица подстановки, θ, θ', признак PV и таблица F_n"),
    Command("patch", "Геометрическая реализация w^(n): позиции и их звездные образы"),
    Command("spectrum", "Интенсивности I(k) для списка k или точек модуля Фурье"),
    Command("amplitude", "Ряд амплитуд A_n(k) по рекурсии"),
    Command("decay", "Профиль затухания n·|A_n|²/θ^(2n) и сертификат c/n"),
    Command("orbit", "Дробные части {ξθ^n}: зазор, кластеры, пара (δ, r)"),
    Command("rnms", "Статистика интенсивностей случайной подстановки"),
    Command("history", "Последние запуски из журнала", records=False),
]


def add_run_flags(parser: argparse.ArgumentParser) -> None:
    """Регистрирует флаги запуска; значение None означает «не задано»."""

    parser.add_argument("--config", help="JSON file with run parameters; flags win over it")
    parser.add_argument("--rule", help="'w=<word>' or 'm=<int>;probs=<list>'")
    parser.add_argument("--k", action="append", help="wave number, repeatable: 0, 1/3, [u,v]/den, sqrt(2), pi")
    parser.add_argument("--module-kmax", type=float, help="enumerate module points with 0 ≤ k ≤ this value")
    parser.add_argument("--coeff-bound", type=int, help="bound on |c|, |d| for module points")
    parser.add_argument("--n-max", type=int, help="substitution level")
    parser.add_argument("--prec-bits", type=int, help="working precision in bits")
    parser.add_argument("--samples", type=int, help="number of random realizations")
    parser.add_argument("--seed", type=int, help="root seed of the random streams")
    parser.add_argument("--grid-steps", type=int, help="steps of the δ grid")
    parser.add_argument("--n-scan", type=int, help="last level checked by the decay certificate")
    parser.add_argument("--xi", help="ξ for the orbit command")
    parser.add_argument("--eps", type=float, help="cluster half-width in (0, 1/4)")
    parser.add_argument("--tail-start", type=int, help="first n of the orbit tail")
    parser.add_argument("--window-level", type=int, help="level of the patch that estimates the window")
    parser.add_argument("--digits", type=int, help="significant digits in data files")
    parser.add_argument("--out", help="output path")
    parser.add_argument("--format", choices=["csv", "json"], help="output format")
    parser.add_argument(
        "--no-timestamp",
        dest="timestamp",
        action="store_const",
        const=False,
        help="omit the generation time so reruns are byte-identical",
    )
    parser.add_argument("--runs-db", help="SQLite run journal (':memory:' allowed)")
    parser.add_argument("--workers", type=int, help="processes for k-point evaluation")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")


@dataclass
class RunContext:
    """Everything a handler needs for one run."""

    config: "RunConfig"
    settings: "Settings"
    store: "RunStore"
    run_id: Optional[int]
    workers: int = 1
    stdout: TextIO = field(default_factory=lambda: sys.stdout)

    def echo(self, text: str = "") -> None:
        print(text, file=self.stdout)

    def output_path(self, command: str) -> Path:
        return Path(self.config.out or f"{command}.{self.config.format}")


@dataclass
class Outcome:
    output_path: Optional[Path] = None
    rows: int = 0
    results: List[ResultRow] = field(default_factory=list)
