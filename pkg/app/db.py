"""SQLite helper functions for storing the run history."""
from __future__ import annotations

import sqlite3
from contextlib import closing
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

ResultRow = Tuple[str, Optional[float], Optional[float], Optional[bool], str]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class RunStore:
    """A tiny wrapper around SQLite for run bookkeeping."""

    def __init__(self, db_path: Union[Path, str]) -> None:
        # check_same_thread=False позволяет писать из потоков исполнителя
        self.connection = sqlite3.connect(str(db_path), check_same_thread=False)
        self.connection.row_factory = sqlite3.Row
        self._ensure_schema()

    def _ensure_schema(self) -> None:
        """Создает таблицы при первом запуске."""
        with closing(self.connection.cursor()) as cur:
            cur.execute(
                """
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    command TEXT NOT NULL,
                    rule TEXT,
                    config TEXT NOT NULL,
                    status TEXT NOT NULL DEFAULT 'running',
                    output_path TEXT,
                    rows INTEGER,
                    error TEXT,
                    created_at TEXT NOT NULL,
                    finished_at TEXT
                );
                """
            )
            cur.execute(
                """
                CREATE TABLE IF NOT EXISTS results (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    run_id INTEGER NOT NULL REFERENCES runs (id),
                    label TEXT NOT NULL,
                    value REAL,
                    intensity REAL,
                    converged INTEGER,
                    status TEXT NOT NULL DEFAULT 'ok'
                );
                """
            )
            cur.execute(
                """
                CREATE INDEX IF NOT EXISTS idx_results_run
                ON results (run_id);
                """
            )
            # Простейшие миграции для файлов старых версий
            cur.execute("PRAGMA table_info(runs);")
            existing_columns = {row[1] for row in cur.fetchall()}
            legacy = "status" not in existing_columns
            if legacy:
                cur.execute("ALTER TABLE runs ADD COLUMN status TEXT NOT NULL DEFAULT 'running'")
            if "rows" not in existing_columns:
                cur.execute("ALTER TABLE runs ADD COLUMN rows INTEGER")
            if "error" not in existing_columns:
                cur.execute("ALTER TABLE runs ADD COLUMN error TEXT")
            if "finished_at" not in existing_columns:
                cur.execute("ALTER TABLE runs ADD COLUMN finished_at TEXT")

            if legacy:
                # у старых записей статуса не было
                cur.execute(
                    """
                    UPDATE runs
                    SET status = CASE WHEN output_path IS NULL THEN 'failed' ELSE 'done' END
                    """
                )
            self.connection.commit()

    def add_run(self, *, command: str, rule: Optional[str], config_json: str) -> int:
        """Сохраняет новый запуск и возвращает его ID."""

        with closing(self.connection.cursor()) as cur:
            cur.execute(
                """
                INSERT INTO runs (command, rule, config, status, created_at)
                VALUES (?, ?, ?, 'running', ?)
                """,
                (command, rule, config_json, _now()),
            )
            self.connection.commit()
            return int(cur.lastrowid)

    def mark_done(self, run_id: int, *, output_path: Optional[str], rows: int) -> None:
        """Отмечает запуск как завершенный."""

        with closing(self.connection.cursor()) as cur:
            cur.execute(
                """
                UPDATE runs
                SET status = 'done', output_path = ?, rows = ?, finished_at = ?
                WHERE id = ?
                """,
                (output_path, rows, _now(), run_id),
            )
            self.connection.commit()

    def mark_failed(self, run_id: int, error: str) -> None:
        """Помечает запуск как неудачный и сохраняет текст ошибки."""

        with closing(self.connection.cursor()) as cur:
            cur.execute(
                """
                UPDATE runs
                SET status = 'failed', error = ?, finished_at = ?
                WHERE id = ?
                """,
                (error, _now(), run_id),
            )
            self.connection.commit()

    def add_results(self, run_id: int, rows: Iterable[ResultRow]) -> int:
        """Сохраняет строки результатов (label, value, intensity, converged, status)."""

        payload = [
            (run_id, label, value, intensity, None if converged is None else int(converged), status)
            for label, value, intensity, converged, status in rows
        ]
        if not payload:
            return 0
        with closing(self.connection.cursor()) as cur:
            cur.executemany(
                """
                INSERT INTO results (run_id, label, value, intensity, converged, status)
                VALUES (?, ?, ?, ?, ?, ?)
                """,
                payload,
            )
            self.connection.commit()
            return len(payload)

    def list_runs(self, *, limit: int = 20) -> List[sqlite3.Row]:
        """Возвращает последние запуски, новые первыми."""

        with closing(self.connection.cursor()) as cur:
            cur.execute(
                """
                SELECT id, command, rule, status, output_path, rows, error, created_at
                FROM runs
                ORDER BY id DESC
                LIMIT ?
                """,
                (limit,),
            )
            return cur.fetchall()

    def results_for(self, run_id: int) -> Sequence[sqlite3.Row]:
        with closing(self.connection.cursor()) as cur:
            cur.execute(
                """
                SELECT label, value, intensity, converged, status
                FROM results
                WHERE run_id = ?
                ORDER BY id ASC
                """,
                (run_id,),
            )
            return cur.fetchall()

    def close(self) -> None:
        self.connection.close()
