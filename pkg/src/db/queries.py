"""SQL-запросы журнала запусков."""

from __future__ import annotations

import json

import aiosqlite

from src.db.database import Database
from src.db.models import RunRecord
from src.harness.manifest import RunManifest


def _record(row: aiosqlite.Row) -> RunRecord:
    return RunRecord(
        id=row["id"],
        config_hash=row["config_hash"],
        code_version=row["code_version"],
        provenance=json.loads(row["provenance"]),
        report_path=row["report_path"],
        manifest=json.loads(row["manifest_json"]),
        created_at=row["created_at"],
    )


async def save_run(db: Database, manifest: RunManifest, provenance: dict) -> int:
    """Записать завершённый запуск."""
    cursor = await db.execute(
        "INSERT INTO runs (config_hash, code_version, provenance, report_path, manifest_json) "
        "VALUES (?, ?, ?, ?, ?)",
        (
            manifest.config_hash,
            manifest.code_version,
            json.dumps(provenance, ensure_ascii=False, sort_keys=True),
            manifest.report_path,
            json.dumps(manifest.to_dict(), ensure_ascii=False),
        ),
    )
    await db.commit()
    return cursor.lastrowid


async def list_runs(db: Database, config_hash: str | None = None, limit: int = 50) -> list[RunRecord]:
    """Последние запуски, новые первыми; опционально только для одного конфига."""
    if config_hash is None:
        rows = await db.fetchall("SELECT * FROM runs ORDER BY id DESC LIMIT ?", (limit,))
    else:
        rows = await db.fetchall(
            "SELECT * FROM runs WHERE config_hash = ? ORDER BY id DESC LIMIT ?",
            (config_hash, limit),
        )
    return [_record(r) for r in rows]
