"""Модели данных журнала запусков."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class RunRecord:
    id: int
    config_hash: str
    code_version: str
    provenance: dict
    report_path: str | None
    manifest: dict
    created_at: str
