"""Манифест запуска: хеш конфига, версия кода, тайминги фаз, файлы выстрелов."""

from __future__ import annotations

import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import yaml

logger = logging.getLogger(__name__)

PACKAGE_NAME = "spacetime-shadows"

PHASES = ("build_model", "sample", "load", "estimate", "reconstruct", "analyze", "write_report")


def code_version() -> str:
    try:
        return version(PACKAGE_NAME)
    except PackageNotFoundError:
        return "dev"


class PhaseError(RuntimeError):
    """Ошибка фазы запуска; исходное исключение: в cause и __cause__."""

    def __init__(self, phase: str, cause: BaseException) -> None:
        super().__init__(f"Фаза {phase}: {type(cause).__name__}: {cause}")
        self.phase = phase
        self.cause = cause


@dataclass
class RunManifest:
    config_hash: str
    code_version: str = field(default_factory=code_version)
    timings: dict[str, float] = field(default_factory=dict)  # секунды
    shot_files: list[str] = field(default_factory=list)
    report_path: str | None = None

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        """Засечь время фазы и обернуть её ошибки в PhaseError."""
        if name not in PHASES:
            raise ValueError(f"Неизвестная фаза: {name}")
        logger.info("Фаза %s...", name)
        started = time.perf_counter()
        try:
            yield
        except PhaseError:
            raise
        except Exception as e:
            logger.error("Фаза %s завершилась ошибкой: %s", name, e)
            raise PhaseError(name, e) from e
        finally:
            elapsed = time.perf_counter() - started
            self.timings[name] = self.timings.get(name, 0.0) + elapsed
        logger.info("Фаза %s: %.2f с", name, elapsed)

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "code_version": self.code_version,
            "timings": {k: round(v, 6) for k, v in self.timings.items()},
            "shot_files": list(self.shot_files),
            "report_path": self.report_path,
        }

    @classmethod
    def from_dict(cls, data: dict) -> RunManifest:
        return cls(
            config_hash=data["config_hash"],
            code_version=data.get("code_version", "dev"),
            timings=dict(data.get("timings", {})),
            shot_files=list(data.get("shot_files", [])),
            report_path=data.get("report_path"),
        )


def write_manifest(path: str | Path, manifest: RunManifest) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        yaml.dump(manifest.to_dict(), sort_keys=False, allow_unicode=True), encoding="utf-8",
    )
    return path
