"""Оркестрация экспериментов: пул потоков, манифест, фазы запуска."""

from src.harness.manifest import PhaseError, RunManifest
from src.harness.workers import WorkerPool

__all__ = ["PhaseError", "RunManifest", "WorkerPool"]
