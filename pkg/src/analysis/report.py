"""Отчёт о немарковости и его YAML-сериализация (схема версии 1)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from src.analysis.classify import Threshold, ThresholdMode

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
NEGATIVE_TOL = 1e-9


def _round(value: float | None) -> float | None:
    """Округление до 12 значащих цифр."""
    if value is None:
        return None
    return float(f"{value:.12g}")


@dataclass(frozen=True)
class QubitEntry:
    id: int
    x: int
    y: int
    filtered_qmi: float
    naive_qmi: float | None = None
    filtered_se: float | None = None
    exact_filtered_qmi: float | None = None
    classification: str = "clean"

    def to_dict(self) -> dict:
        data = {
            "id": self.id,
            "x": self.x,
            "y": self.y,
            "filtered_qmi": _round(self.filtered_qmi),
            "naive_qmi": _round(self.naive_qmi),
            "filtered_se": _round(self.filtered_se),
            "exact_filtered_qmi": _round(self.exact_filtered_qmi),
            "classification": self.classification,
        }
        return {k: v for k, v in data.items() if v is not None}


@dataclass(frozen=True)
class NonMarkovReport:
    qubits: tuple[QubitEntry, ...]
    thresholds: dict[str, Threshold]
    provenance: dict
    common_cause: np.ndarray | None = None
    pair_flags: dict[tuple[int, int], str] = field(default_factory=dict)
    spatial: np.ndarray | None = None
    num_steps: int = 2

    def __post_init__(self) -> None:
        values = [q.filtered_qmi for q in self.qubits]
        values += [q.naive_qmi for q in self.qubits if q.naive_qmi is not None]
        for matrix in (self.common_cause, self.spatial):
            if matrix is not None:
                values += list(np.asarray(matrix).reshape(-1))
        if values and min(values) < -NEGATIVE_TOL:
            raise ValueError(f"Отрицательное значение QMI в отчёте: {min(values):.3e}")

    @property
    def qubit_ids(self) -> list[int]:
        return [q.id for q in self.qubits]

    def flagged(self) -> list[int]:
        return [q.id for q in self.qubits if q.classification != "clean"]

    def shared_pairs(self) -> list[tuple[int, int]]:
        return [pair for pair, flag in self.pair_flags.items() if flag == "shared-bath"]

    def heatmap(self, field_name: str = "filtered_qmi") -> list[tuple[int, int, float]]:
        """Тройки (x, y, значение) для внешних построителей тепловых карт."""
        return [
            (q.x, q.y, float(getattr(q, field_name)))
            for q in self.qubits if getattr(q, field_name) is not None
        ]

    def to_dict(self) -> dict:
        data: dict = {
            "schema_version": SCHEMA_VERSION,
            "provenance": dict(self.provenance),
            "num_steps": self.num_steps,
            "thresholds": {name: t.to_dict() for name, t in self.thresholds.items()},
            "qubits": [q.to_dict() for q in self.qubits],
            "heatmaps": {
                "filtered_qmi": [list(t) for t in self.heatmap("filtered_qmi")],
            },
        }
        naive = self.heatmap("naive_qmi")
        if naive:
            data["heatmaps"]["naive_qmi"] = [list(t) for t in naive]
        if self.common_cause is not None:
            data["common_cause"] = {
                "qubits": self.qubit_ids,
                "matrix": [[_round(v) for v in row] for row in np.asarray(self.common_cause)],
                "pairs": [
                    {"pair": list(pair), "classification": flag}
                    for pair, flag in self.pair_flags.items()
                ],
            }
        if self.spatial is not None:
            data["spatial"] = {
                "qubits": self.qubit_ids,
                "matrix": [[_round(v) for v in row] for row in np.asarray(self.spatial)],
            }
        return data

    def to_yaml(self) -> str:
        return yaml.dump(self.to_dict(), sort_keys=False, allow_unicode=True, default_flow_style=None)

    @classmethod
    def from_dict(cls, data: dict) -> NonMarkovReport:
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"Неподдерживаемая версия схемы отчёта: {version}")
        qubits = tuple(QubitEntry(**q) for q in data["qubits"])
        thresholds = {
            name: Threshold(t["value"], ThresholdMode(t["derivation"]))
            for name, t in data["thresholds"].items()
        }
        common_cause, pair_flags, spatial = None, {}, None
        if "common_cause" in data:
            common_cause = np.array(data["common_cause"]["matrix"], dtype=float)
            pair_flags = {
                tuple(p["pair"]): p["classification"] for p in data["common_cause"]["pairs"]
            }
        if "spatial" in data:
            spatial = np.array(data["spatial"]["matrix"], dtype=float)
        return cls(
            qubits=qubits,
            thresholds=thresholds,
            provenance=data["provenance"],
            common_cause=common_cause,
            pair_flags=pair_flags,
            spatial=spatial,
            num_steps=data.get("num_steps", 2),
        )


def write_report(path: str | Path, report: NonMarkovReport) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_yaml(), encoding="utf-8")
    logger.info("Отчёт сохранён: %s", path)
    return path


def read_report(path: str | Path) -> NonMarkovReport:
    with open(path, encoding="utf-8") as f:
        return NonMarkovReport.from_dict(yaml.safe_load(f))
