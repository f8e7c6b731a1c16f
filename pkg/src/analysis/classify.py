"""Пороги и классификация значений QMI."""

from __future__ import annotations

import logging
from collections.abc import Hashable, Mapping, Sequence
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from src.process.device import CrosstalkEdge, DeviceModel, nearest_neighbour_pairs, random_crosstalk

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.02  # бит
NULL_PERCENTILE = 99.0
# Нижняя граница порога: нулевой ансамбль точного пути даёт значения ~1e-12
MIN_THRESHOLD = 1e-6

BATH_COUPLED = "bath-coupled"
CLEAN = "clean"
SHARED_BATH = "shared-bath"
INDEPENDENT = "independent"


class ThresholdMode(str, Enum):
    fixed = "fixed"
    bootstrap = "bootstrap"


@dataclass(frozen=True)
class Threshold:
    value: float
    derivation: ThresholdMode = ThresholdMode.fixed

    def __post_init__(self) -> None:
        if not self.value > 0:
            raise ValueError(f"Порог должен быть положительным, получено {self.value}")

    def to_dict(self) -> dict:
        return {"value": float(self.value), "derivation": self.derivation.value}


def classify(
    values: Mapping[Hashable, float],
    threshold: Threshold,
    positive: str = BATH_COUPLED,
    negative: str = CLEAN,
) -> dict[Hashable, str]:
    """Значение строго выше порога → positive, иначе negative."""
    return {key: positive if value > threshold.value else negative for key, value in values.items()}


def classify_pairs(matrix: np.ndarray, qubits: Sequence[int], threshold: Threshold) -> dict[tuple[int, int], str]:
    """Пара (a, b): shared-bath, если обе записи (a,b) и (b,a) выше порога."""
    flags = {}
    for i, a in enumerate(qubits):
        for j in range(i + 1, len(qubits)):
            b = qubits[j]
            shared = matrix[i, j] > threshold.value and matrix[j, i] > threshold.value
            flags[(a, b)] = SHARED_BATH if shared else INDEPENDENT
    return flags


def null_model(
    model: DeviceModel, rng: np.random.Generator, j_range: tuple[float, float],
) -> DeviceModel:
    """Модель только с crosstalk: дефекты убраны, J перевыбраны на тех же (или соседних) рёбрах."""
    if model.crosstalk_edges:
        edges = tuple(
            CrosstalkEdge(e.a, e.b, float(rng.uniform(*j_range))) for e in model.crosstalk_edges
        )
    elif nearest_neighbour_pairs(model.register):
        edges = random_crosstalk(model.register, rng, j_range)
    else:
        edges = ()
    return replace(model, defects=(), crosstalk_edges=edges)


def null_ensemble(
    model: DeviceModel, *, count: int, seed: int, j_range: tuple[float, float],
) -> list[DeviceModel]:
    rng = np.random.default_rng(seed)
    return [null_model(model, rng, j_range) for _ in range(count)]


def bootstrap_threshold(scores: np.ndarray, percentile: float = NULL_PERCENTILE) -> Threshold:
    """Порог: перцентиль нулевого ансамбля (не ниже MIN_THRESHOLD)."""
    if len(scores) == 0:
        raise ValueError("Пустой нулевой ансамбль")
    value = float(np.percentile(scores, percentile))
    threshold = Threshold(max(value, MIN_THRESHOLD), ThresholdMode.bootstrap)
    logger.info(
        "Порог по нулевому ансамблю: %.4g бит (%d значений, перцентиль %.0f)",
        threshold.value, len(scores), percentile,
    )
    return threshold

