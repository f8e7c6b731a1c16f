"""Медиана средних по K последовательным пакетам выстрелов."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable

import numpy as np

from src.estimation.budget import EstimationPlan
from src.estimation.observables import PauliObservable
from src.estimation.tables import ExpectationTable
from src.shadow.records import ShadowBatch
from src.shadow.snapshot import shot_pauli_values
from src.tensor import LabelledOperator, permute_legs

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 4096


class ShotShortfallError(ValueError):
    """Выстрелов меньше, чем требует план."""

    def __init__(self, needed: int, available: int) -> None:
        super().__init__(f"Недостаточно выстрелов: план требует {needed}, доступно {available}")
        self.needed = needed
        self.available = available


def median_of_means(batch_means: np.ndarray) -> np.ndarray:
    """Медиана по оси пакетов (ось 0)."""
    return np.median(batch_means, axis=0)


def estimate_observables(
    snapshot_stream: Iterable[LabelledOperator], plan: EstimationPlan,
) -> dict[PauliObservable, float]:
    """Общий путь: Tr[O·Υ̂] по явным снимкам, среднее внутри пакета, медиана по пакетам."""
    legs = plan.observables[0].legs
    matrices = [obs.matrix() for obs in plan.observables]
    means = np.zeros((plan.num_batches, len(matrices)))
    stream = iter(snapshot_stream)
    consumed = 0
    for b in range(plan.num_batches):
        sums = np.zeros(len(matrices))
        for snap in itertools.islice(stream, plan.shots_per_batch):
            data = permute_legs(snap, legs).data
            sums += [np.real(np.vdot(m.conj().T, data)) for m in matrices]
            consumed += 1
        if consumed < (b + 1) * plan.shots_per_batch:
            raise ShotShortfallError(plan.total_shots, consumed)
        means[b] = sums / plan.shots_per_batch
    estimates = median_of_means(means)
    return {obs: float(v) for obs, v in zip(plan.observables, estimates)}


def batch_means(
    batch: ShadowBatch, plan: EstimationPlan, chunk: int = DEFAULT_CHUNK,
) -> np.ndarray:
    """Средние Tr[O·Υ̂] по пакетам прямо из записей: форма (K, M)."""
    if len(batch) < plan.total_shots:
        raise ShotShortfallError(plan.total_shots, len(batch))
    legs = plan.observables[0].legs
    strings = np.array([obs.indices for obs in plan.observables], dtype=np.int64)
    means = np.zeros((plan.num_batches, len(strings)))
    for b in range(plan.num_batches):
        begin = b * plan.shots_per_batch
        end = begin + plan.shots_per_batch
        total = np.zeros(len(strings))
        for lo in range(begin, end, chunk):
            part = batch.slice(lo, min(lo + chunk, end))
            total += shot_pauli_values(part, legs, strings).sum(axis=0)
        means[b] = total / plan.shots_per_batch
    return means


def estimate_table(batch: ShadowBatch, plan: EstimationPlan) -> ExpectationTable:
    """Быстрый путь медианы средних по записям выстрелов."""
    estimates = median_of_means(batch_means(batch, plan))
    table = ExpectationTable(
        legs=plan.observables[0].legs,
        letters=tuple(obs.letters for obs in plan.observables),
        estimates=estimates,
        num_batches=plan.num_batches,
        shots=plan.total_shots,
    )
    logger.debug(
        "Медиана средних: %d наблюдаемых, %d пакетов по %d выстрелов",
        len(table), plan.num_batches, plan.shots_per_batch,
    )
    return table
