"""Бюджет выстрелов: счёт причинно-фиксированных наблюдаемых, оценка числа теней, план."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from src.estimation.causality import process_trace
from src.estimation.observables import PauliObservable

logger = logging.getLogger(__name__)

# Константа C в N = C·ln(nM)·3^l/ε²; исходная оценка даёт только O(·)
SHOT_CONSTANT = 1.0


def count_causality_fixed(k: int, d: int = 2) -> int:
    """Σ_{j=1}^{k} (d²−1)·d^{4j−2}."""
    if k < 0 or d < 2:
        raise ValueError(f"Ожидалось k ≥ 0 и d ≥ 2, получено k={k}, d={d}")
    return sum((d * d - 1) * d ** (4 * j - 2) for j in range(1, k + 1))


def count_free(k: int, d: int = 2) -> int:
    """(d²)^{2k+1} − count_causality_fixed; строка I…I входит сюда (её значение: след)."""
    return (d * d) ** (2 * k + 1) - count_causality_fixed(k, d)


def shadow_norm(weight: int) -> float:
    """Квадрат теневой нормы l-локальной строки Паули при локальных Клиффордах."""
    return 3.0**weight


def required_shots(
    num_observables: int,
    epsilon: float,
    max_locality: int,
    num_qubits: float,
    constant: float = SHOT_CONSTANT,
) -> int:
    """⌈C · ln(n·M) · 3^l / ε²⌉."""
    if num_observables < 1 or epsilon <= 0 or max_locality < 0:
        raise ValueError("Ожидалось M ≥ 1, ε > 0, l ≥ 0")
    return math.ceil(
        constant * math.log(num_qubits * num_observables) * shadow_norm(max_locality) / epsilon**2
    )


def num_batches(num_observables: int) -> int:
    """K = 2·⌈log₂(2M)⌉ + 1: всегда нечётное."""
    return 2 * math.ceil(math.log2(2 * num_observables)) + 1


def estimator_scale(observables: list[PauliObservable] | tuple[PauliObservable, ...]) -> float:
    """d^{k_eff}: след маргинала. Во столько раз одиночный снимок Tr[O·Υ̂] шире единичного следа."""
    return process_trace(observables[0].legs) if observables else 1.0


@dataclass(frozen=True)
class EstimationPlan:
    observables: tuple[PauliObservable, ...]
    num_batches: int
    shots_per_batch: int
    epsilon: float

    def __post_init__(self) -> None:
        if self.num_batches < 1 or self.num_batches % 2 == 0:
            raise ValueError(f"Число пакетов должно быть нечётным и ≥ 1, получено {self.num_batches}")
        if self.shots_per_batch < 1:
            raise ValueError("В пакете должен быть хотя бы один выстрел")

    @property
    def total_shots(self) -> int:
        return self.num_batches * self.shots_per_batch

    @property
    def max_weight(self) -> int:
        return max((obs.weight for obs in self.observables), default=0)

    @classmethod
    def build(
        cls,
        observables: list[PauliObservable],
        epsilon: float,
        num_qubits: int,
        *,
        batches: int | None = None,
        constant: float = SHOT_CONSTANT,
    ) -> EstimationPlan:
        """План по формуле бюджета: K из числа наблюдаемых, выстрелы поровну по пакетам.

        Бюджет формулы умножается на d^{2k_eff}: дисперсия снимка растёт как
        квадрат следа, а ε относится к самим Tr[O·Υ].
        """
        if not observables:
            raise ValueError("План без наблюдаемых")
        m = len(observables)
        k = batches if batches is not None else num_batches(m)
        locality = max(obs.weight for obs in observables)
        scale = estimator_scale(observables)
        shots = math.ceil(required_shots(m, epsilon, locality, num_qubits, constant) * scale**2)
        plan = cls(tuple(observables), k, math.ceil(shots / k), epsilon)
        logger.debug(
            "План оценивания: M=%d, l=%d, ε=%.4g → %d выстрелов (%d × %d)",
            m, locality, epsilon, plan.total_shots, k, plan.shots_per_batch,
        )
        return plan

    @classmethod
    def for_shots(
        cls, observables: list[PauliObservable], shots: int, *, batches: int | None = None,
    ) -> EstimationPlan:
        """План под заданное число выстрелов; ε: обращение build при этих выстрелах (на шкале следа d^{k_eff})."""
        m = len(observables)
        k = batches if batches is not None else num_batches(m)
        k = min(k, shots if shots % 2 else shots - 1)
        if k < 1:
            raise ValueError(f"Слишком мало выстрелов для плана: {shots}")
        locality = max((obs.weight for obs in observables), default=0)
        qubits = len({leg.qubit for leg in observables[0].legs}) if observables else 1
        epsilon = estimator_scale(observables) * math.sqrt(
            SHOT_CONSTANT * math.log(max(qubits * m, 2)) * shadow_norm(locality) / shots
        )
        return cls(tuple(observables), k, shots // k, epsilon)
