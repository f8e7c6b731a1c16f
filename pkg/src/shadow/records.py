"""Записи выстрелов: индексы Клиффордов и исходы измерений по (кубит, момент)."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ShadowRecord:
    """Один выстрел.

    meas_clifford и outcome: форма (k+1, N) по моментам t₀…t_k;
    prep_clifford: форма (k, N) по моментам t₁…t_k.
    """
    qubits: tuple[int, ...]
    meas_clifford: np.ndarray
    outcome: np.ndarray
    prep_clifford: np.ndarray
    seed: int
    shot_index: int = 0

    def __post_init__(self) -> None:
        n = len(self.qubits)
        k = self.num_steps
        if self.meas_clifford.shape != (k + 1, n) or self.outcome.shape != (k + 1, n):
            raise ValueError(
                f"Неполная сетка измерений: ожидалось ({k + 1}, {n}), "
                f"получено {self.meas_clifford.shape} / {self.outcome.shape}"
            )
        if self.prep_clifford.shape != (k, n):
            raise ValueError(
                f"Неполная сетка приготовлений: ожидалось ({k}, {n}), получено {self.prep_clifford.shape}"
            )

    @property
    def num_steps(self) -> int:
        return self.meas_clifford.shape[0] - 1


@dataclass(frozen=True)
class ShadowBatch:
    """Непрерывный диапазон выстрелов [start, start + len) одного мастер-сида."""
    qubits: tuple[int, ...]
    num_steps: int
    master_seed: int
    start: int
    meas_clifford: np.ndarray  # (B, k+1, N) uint8
    outcome: np.ndarray  # (B, k+1, N) uint8
    prep_clifford: np.ndarray  # (B, k, N) uint8

    def __post_init__(self) -> None:
        b, n, k = len(self.meas_clifford), len(self.qubits), self.num_steps
        expected = {
            "meas_clifford": (b, k + 1, n),
            "outcome": (b, k + 1, n),
            "prep_clifford": (b, k, n),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name}: ожидалась форма {shape}, получено {getattr(self, name).shape}")

    def __len__(self) -> int:
        return len(self.meas_clifford)

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    def column(self, qubit: int) -> int:
        try:
            return self.qubits.index(qubit)
        except ValueError:
            raise KeyError(f"Кубит {qubit} отсутствует в записях") from None

    def record(self, i: int) -> ShadowRecord:
        return ShadowRecord(
            qubits=self.qubits,
            meas_clifford=self.meas_clifford[i],
            outcome=self.outcome[i],
            prep_clifford=self.prep_clifford[i],
            seed=self.master_seed,
            shot_index=self.start + i,
        )

    def slice(self, begin: int, end: int) -> ShadowBatch:
        return ShadowBatch(
            self.qubits, self.num_steps, self.master_seed, self.start + begin,
            self.meas_clifford[begin:end], self.outcome[begin:end], self.prep_clifford[begin:end],
        )

    def take(self, indices: np.ndarray) -> ShadowBatch:
        """Подвыборка выстрелов (для бутстрепа); start теряет смысл и равен 0."""
        return ShadowBatch(
            self.qubits, self.num_steps, self.master_seed, 0,
            self.meas_clifford[indices], self.outcome[indices], self.prep_clifford[indices],
        )

    @classmethod
    def concat(cls, batches: Sequence[ShadowBatch]) -> ShadowBatch:
        if not batches:
            raise ValueError("Нечего объединять")
        first = batches[0]
        for b in batches[1:]:
            if (b.qubits, b.num_steps, b.master_seed) != (first.qubits, first.num_steps, first.master_seed):
                raise ValueError("Пакеты выстрелов от разных экспериментов")
        return cls(
            first.qubits, first.num_steps, first.master_seed, first.start,
            np.concatenate([b.meas_clifford for b in batches]),
            np.concatenate([b.outcome for b in batches]),
            np.concatenate([b.prep_clifford for b in batches]),
        )

    @classmethod
    def empty(cls, qubits: Sequence[int], num_steps: int, master_seed: int) -> ShadowBatch:
        n = len(qubits)
        return cls(
            tuple(qubits), num_steps, master_seed, 0,
            np.zeros((0, num_steps + 1, n), np.uint8),
            np.zeros((0, num_steps + 1, n), np.uint8),
            np.zeros((0, num_steps, n), np.uint8),
        )
