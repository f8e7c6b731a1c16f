"""Инструмент «измерить и приготовить» со случайными Клиффордами и его обращение.

Соглашение: для измерительного элемента U схема применяет U†, затем меряет Z
(элемент POVM E_x = U|x⟩⟨x|U†); приготовление даёт U|0⟩. Тогда
p = Tr[Υ (⊗E_x ⊗ ⊗P^T)], а снимок процесса собирается из
invert_measurement(u, x)^T на выходных ногах и d·invert_preparation(u)^T на входных.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from src.shadow.clifford import CLIFFORD_TABLE, NUM_CLIFFORDS
from src.tensor.pauli import PAULIS

QUBIT_DIM = 2
_KET = np.eye(2, dtype=complex)


def measurement_effect(u: int, x: int) -> np.ndarray:
    """E_x = U|x⟩⟨x|U†."""
    v = CLIFFORD_TABLE[u] @ _KET[x]
    return np.outer(v, v.conj())


def prepared_state(u: int) -> np.ndarray:
    """P = U|0⟩⟨0|U†."""
    return measurement_effect(u, 0)


def invert_measurement(u: int, x: int) -> np.ndarray:
    """Δ̂ = 3U*|x⟩⟨x|U^T − I: след 1, спектр {2, −1}."""
    return 3 * measurement_effect(u, x).T - np.eye(2)


def invert_preparation(u: int) -> np.ndarray:
    """D̂ = 3U|0⟩⟨0|U† − I: след 1, спектр {2, −1}."""
    return 3 * prepared_state(u) - np.eye(2)


def output_factor(u: int, x: int) -> np.ndarray:
    """Множитель снимка на выходной ноге: 3E_x − I."""
    return invert_measurement(u, x).T


def input_factor(u: int) -> np.ndarray:
    """Множитель снимка на входной ноге: d·(3P^T − I), след d."""
    return QUBIT_DIM * invert_preparation(u).T


def _measurement_table() -> np.ndarray:
    # [u, x, σ] = Tr[σ (3E_x − I)]
    table = np.empty((NUM_CLIFFORDS, 2, 4))
    for u in range(NUM_CLIFFORDS):
        for x in range(2):
            factor = output_factor(u, x)
            table[u, x] = [np.trace(p @ factor).real for p in PAULIS]
    return table


def _preparation_table() -> np.ndarray:
    # [u, σ] = Tr[σ · d(3P^T − I)]
    table = np.empty((NUM_CLIFFORDS, 4))
    for u in range(NUM_CLIFFORDS):
        factor = input_factor(u)
        table[u] = [np.trace(p @ factor).real for p in PAULIS]
    return table


MEAS_TABLE = _measurement_table()
PREP_TABLE = _preparation_table()
MEAS_TABLE.setflags(write=False)
PREP_TABLE.setflags(write=False)


@dataclass(frozen=True)
class CliffordInstrument:
    """Описание инструмента: поворот перед Z-измерением и приготовление.

    Сэмплер и формулы обращения зависят только от этого интерфейса.
    """
    table: np.ndarray = field(default_factory=lambda: CLIFFORD_TABLE, repr=False)

    @property
    def size(self) -> int:
        return len(self.table)

    def measurement_rotations(self, indices: np.ndarray) -> np.ndarray:
        """U† для массива индексов: форма (..., 2, 2)."""
        return np.conj(np.swapaxes(self.table[indices], -1, -2))

    def preparations(self, indices: np.ndarray) -> np.ndarray:
        """U для массива индексов (применяется к |0⟩ после сброса)."""
        return self.table[indices]

    def draw(self, uniforms: np.ndarray) -> np.ndarray:
        """Равномерные u ∈ [0, 1) → индексы ⌊u·|G|⌋."""
        return np.minimum((uniforms * self.size).astype(np.int64), self.size - 1).astype(np.uint8)


DEFAULT_INSTRUMENT = CliffordInstrument()
