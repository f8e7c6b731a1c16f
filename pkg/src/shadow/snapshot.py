"""Однократный снимок процесса и его Паули-значения без построения матриц."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence

import numpy as np

from src.process.marginals import MarginalSpec
from src.shadow.instruments import MEAS_TABLE, PREP_TABLE, input_factor, output_factor
from src.shadow.records import ShadowBatch, ShadowRecord
from src.tensor import LabelledOperator, LegError, LegLabel
from src.tensor.legs import Direction
from src.tensor.pauli import from_pauli_coefficients

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 4096


def _check_legs(qubits: Sequence[int], num_steps: int, legs: Sequence[LegLabel]) -> None:
    for leg in legs:
        if leg.qubit not in qubits or leg.time > num_steps or leg.direction is Direction.sys:
            raise LegError(f"Нога {leg} не покрыта записями выстрелов")


def snapshot(record: ShadowRecord, spec: MarginalSpec) -> LabelledOperator:
    """Υ̂ маргинала spec: ⊗ (3E_x − I) на выходах и d(3P^T − I) на входах."""
    legs = spec.legs(record.qubits)
    _check_legs(record.qubits, record.num_steps, legs)
    data = np.array([[1.0 + 0j]])
    for leg in legs:
        col = record.qubits.index(leg.qubit)
        if leg.direction is Direction.out:
            factor = output_factor(record.meas_clifford[leg.time, col], record.outcome[leg.time, col])
        else:
            factor = input_factor(record.prep_clifford[leg.time - 1, col])
        data = np.kron(data, factor)
    return LabelledOperator(data, legs).hermitized()


def leg_pauli_values(batch: ShadowBatch, leg: LegLabel) -> np.ndarray:
    """Tr[σ · множитель снимка] на одной ноге для каждого выстрела: форма (B, 4)."""
    col = batch.column(leg.qubit)
    if leg.direction is Direction.out:
        u = batch.meas_clifford[:, leg.time, col]
        x = batch.outcome[:, leg.time, col]
        return MEAS_TABLE[u, x]
    return PREP_TABLE[batch.prep_clifford[:, leg.time - 1, col]]


def shot_pauli_values(
    batch: ShadowBatch, legs: Sequence[LegLabel], observables: np.ndarray,
) -> np.ndarray:
    """Tr[O · Υ̂_s] для каждого выстрела s и наблюдаемой O.

    observables: индексы букв формы (M, L) в порядке legs; результат (B, M).
    """
    _check_legs(batch.qubits, batch.num_steps, legs)
    observables = np.asarray(observables, dtype=np.int64).reshape(-1, len(legs))
    values = np.ones((len(batch), len(observables)))
    for n, leg in enumerate(legs):
        values *= leg_pauli_values(batch, leg)[:, observables[:, n]]
    return values


def all_strings(num_legs: int) -> np.ndarray:
    """Все 4^L строк Паули в лексикографическом порядке, форма (4^L, L)."""
    return np.array(list(itertools.product(range(4), repeat=num_legs)), dtype=np.int64).reshape(
        -1, num_legs
    )


def mean_pauli_coefficients(
    batch: ShadowBatch, legs: Sequence[LegLabel], chunk: int = DEFAULT_CHUNK,
) -> np.ndarray:
    """Среднее по выстрелам Tr[P · Υ̂] для всех строк P, форма (4,)*L."""
    if len(batch) == 0:
        raise ValueError("Пустой набор выстрелов")
    strings = all_strings(len(legs))
    total = np.zeros(len(strings))
    for begin in range(0, len(batch), chunk):
        part = batch.slice(begin, min(begin + chunk, len(batch)))
        total += shot_pauli_values(part, legs, strings).sum(axis=0)
    return (total / len(batch)).reshape((4,) * len(legs))


def mean_snapshot(batch: ShadowBatch, spec: MarginalSpec) -> LabelledOperator:
    """Среднее снимков (линейная инверсия) через Паули-коэффициенты."""
    legs = spec.legs(batch.qubits)
    coeffs = mean_pauli_coefficients(batch, legs)
    return from_pauli_coefficients(coeffs, legs)
