"""Физическая оценка процесса: взвешенные наименьшие квадраты на PSD ∩ причинных.

Цель f(Υ) = Σ_i w_i (Tr[P_i Υ] − ê_i)² по наблюдённым свободным строкам.
Веса по умолчанию 3^{−l}: обратные теневые нормы строк. Старт: физическая
проекция самих целей (решение при равных весах), дальше ускоренный
проекционный градиент с шагом 1/L (L: степенной итерацией) и сбросом
импульса, как только шаг не уменьшает цель. Проекция: чередование Дайкстры между project_psd и причинной аффинной
проекцией с финальной подмешивающей поправкой к I·Tr/D, которая сохраняет
причинность и делает оператор точно положительным.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.estimation.causality import causal_projection, causality_mask, process_trace
from src.estimation.observables import PauliObservable
from src.estimation.tables import ExpectationTable
from src.process.choi import causality_residual
from src.shadow.snapshot import all_strings
from src.tensor import LabelledOperator, LegLabel, project_psd
from src.tensor.pauli import from_pauli_coefficients, pauli_coefficients
from src.tensor.spectral import min_eigenvalue

logger = logging.getLogger(__name__)

Weighting = Literal["uniform", "shadow_norm"]


class NonConvergenceError(RuntimeError):
    """MLE не сошлась за max_iters (поднимается только по требованию вызывающего)."""


@dataclass(frozen=True)
class MleOptions:
    max_iters: int = 500
    tol: float = 1e-9
    weighting: Weighting = "shadow_norm"
    dykstra_iters: int = 200
    dykstra_tol: float = 1e-12
    power_iters: int = 30
    max_backtracks: int = 8
    seed: int = 0


@dataclass(frozen=True)
class PhysicalEstimate:
    choi: LabelledOperator
    objective_history: tuple[float, ...]
    causality_residual: float
    psd_residual: float
    converged: bool
    iterations: int = 0

    @property
    def objective(self) -> float:
        return self.objective_history[-1]


def _weights(num_legs: int, weighting: Weighting) -> np.ndarray:
    shape = (4,) * num_legs
    if weighting == "uniform":
        return np.ones(shape)
    if weighting == "shadow_norm":
        locality = (all_strings(num_legs) != 0).sum(axis=1)
        return (3.0 ** -locality).reshape(shape)
    raise ValueError(f"Неизвестная схема весов {weighting!r}")


def _targets(
    expectations: ExpectationTable | Mapping[PauliObservable, float] | Mapping[str, float],
    legs: Sequence[LegLabel] | None,
) -> tuple[tuple[LegLabel, ...], np.ndarray, np.ndarray]:
    if isinstance(expectations, ExpectationTable):
        values, observed = expectations.coefficients()
        return expectations.legs, values, observed
    if legs is None:
        first = next(iter(expectations))
        if not isinstance(first, PauliObservable):
            raise ValueError("Для строковых ключей нужны ноги legs")
        legs = first.legs
    legs = tuple(legs)
    shape = (4,) * len(legs)
    values, observed = np.zeros(shape), np.zeros(shape, dtype=bool)
    for key, value in expectations.items():
        obs = key if isinstance(key, PauliObservable) else PauliObservable(key, legs)
        values[obs.indices] = value
        observed[obs.indices] = True
    return legs, values, observed


def polish(op: LabelledOperator) -> LabelledOperator:
    """Наименьшее подмешивание I·Tr/D, делающее причинный оператор положительным."""
    smallest = min_eigenvalue(op)
    if smallest >= 0:
        return op
    level = op.real_trace() / op.dim
    s = -smallest / (level - smallest)
    data = (1 - s) * op.data + s * level * np.eye(op.dim)
    return LabelledOperator(data, op.legs).hermitized()


def project_physical(op: LabelledOperator, options: MleOptions) -> LabelledOperator:
    """Дайкстра: project_psd ↔ causal_projection, затем polish."""
    x = causal_projection(op.hermitized())
    p = np.zeros_like(x.data)
    q = np.zeros_like(x.data)
    for _ in range(options.dykstra_iters):
        y = project_psd(LabelledOperator(x.data + p, x.legs).hermitized())
        p = x.data + p - y.data
        x_next = causal_projection(LabelledOperator(y.data + q, x.legs).hermitized())
        q = y.data + q - x_next.data
        change = float(np.linalg.norm(x_next.data - x.data))
        x = x_next
        if change <= options.dykstra_tol * max(1.0, float(np.linalg.norm(x.data))):
            break
    return polish(x)


def _lipschitz(weights: np.ndarray, observed: np.ndarray, scale: float, options: MleOptions) -> float:
    """Наибольшее собственное значение гессиана цели (степенная итерация)."""
    diagonal = np.where(observed, 2 * weights * scale, 0.0).reshape(-1)
    if not diagonal.any():
        return 1.0
    rng = np.random.default_rng(options.seed)
    v = rng.standard_normal(diagonal.size)
    estimate = 0.0
    for _ in range(options.power_iters):
        w = diagonal * v
        norm = float(np.linalg.norm(w))
        if norm == 0:
            break
        estimate = float(v @ w / (v @ v))
        v = w / norm
    return max(estimate, 1e-300)


def mle_reconstruct(
    expectations: ExpectationTable | Mapping[PauliObservable, float] | Mapping[str, float],
    legs: Sequence[LegLabel] | None = None,
    options: MleOptions | None = None,
) -> PhysicalEstimate:
    """Физическая (PSD и причинная) оценка процесса по оценкам ожиданий."""
    options = options or MleOptions()
    legs, targets, observed = _targets(expectations, legs)
    mask = causality_mask(legs)
    observed = observed & mask.free
    weights = _weights(len(legs), options.weighting)
    scale = 2.0 ** len(legs)
    free_count = int(mask.free.sum()) - 1
    if observed.sum() < free_count:
        logger.warning(
            "Набор ожиданий неполон: %d из %d свободных строк", int(observed.sum()), free_count,
        )

    def objective(coeffs: np.ndarray) -> float:
        residual = np.where(observed, coeffs.real - targets, 0.0)
        return float(np.sum(weights * residual**2))

    def descend(origin: np.ndarray, step: float) -> tuple[LabelledOperator, np.ndarray, float]:
        gradient = np.where(observed, 2 * weights * (origin.real - targets), 0.0)
        candidate = project_physical(from_pauli_coefficients(origin - step * scale * gradient, legs), options)
        candidate_coeffs = pauli_coefficients(candidate)
        return candidate, candidate_coeffs, objective(candidate_coeffs)

    dim = int(scale)
    trace = process_trace(legs)
    identity = pauli_coefficients(LabelledOperator(np.eye(dim) * trace / dim, legs).hermitized())
    current = project_physical(from_pauli_coefficients(np.where(observed, targets, identity), legs), options)
    coeffs = pauli_coefficients(current)
    previous = coeffs
    history = [objective(coeffs)]
    step = 1.0 / _lipschitz(weights, observed, scale, options)

    converged = False
    iterations = 0
    momentum = 1.0
    for iterations in range(1, options.max_iters + 1):
        next_momentum = (1 + math.sqrt(1 + 4 * momentum**2)) / 2
        extrapolated = coeffs + (momentum - 1) / next_momentum * (coeffs - previous)
        candidate, candidate_coeffs, value = descend(extrapolated, step)
        if value > history[-1]:
            # сброс импульса: обычный шаг из текущей точки, с дроблением
            next_momentum = 1.0
            trial = step
            for _ in range(options.max_backtracks + 1):
                candidate, candidate_coeffs, value = descend(coeffs, trial)
                if value <= history[-1]:
                    break
                trial /= 2
            if value > history[-1]:
                converged = True
                logger.debug("MLE: спуск остановлен на итерации %d, шаг не уменьшает цель", iterations)
                break
        change = float(np.linalg.norm(candidate.data - current.data))
        stalled = history[-1] - value <= options.tol * history[-1]
        previous, coeffs, current = coeffs, candidate_coeffs, candidate
        momentum = next_momentum
        history.append(value)
        if stalled or change <= options.tol * max(1.0, float(np.linalg.norm(current.data))):
            converged = True
            break

    estimate = PhysicalEstimate(
        choi=current,
        objective_history=tuple(history),
        causality_residual=causality_residual(current),
        psd_residual=max(0.0, -min_eigenvalue(current)),
        converged=converged,
        iterations=iterations,
    )
    if not converged:
        logger.warning(
            "MLE не сошлась за %d итераций: цель %.3e", options.max_iters, estimate.objective,
        )
    else:
        logger.debug(
            "MLE: %d итераций, цель %.3e, причинность %.1e, PSD %.1e",
            iterations, estimate.objective, estimate.causality_residual, estimate.psd_residual,
        )
    return estimate
