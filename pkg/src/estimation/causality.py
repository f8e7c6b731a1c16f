"""Паули-коэффициенты, зафиксированные причинностью, и аффинная проекция на них.

Правило: просматриваем моменты от позднего к раннему. Первый момент с
нетривиальной буквой решает: буква на выходной ноге: наблюдаемая свободна;
только на входных: её ожидание равно 0. Строка из одних I фиксирована
следом d^{k_eff} и в счёт фиксированных не входит.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.estimation.observables import PauliObservable
from src.shadow.snapshot import all_strings
from src.tensor import LabelledOperator, LegLabel
from src.tensor.legs import Direction
from src.tensor.pauli import from_pauli_coefficients, pauli_coefficients


@dataclass(frozen=True)
class CausalityMask:
    """Маски над всеми 4^L строками (форма (4,)*L)."""
    fixed: np.ndarray
    values: np.ndarray

    @property
    def free(self) -> np.ndarray:
        return ~self.fixed


def process_trace(legs: Sequence[LegLabel]) -> float:
    return float(math.prod(leg.dim for leg in legs if leg.direction is Direction.inp))


@lru_cache(maxsize=64)
def causality_mask(legs: tuple[LegLabel, ...]) -> CausalityMask:
    strings = all_strings(len(legs))
    nontrivial = strings != 0
    undecided = np.ones(len(strings), dtype=bool)
    fixed_zero = np.zeros(len(strings), dtype=bool)
    for t in sorted({leg.time for leg in legs if leg.time > 0}, reverse=True):
        outs = [n for n, leg in enumerate(legs) if leg.time == t and leg.direction is Direction.out]
        ins = [n for n, leg in enumerate(legs) if leg.time == t and leg.direction is Direction.inp]
        on_out = nontrivial[:, outs].any(axis=1)
        on_in = nontrivial[:, ins].any(axis=1)
        fixed_zero |= undecided & ~on_out & on_in
        undecided &= ~(on_out | on_in)

    identity = ~nontrivial.any(axis=1)
    fixed = fixed_zero | identity
    values = np.where(identity, process_trace(legs), 0.0)
    shape = (4,) * len(legs)
    fixed, values = fixed.reshape(shape), values.reshape(shape)
    fixed.setflags(write=False)
    values.setflags(write=False)
    return CausalityMask(fixed, values)


def causality_fixed_value(obs: PauliObservable) -> float | None:
    """Значение ожидания, если оно задано причинностью, иначе None."""
    mask = causality_mask(obs.legs)
    index = obs.indices
    if mask.fixed[index]:
        return float(mask.values[index])
    return None


def free_observables(legs: Sequence[LegLabel]) -> list[PauliObservable]:
    """Все не зафиксированные причинностью строки в лексикографическом порядке."""
    legs = tuple(legs)
    mask = causality_mask(legs).free.reshape(-1)
    strings = all_strings(len(legs))[mask]
    return [PauliObservable.from_indices(row, legs) for row in strings]


def causal_projection(op: LabelledOperator) -> LabelledOperator:
    """Ортогональная (по Фробениусу) проекция на аффинное множество причинных операторов."""
    mask = causality_mask(op.legs)
    coeffs = pauli_coefficients(op)
    coeffs = np.where(mask.fixed, mask.values, coeffs)
    return from_pauli_coefficients(coeffs, op.legs, hermitian=op.hermitian)


def causal_violation(op: LabelledOperator) -> float:
    """max |c_P − значение| по фиксированным строкам, в единицах Tr[P·A]/2^L."""
    mask = causality_mask(op.legs)
    coeffs = pauli_coefficients(op)
    deviation = np.abs(coeffs - mask.values)[mask.fixed]
    return float(deviation.max() / 2 ** len(op.legs)) if deviation.size else 0.0
