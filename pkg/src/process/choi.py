"""Точный процесс-тензор маргинала через вставку пар Белла (эталон для всех оценок).

Соглашение о следе: Choi канала имеет след d, процесс с k_eff сохранёнными
шагами: d^{k_eff}. Несохранённый вход заменяется на I/2 (след 1).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np

from src.process.device import DeviceModel
from src.process.dynamics import step_unitaries, system_legs
from src.process.marginals import Background, MarginalSpec, step_blocks
from src.tensor import (
    LabelledOperator,
    LegError,
    LegLabel,
    apply_local,
    partial_trace,
    permute_legs,
    relabel_legs,
    tensor_product,
)
from src.tensor.legs import Direction
from src.tensor.operator import tensor_all

logger = logging.getLogger(__name__)

DEFAULT_MAX_DIM = 2**12


class DimensionOverflowError(ValueError):
    """Симуляция точного процесса превышает допустимую размерность."""

    def __init__(self, num_legs: int, max_dim: int, spec: MarginalSpec) -> None:
        super().__init__(
            f"Точный процесс для {spec.describe()}: пиковая размерность 2^{num_legs} = "
            f"{2**num_legs} превышает лимит {max_dim}"
        )
        self.num_legs = num_legs
        self.max_dim = max_dim


def bell_pair(first: LegLabel, second: LegLabel) -> LabelledOperator:
    """Ненормированная |Φ⁺⟩⟨Φ⁺| = Σ |aa⟩⟨bb| со следом d."""
    d = first.dim
    phi = np.eye(d, dtype=complex).reshape(d * d)
    return LabelledOperator(np.outer(phi, phi), (first, second), hermitian=True)


def maximally_mixed(leg: LegLabel) -> LabelledOperator:
    return LabelledOperator(np.eye(leg.dim, dtype=complex) / leg.dim, (leg,), hermitian=True)


def channel_choi(u: np.ndarray, out_leg: LegLabel, in_leg: LegLabel) -> LabelledOperator:
    """Choi унитарного канала (U ⊗ I)|Φ⁺⟩⟨Φ⁺|(U ⊗ I)† на ногах (𝔬, 𝔦), след d."""
    return apply_local(bell_pair(out_leg, in_leg), u, (out_leg,))


def peak_legs(model: DeviceModel, spec: MarginalSpec) -> int:
    """Максимальное число одновременно живых ног при построении."""
    final_outputs = sum(
        1 for leg in spec.retained if leg.direction is Direction.out and leg.time == spec.num_steps
    )
    wires = len(model.register) + len(model.defects)
    return wires + len(spec.retained) - final_outputs


def initial_operator(model: DeviceModel) -> LabelledOperator:
    register_legs = tuple(LegLabel.wire(q) for q in model.qubit_ids)
    register = LabelledOperator(model.register_state, register_legs, hermitian=False)
    defects = (
        LabelledOperator(d.initial_state, (LegLabel.wire(d.id, d.dim),))
        for d in model.defects
    )
    return tensor_all((register, *defects)).hermitized()


def _interface(
    state: LabelledOperator, qubit: int, time: int, spec: MarginalSpec,
) -> LabelledOperator:
    """Граница между шагом time и time+1 для одного кубита."""
    wire = LegLabel.wire(qubit)
    out_leg = LegLabel.out(qubit, time)
    in_leg = LegLabel.inp(qubit, time + 1)
    keep_out, keep_in = spec.keeps(out_leg), spec.keeps(in_leg)
    if not keep_out and not keep_in and spec.background is Background.idle:
        return state

    if keep_out:
        state = relabel_legs(state, {wire: out_leg})
    else:
        state = partial_trace(state, {wire})
    if keep_in:
        return tensor_product(state, bell_pair(in_leg, wire))
    return tensor_product(state, maximally_mixed(wire))


def exact_process_choi(
    model: DeviceModel, spec: MarginalSpec, max_dim: int = DEFAULT_MAX_DIM,
) -> LabelledOperator:
    """Точный Choi маргинального процесса spec для модели model.

    Ноги в каноническом порядке (кубиты в порядке регистра, 𝔬_k, 𝔦_k, …, 𝔬₀).
    """
    if spec.num_steps != model.num_steps:
        raise LegError(f"Маргинал рассчитан на k={spec.num_steps}, модель: на k={model.num_steps}")
    unknown = set(spec.qubits) - set(model.qubit_ids)
    if unknown:
        raise LegError(f"Кубиты {sorted(unknown)} отсутствуют в модели")
    num_legs = peak_legs(model, spec)
    if 2**num_legs > max_dim:
        raise DimensionOverflowError(num_legs, max_dim, spec)

    unitaries = step_unitaries(model)
    wires = system_legs(model)
    state = initial_operator(model)
    k = model.num_steps

    for time in range(k):
        for qubit in model.qubit_ids:
            state = _interface(state, qubit, time, spec)
        state = apply_local(state, unitaries[time].data, wires)

    for qubit in model.qubit_ids:
        wire = LegLabel.wire(qubit)
        out_leg = LegLabel.out(qubit, k)
        if spec.keeps(out_leg):
            state = relabel_legs(state, {wire: out_leg})
        else:
            state = partial_trace(state, {wire})
    state = partial_trace(state, [LegLabel.wire(d.id, d.dim) for d in model.defects])

    result = permute_legs(state, spec.legs(model.qubit_ids)).hermitized()
    logger.debug(
        "Точный процесс %s: размерность %d, след %.6g",
        spec.describe(), result.dim, result.real_trace(),
    )
    return result


def marginalize(
    choi: LabelledOperator, spec: MarginalSpec, qubit_order: Sequence[int] | None = None,
) -> LabelledOperator:
    """След по дополнению spec; каждая выброшенная входная нога делится на d.

    Реализует деполяризующий фон; фон idle требует точного построения.
    """
    missing = spec.retained - set(choi.legs)
    if missing:
        raise LegError(f"Ноги {sorted(str(x) for x in missing)} отсутствуют в процессе")
    drop = [leg for leg in choi.legs if leg not in spec.retained]
    if drop and spec.background is Background.idle:
        raise ValueError("marginalize реализует только деполяризующий фон")
    factor = math.prod(leg.dim for leg in drop if leg.direction is Direction.inp)
    reduced = partial_trace(choi, drop).scaled(1 / factor)
    if qubit_order is None:
        qubit_order = list(dict.fromkeys(leg.qubit for leg in choi.legs))
    return permute_legs(reduced, spec.legs(qubit_order))


def block_marginal(choi: LabelledOperator, block: Sequence[LegLabel]) -> LabelledOperator:
    """Маргинал на ногах block в соглашении d на вход; порядок ног: как в block."""
    block_set = set(block)
    drop = [leg for leg in choi.legs if leg not in block_set]
    factor = math.prod(leg.dim for leg in drop if leg.direction is Direction.inp)
    return permute_legs(partial_trace(choi, drop).scaled(1 / factor), block)


def product_of_marginals(
    choi: LabelledOperator, blocks: Sequence[Sequence[LegLabel]],
) -> LabelledOperator:
    """⊗ маргиналов по блокам, ноги переставлены к порядку choi."""
    covered = [leg for block in blocks for leg in block]
    if len(covered) != len(set(covered)) or set(covered) != set(choi.legs):
        raise LegError("Блоки должны разбивать множество ног процесса")
    product = tensor_all(block_marginal(choi, block) for block in blocks)
    return permute_legs(product, choi.legs).hermitized()


def markov_closest(choi: LabelledOperator) -> LabelledOperator:
    """Марковский процесс Ê_{k:k−1} ⊗ … ⊗ Ê_{1:0} ⊗ ρ₀ из шаговых маргиналов."""
    return product_of_marginals(choi, step_blocks(choi.legs))


def causality_residual(choi: LabelledOperator) -> float:
    """max ‖Tr_{𝔬_t} Υ − I_{𝔦_t} ⊗ Υ_{t−1}‖_max по всем моментам t от позднего к раннему."""
    residual = 0.0
    current = choi
    for block in step_blocks(choi.legs):
        outs = [leg for leg in block if leg.direction is Direction.out]
        ins = [leg for leg in block if leg.direction is Direction.inp]
        if not ins:
            break
        reduced = partial_trace(current, outs)
        factor = math.prod(leg.dim for leg in ins)
        shorter = partial_trace(reduced, ins).scaled(1 / factor)
        expected = tensor_product(LabelledOperator.identity(ins), shorter)
        diff = reduced.data - permute_legs(expected, reduced.legs).data
        residual = max(residual, float(np.max(np.abs(diff))))
        current = shorter
    return residual
