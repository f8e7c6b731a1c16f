"""Меры немарковости: обобщённая квантовая взаимная информация процесса."""

from __future__ import annotations

import logging
from collections.abc import Sequence

from src.process.choi import product_of_marginals
from src.process.marginals import step_blocks
from src.tensor import LabelledOperator, LegLabel, relative_entropy

logger = logging.getLogger(__name__)


def mutual_information(
    choi: LabelledOperator, blocks: Sequence[Sequence[LegLabel]],
) -> float:
    """S[Υ ‖ ⊗_b Υ_b] в битах на нормированных на единичный след операторах."""
    if len(blocks) < 2:
        return 0.0
    rho = choi.normalized()
    sigma = product_of_marginals(rho, blocks).normalized()
    return relative_entropy(rho, sigma)


def qmi(choi: LabelledOperator) -> float:
    """N(Υ) = S[Υ ‖ Ê_{k:k−1} ⊗ … ⊗ ρ₀]: ноль тогда и только тогда, когда процесс марковский."""
    return mutual_information(choi, step_blocks(choi.legs))


def qubit_blocks(choi: LabelledOperator, groups: Sequence[Sequence[int]]) -> list[tuple[LegLabel, ...]]:
    """Блоки ног по группам кубитов (для пространственных мер)."""
    return [tuple(leg for leg in choi.legs if leg.qubit in set(group)) for group in groups]
