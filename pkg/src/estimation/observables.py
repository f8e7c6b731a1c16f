"""Паули-наблюдаемые на ногах маргинала."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from src.process.marginals import qubit_legs
from src.tensor import LabelledOperator, LegError, LegLabel, permute_legs
from src.tensor.pauli import LETTERS, letters_to_indices, pauli_matrix


@dataclass(frozen=True)
class PauliObservable:
    """Строка Паули, по букве на ногу legs (в том же порядке)."""
    letters: str
    legs: tuple[LegLabel, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "legs", tuple(self.legs))
        if len(self.letters) != len(self.legs):
            raise LegError(
                f"Строка {self.letters!r} длины {len(self.letters)} для {len(self.legs)} ног"
            )
        letters_to_indices(self.letters)

    @property
    def weight(self) -> int:
        return sum(1 for ch in self.letters if ch != "I")

    @property
    def indices(self) -> tuple[int, ...]:
        return letters_to_indices(self.letters)

    def matrix(self) -> np.ndarray:
        return pauli_matrix(self.letters)

    def expectation(self, op: LabelledOperator) -> float:
        """Tr[O · A]; ноги A приводятся к порядку наблюдаемой."""
        data = permute_legs(op, self.legs).data
        return float(np.real(np.vdot(self.matrix().conj().T, data)))

    def __str__(self) -> str:
        return self.letters

    @classmethod
    def on_process(cls, letters: str, num_steps: int, qubit: int = 0) -> PauliObservable:
        """Наблюдаемая на одно-кубитном процессе 𝔬_k, 𝔦_k, …, 𝔬₀."""
        return cls(letters, qubit_legs(qubit, num_steps))

    @classmethod
    def from_indices(cls, indices: Sequence[int], legs: Sequence[LegLabel]) -> PauliObservable:
        return cls("".join(LETTERS[i] for i in indices), tuple(legs))
