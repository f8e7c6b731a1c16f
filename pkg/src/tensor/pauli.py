"""Паули-базис для кубитных ног: прямое и обратное преобразование коэффициентов.

Коэффициент c[σ₁…σ_L] = Tr[(σ₁ ⊗ … ⊗ σ_L) A]; A = Σ c·P / 2^L.
Буквы кодируются индексами 0..3 = I, X, Y, Z.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from src.tensor.legs import LegLabel
from src.tensor.operator import LabelledOperator, LegError

LETTERS = "IXYZ"

PAULIS = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# forward[σ, a, b] = σ[b, a]: Tr[σ A] = Σ_ab σ_ba A_ab
_FORWARD = np.transpose(PAULIS, (0, 2, 1)).reshape(4, 4)
# inverse[(a, b), σ] = σ[a, b] / 2
_INVERSE = PAULIS.reshape(4, 4).T / 2


def letters_to_indices(letters: str) -> tuple[int, ...]:
    try:
        return tuple(LETTERS.index(ch) for ch in letters)
    except ValueError:
        raise ValueError(f"Недопустимая строка Паули: {letters!r}") from None


def indices_to_letters(indices: Sequence[int]) -> str:
    return "".join(LETTERS[i] for i in indices)


def pauli_matrix(letters: str) -> np.ndarray:
    """Матрица σ₁ ⊗ … ⊗ σ_L (big-endian)."""
    result = np.array([[1.0 + 0j]])
    for idx in letters_to_indices(letters):
        result = np.kron(result, PAULIS[idx])
    return result


def _check_qubit_legs(legs: Sequence[LegLabel]) -> None:
    if any(leg.dim != 2 for leg in legs):
        raise LegError("Паули-преобразование определено только для кубитных ног")


def pauli_coefficients(a: LabelledOperator) -> np.ndarray:
    """Все 4^L коэффициентов Tr[P·A], массив формы (4,)*L."""
    _check_qubit_legs(a.legs)
    n = len(a.legs)
    tensor = a.as_tensor()
    # оси (a1, b1, a2, b2, …) → (4,)*n
    interleaved = np.transpose(tensor, [ax for i in range(n) for ax in (i, i + n)])
    coeffs = interleaved.reshape((4,) * n)
    for axis in range(n):
        coeffs = np.moveaxis(np.tensordot(_FORWARD, coeffs, axes=([1], [axis])), 0, axis)
    return coeffs


def from_pauli_coefficients(
    coeffs: np.ndarray, legs: Sequence[LegLabel], hermitian: bool = True,
) -> LabelledOperator:
    """Обратное преобразование: A = Σ c·P / 2^L."""
    legs = tuple(legs)
    _check_qubit_legs(legs)
    n = len(legs)
    coeffs = np.asarray(coeffs, dtype=complex).reshape((4,) * n)
    tensor = coeffs
    for axis in range(n):
        tensor = np.moveaxis(np.tensordot(_INVERSE, tensor, axes=([1], [axis])), 0, axis)
    # (4,)*n → (a1, b1, …) → (a1…an, b1…bn)
    tensor = tensor.reshape((2, 2) * n)
    order = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    data = np.transpose(tensor, order).reshape(2**n, 2**n)
    if hermitian:
        data = (data + data.conj().T) / 2
    return LabelledOperator(data, legs, hermitian)
