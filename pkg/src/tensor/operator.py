"""Оператор с размеченными ногами и базовые операции над ним.

Соглашение об индексах: big-endian: первая нога задаёт старший блок
индекса, как в np.kron. Все функции чистые: входы не изменяются.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from src.tensor.legs import LegLabel

HERMITIAN_TOL = 1e-12


class LegError(ValueError):
    """Некорректный набор ног: дубликаты, неизвестные ноги, не перестановка."""


@dataclass(frozen=True)
class LabelledOperator:
    """Плотная комплексная квадратная матрица с упорядоченным списком ног."""
    data: np.ndarray
    legs: tuple[LegLabel, ...]
    hermitian: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        legs = tuple(self.legs)
        object.__setattr__(self, "legs", legs)
        data = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "data", data)

        if len(set(legs)) != len(legs):
            raise LegError(f"Повторяющиеся ноги: {[str(leg) for leg in legs]}")
        dim = math.prod(leg.dim for leg in legs)
        if data.shape != (dim, dim):
            raise LegError(
                f"Размер матрицы {data.shape} не равен произведению размерностей ног {dim}"
            )
        if self.hermitian:
            deviation = float(np.max(np.abs(data - data.conj().T))) if dim else 0.0
            if deviation > HERMITIAN_TOL:
                raise LegError(f"Флаг эрмитовости при ‖A − A†‖_max = {deviation:.3e}")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(leg.dim for leg in self.legs)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def real_trace(self) -> float:
        return float(np.trace(self.data).real)

    def normalized(self) -> LabelledOperator:
        """Копия с единичным следом."""
        tr = self.real_trace()
        if abs(tr) < 1e-300:
            raise ValueError("Нельзя нормировать оператор с нулевым следом")
        return LabelledOperator(self.data / tr, self.legs, self.hermitian)

    def scaled(self, factor: float) -> LabelledOperator:
        return LabelledOperator(self.data * factor, self.legs, self.hermitian)

    def hermitized(self) -> LabelledOperator:
        """Симметризация (A + A†)/2 с выставленным флагом эрмитовости."""
        return LabelledOperator((self.data + self.data.conj().T) / 2, self.legs, True)

    def index_of(self, leg: LegLabel) -> int:
        try:
            return self.legs.index(leg)
        except ValueError:
            raise LegError(f"Нога {leg} отсутствует в операторе") from None

    def as_tensor(self) -> np.ndarray:
        """Тензорный вид: оси (кет-ноги..., бра-ноги...)."""
        return self.data.reshape(self.dims + self.dims)

    @classmethod
    def from_tensor(
        cls, tensor: np.ndarray, legs: Sequence[LegLabel], hermitian: bool = False,
    ) -> LabelledOperator:
        dim = math.prod(leg.dim for leg in legs)
        return cls(np.asarray(tensor).reshape(dim, dim), tuple(legs), hermitian)

    @classmethod
    def identity(cls, legs: Sequence[LegLabel]) -> LabelledOperator:
        dim = math.prod(leg.dim for leg in legs)
        return cls(np.eye(dim, dtype=complex), tuple(legs), True)

    @classmethod
    def scalar(cls, value: complex = 1.0) -> LabelledOperator:
        return cls(np.array([[value]], dtype=complex), (), False)


def tensor_product(a: LabelledOperator, b: LabelledOperator) -> LabelledOperator:
    """a ⊗ b: ноги a, затем ноги b."""
    clash = set(a.legs) & set(b.legs)
    if clash:
        raise LegError(f"Ноги встречаются в обоих множителях: {sorted(str(x) for x in clash)}")
    return LabelledOperator(
        np.kron(a.data, b.data), a.legs + b.legs, a.hermitian and b.hermitian,
    )


def tensor_all(operators: Iterable[LabelledOperator]) -> LabelledOperator:
    result = LabelledOperator.scalar()
    for op in operators:
        result = tensor_product(result, op)
    return result


def partial_trace(a: LabelledOperator, drop: Iterable[LegLabel]) -> LabelledOperator:
    """След по ногам drop; порядок оставшихся ног сохраняется."""
    drop_set = set(drop)
    unknown = drop_set - set(a.legs)
    if unknown:
        raise LegError(f"Неизвестные ноги для следа: {sorted(str(x) for x in unknown)}")
    if not drop_set:
        return a

    n = len(a.legs)
    ket = list(range(n))
    bra = [i + n for i in range(n)]
    kept: list[int] = []
    for i, leg in enumerate(a.legs):
        if leg in drop_set:
            bra[i] = ket[i]
        else:
            kept.append(i)
    out = [ket[i] for i in kept] + [bra[i] for i in kept]
    reduced = np.einsum(a.as_tensor(), ket + bra, out)
    legs = tuple(a.legs[i] for i in kept)
    return LabelledOperator.from_tensor(reduced, legs, a.hermitian)


def permute_legs(a: LabelledOperator, order: Sequence[LegLabel]) -> LabelledOperator:
    """Переупорядочить ноги так, чтобы список ног совпал с order."""
    order = tuple(order)
    if len(order) != len(a.legs) or set(order) != set(a.legs):
        raise LegError(
            f"Порядок {[str(x) for x in order]} не является перестановкой "
            f"{[str(x) for x in a.legs]}"
        )
    if order == a.legs:
        return a
    perm = [a.legs.index(leg) for leg in order]
    n = len(perm)
    axes = perm + [p + n for p in perm]
    return LabelledOperator.from_tensor(
        np.transpose(a.as_tensor(), axes), order, a.hermitian,
    )


def relabel_legs(a: LabelledOperator, mapping: Mapping[LegLabel, LegLabel]) -> LabelledOperator:
    """Переименовать ноги без изменения данных."""
    for old, new in mapping.items():
        if old not in a.legs:
            raise LegError(f"Нога {old} отсутствует в операторе")
        if old.dim != new.dim:
            raise LegError(f"Размерность {old} не совпадает с {new}")
    legs = tuple(mapping.get(leg, leg) for leg in a.legs)
    return LabelledOperator(a.data, legs, a.hermitian)


def apply_local(
    a: LabelledOperator, u: np.ndarray, on_legs: Sequence[LegLabel],
) -> LabelledOperator:
    """Сопряжение u·A·u† матрицей u, действующей на ноги on_legs (в их порядке)."""
    on_legs = tuple(on_legs)
    rest = tuple(leg for leg in a.legs if leg not in on_legs)
    if len(rest) + len(on_legs) != len(a.legs):
        raise LegError(f"Ноги {[str(x) for x in on_legs]} не найдены в операторе")
    dt = math.prod(leg.dim for leg in on_legs)
    if u.shape != (dt, dt):
        raise LegError(f"Матрица {u.shape} не подходит для ног размерности {dt}")
    dr = math.prod(leg.dim for leg in rest)

    front = permute_legs(a, on_legs + rest)
    block = front.data.reshape(dt, dr, dt, dr)
    block = np.einsum("ab,bxcy,dc->axdy", u, block, u.conj(), optimize=True)
    data = block.reshape(dt * dr, dt * dr)
    if a.hermitian:
        data = (data + data.conj().T) / 2
    moved = LabelledOperator(data, on_legs + rest, a.hermitian)
    return permute_legs(moved, a.legs)


def max_abs_diff(a: LabelledOperator, b: LabelledOperator) -> float:
    """‖A − B‖_max после приведения b к порядку ног a."""
    b = permute_legs(b, a.legs)
    return float(np.max(np.abs(a.data - b.data)))
