"""Метки ног операторов: (кубит, момент времени, направление, размерность)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Direction(str, Enum):
    """Направление ноги.

    out: выход процесса 𝔬_j (измеряется), in: вход 𝔦_j (подаётся обратно
    в процесс), sys: обычный тензорный множитель физической системы
    (состояния регистра и дефектов, гамильтонианы).
    """
    out = "o"
    inp = "i"
    sys = "s"


@dataclass(frozen=True, order=True)
class LegLabel:
    qubit: int
    time: int
    direction: Direction
    dim: int = 2

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"Размерность ноги должна быть >= 2, получено {self.dim}")
        if self.time < 0:
            raise ValueError(f"Индекс времени должен быть >= 0, получено {self.time}")

    @classmethod
    def out(cls, qubit: int, time: int, dim: int = 2) -> LegLabel:
        return cls(qubit, time, Direction.out, dim)

    @classmethod
    def inp(cls, qubit: int, time: int, dim: int = 2) -> LegLabel:
        return cls(qubit, time, Direction.inp, dim)

    @classmethod
    def wire(cls, qubit: int, dim: int = 2) -> LegLabel:
        """Нога физического провода (кубит регистра или дефект)."""
        return cls(qubit, 0, Direction.sys, dim)

    @property
    def is_process_leg(self) -> bool:
        return self.direction is not Direction.sys

    def __str__(self) -> str:
        if self.direction is Direction.sys:
            return f"q{self.qubit}"
        return f"q{self.qubit}:{self.direction.value}{self.time}"

    @classmethod
    def parse(cls, text: str) -> LegLabel:
        """Обратное к str() для кубитных ног процесса: "q3:o1" → LegLabel(3, 1, out)."""
        try:
            qubit, rest = text.strip().removeprefix("q").split(":")
            return cls(int(qubit), int(rest[1:]), Direction(rest[0]))
        except ValueError:
            raise ValueError(f"Не удалось разобрать метку ноги {text!r}") from None


def canonical_order(legs: list[LegLabel], qubit_order: list[int] | None = None) -> list[LegLabel]:
    """Канонический порядок ног маргинала.

    Кубиты в порядке регистра (или по возрастанию id), внутри кубита
    𝔬_k, 𝔦_k, …, 𝔬_1, 𝔦_1, 𝔬_0.
    """
    position = {q: n for n, q in enumerate(qubit_order)} if qubit_order else {}

    def key(leg: LegLabel) -> tuple[int, int, int]:
        rank = position.get(leg.qubit, leg.qubit)
        return (rank, -leg.time, 0 if leg.direction is Direction.out else 1)

    return sorted(legs, key=key)
