"""Спецификации маргиналов процесса: какие ноги (кубит, момент) сохраняются."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum

from src.tensor.legs import Direction, LegLabel, canonical_order


class StepStructureError(ValueError):
    """Ноги не складываются в полные шаги (𝔦_j без 𝔬_j или наоборот)."""


class Background(str, Enum):
    """Что происходит с несохранёнными ногами.

    depolarize: кубит заменяется на I/2 (свободный причинный разрыв);
    idle: кубит не трогают (наивный анализ, без разрыва).
    """
    depolarize = "depolarize"
    idle = "idle"


def step_legs(qubit: int, step: int) -> tuple[LegLabel, ...]:
    """Ноги шага: блок 0: (𝔬₀,), блок j ≥ 1: (𝔬_j, 𝔦_j)."""
    if step == 0:
        return (LegLabel.out(qubit, 0),)
    return (LegLabel.out(qubit, step), LegLabel.inp(qubit, step))


def qubit_legs(qubit: int, num_steps: int) -> tuple[LegLabel, ...]:
    legs: list[LegLabel] = []
    for step in range(num_steps, -1, -1):
        legs.extend(step_legs(qubit, step))
    return tuple(legs)


def check_step_structure(legs: Iterable[LegLabel]) -> None:
    legs = set(legs)
    for leg in legs:
        if leg.direction is Direction.sys:
            raise StepStructureError(f"Нога {leg} не является ногой процесса")
        if leg.time == 0 and leg.direction is Direction.inp:
            raise StepStructureError(f"Входной ноги {leg} не существует")
        if leg.time == 0:
            continue
        partner = LegLabel(
            leg.qubit, leg.time,
            Direction.inp if leg.direction is Direction.out else Direction.out,
            leg.dim,
        )
        if partner not in legs:
            raise StepStructureError(f"Неполный шаг: есть {leg}, нет {partner}")


def step_blocks(legs: Sequence[LegLabel]) -> list[tuple[LegLabel, ...]]:
    """Разбиение ног по моментам времени, от позднего к раннему; порядок внутри: как в legs."""
    check_step_structure(legs)
    times = sorted({leg.time for leg in legs}, reverse=True)
    return [tuple(leg for leg in legs if leg.time == t) for t in times]


@dataclass(frozen=True)
class MarginalSpec:
    retained: frozenset[LegLabel]
    num_steps: int
    background: Background = Background.depolarize

    def __post_init__(self) -> None:
        object.__setattr__(self, "retained", frozenset(self.retained))
        if not self.retained:
            raise StepStructureError("Пустой маргинал")
        for leg in self.retained:
            if leg.time > self.num_steps:
                raise StepStructureError(f"Нога {leg} за пределами k={self.num_steps}")
        check_step_structure(self.retained)

    @property
    def qubits(self) -> list[int]:
        return sorted({leg.qubit for leg in self.retained})

    @property
    def num_inputs(self) -> int:
        """k_eff: число сохранённых полных шагов (входных ног)."""
        return sum(1 for leg in self.retained if leg.direction is Direction.inp)

    def legs(self, qubit_order: Sequence[int] | None = None) -> list[LegLabel]:
        """Сохранённые ноги в каноническом порядке."""
        return canonical_order(list(self.retained), list(qubit_order) if qubit_order else None)

    def keeps(self, leg: LegLabel) -> bool:
        return leg in self.retained

    def with_background(self, background: Background) -> MarginalSpec:
        return MarginalSpec(self.retained, self.num_steps, background)

    def describe(self) -> str:
        return ",".join(str(leg) for leg in self.legs()) + f" [{self.background.value}]"

    def slug(self) -> str:
        """Имя для файлов: q1o2_q1i2_q1o1_q1i1_q1o0."""
        return "_".join(str(leg).replace(":", "") for leg in self.legs())

    @classmethod
    def single_qubit(
        cls, qubit: int, num_steps: int, background: Background = Background.depolarize,
    ) -> MarginalSpec:
        """Одно-кубитный маргинал Υ^{(q)}_{k:0}; остальные кубиты: фон."""
        return cls(frozenset(qubit_legs(qubit, num_steps)), num_steps, background)

    @classmethod
    def full(cls, qubits: Iterable[int], num_steps: int) -> MarginalSpec:
        legs = frozenset(leg for q in qubits for leg in qubit_legs(q, num_steps))
        return cls(legs, num_steps)

    @classmethod
    def common_cause(cls, early: int, late: int) -> MarginalSpec:
        """Ê^{(late)}_{2:1} ⊗ Υ^{(early)}_{1:0} при k = 2.

        early деполяризуется на втором шаге, late: на первом.
        """
        if early == late:
            raise StepStructureError("common_cause требует двух разных кубитов")
        legs = (*step_legs(early, 0), *step_legs(early, 1), *step_legs(late, 2))
        return cls(frozenset(legs), 2)

    @classmethod
    def spatial(cls, first: int, second: int, step: int, num_steps: int) -> MarginalSpec:
        """Чисто пространственная пара: шаг step обоих кубитов."""
        if first == second:
            raise StepStructureError("spatial требует двух разных кубитов")
        return cls(frozenset((*step_legs(first, step), *step_legs(second, step))), num_steps)
