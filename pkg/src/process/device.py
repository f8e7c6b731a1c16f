"""Синтетическая модель устройства: решётка кубитов, ZZ-crosstalk, дефекты бани."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

logger = logging.getLogger(__name__)

STATE_TOL = 1e-10

# Диапазоны по умолчанию, рад / ед. времени
DEFAULT_J_RANGE = (0.2, 1.0)
DEFAULT_G_RANGE = (0.5, 1.5)


class ModelError(ValueError):
    """Некорректная модель устройства."""


def basis_state(name: str) -> np.ndarray:
    """Одно-кубитное состояние по имени пресета: zero, one, plus, mixed."""
    presets = {
        "zero": np.array([[1, 0], [0, 0]], dtype=complex),
        "one": np.array([[0, 0], [0, 1]], dtype=complex),
        "plus": np.full((2, 2), 0.5, dtype=complex),
        "mixed": np.eye(2, dtype=complex) / 2,
    }
    try:
        return presets[name]
    except KeyError:
        raise ModelError(f"Неизвестное начальное состояние {name!r}") from None


def product_state(states: list[np.ndarray]) -> np.ndarray:
    result = np.array([[1.0 + 0j]])
    for s in states:
        result = np.kron(result, s)
    return result


def _check_density(rho: np.ndarray, dim: int, what: str) -> None:
    if rho.shape != (dim, dim):
        raise ModelError(f"{what}: ожидалась матрица {dim}×{dim}, получено {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > STATE_TOL:
        raise ModelError(f"{what}: матрица не эрмитова")
    if abs(np.trace(rho).real - 1) > STATE_TOL:
        raise ModelError(f"{what}: след {np.trace(rho).real:.6g} ≠ 1")
    if np.linalg.eigvalsh(rho).min() < -STATE_TOL:
        raise ModelError(f"{what}: матрица не положительна")


@dataclass(frozen=True)
class Qubit:
    id: int
    x: int
    y: int


@dataclass(frozen=True)
class CrosstalkEdge:
    a: int
    b: int
    j: float  # рад / ед. времени


@dataclass(frozen=True)
class DefectCoupling:
    qubit: int
    g: float  # рад / ед. времени


@dataclass(frozen=True)
class Defect:
    id: int
    couplings: tuple[DefectCoupling, ...]
    initial_state: np.ndarray = field(default_factory=lambda: basis_state("zero"), compare=False)
    dim: int = 2


@dataclass(frozen=True)
class DeviceModel:
    """Полное описание устройства; однозначно задаёт все шаговые унитарные операторы."""
    register: tuple[Qubit, ...]
    crosstalk_edges: tuple[CrosstalkEdge, ...] = ()
    defects: tuple[Defect, ...] = ()
    step_duration: float = 1.0
    num_steps: int = 2
    initial_register_state: np.ndarray | None = field(default=None, compare=False)
    nearest_neighbour: bool = False
    step_durations: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        self.validate()

    @property
    def qubit_ids(self) -> list[int]:
        return [q.id for q in self.register]

    @property
    def defect_ids(self) -> list[int]:
        return [d.id for d in self.defects]

    @property
    def num_qubits(self) -> int:
        return len(self.register)

    @property
    def register_state(self) -> np.ndarray:
        """Начальное состояние регистра (по умолчанию |0…0⟩⟨0…0|)."""
        if self.initial_register_state is not None:
            return self.initial_register_state
        return product_state([basis_state("zero")] * self.num_qubits)

    def qubit(self, qubit_id: int) -> Qubit:
        for q in self.register:
            if q.id == qubit_id:
                return q
        raise ModelError(f"Кубит {qubit_id} отсутствует в регистре")

    def duration(self, step: int) -> float:
        """Длительность шага step (1..k)."""
        if self.step_durations is not None:
            return self.step_durations[step - 1]
        return self.step_duration

    def validate(self) -> None:
        ids = self.qubit_ids
        if not ids:
            raise ModelError("Регистр пуст")
        if len(set(ids)) != len(ids):
            raise ModelError(f"Повторяющиеся id кубитов: {ids}")
        if self.num_steps < 1:
            raise ModelError(f"Число шагов должно быть >= 1, получено {self.num_steps}")
        if self.step_duration <= 0:
            raise ModelError("Длительность шага должна быть положительной")
        if self.step_durations is not None and len(self.step_durations) != self.num_steps:
            raise ModelError(
                f"step_durations: ожидалось {self.num_steps} значений, "
                f"получено {len(self.step_durations)}"
            )
        if self.step_durations is not None and any(t <= 0 for t in self.step_durations):
            raise ModelError(f"Длительности шагов должны быть положительными: {self.step_durations}")

        known = set(ids)
        coords = {q.id: (q.x, q.y) for q in self.register}
        seen_edges: set[frozenset[int]] = set()
        for edge in self.crosstalk_edges:
            if edge.a == edge.b:
                raise ModelError(f"Ребро crosstalk соединяет кубит {edge.a} сам с собой")
            if edge.a not in known or edge.b not in known:
                raise ModelError(f"Ребро ({edge.a}, {edge.b}) ссылается на несуществующий кубит")
            pair = frozenset((edge.a, edge.b))
            if pair in seen_edges:
                raise ModelError(f"Ребро ({edge.a}, {edge.b}) задано дважды")
            seen_edges.add(pair)
            if self.nearest_neighbour:
                (xa, ya), (xb, yb) = coords[edge.a], coords[edge.b]
                if abs(xa - xb) + abs(ya - yb) != 1:
                    raise ModelError(
                        f"Ребро ({edge.a}, {edge.b}) не соединяет соседей решётки"
                    )

        defect_ids = self.defect_ids
        if len(set(defect_ids)) != len(defect_ids):
            raise ModelError(f"Повторяющиеся id дефектов: {defect_ids}")
        if known & set(defect_ids):
            raise ModelError(f"id дефектов пересекаются с id кубитов: {sorted(known & set(defect_ids))}")
        for defect in self.defects:
            if defect.dim != 2:
                raise ModelError(f"Дефект {defect.id}: поддерживаются только кубитные дефекты")
            _check_density(defect.initial_state, 2, f"Дефект {defect.id}")
            for c in defect.couplings:
                if c.qubit not in known:
                    raise ModelError(f"Дефект {defect.id} связан с несуществующим кубитом {c.qubit}")

        dim = 2 ** self.num_qubits
        _check_density(self.register_state, dim, "Начальное состояние регистра")

    def without_defects(self) -> DeviceModel:
        return replace(self, defects=())

    def decoupled(self, qubit_id: int) -> DeviceModel:
        """Копия модели с обнулённой связью кубита с дефектами."""
        defects = tuple(
            replace(d, couplings=tuple(
                replace(c, g=0.0) if c.qubit == qubit_id else c for c in d.couplings
            ))
            for d in self.defects
        )
        return replace(self, defects=defects)

    def relabelled(self, mapping: dict[int, int]) -> DeviceModel:
        """Переименование кубитов (перестановка id) с сохранением порядка регистра."""
        register = tuple(replace(q, id=mapping.get(q.id, q.id)) for q in self.register)
        edges = tuple(
            replace(e, a=mapping.get(e.a, e.a), b=mapping.get(e.b, e.b))
            for e in self.crosstalk_edges
        )
        defects = tuple(
            replace(d, couplings=tuple(
                replace(c, qubit=mapping.get(c.qubit, c.qubit)) for c in d.couplings
            ))
            for d in self.defects
        )
        return replace(self, register=register, crosstalk_edges=edges, defects=defects)


def grid_register(rows: int, cols: int, first_id: int = 1) -> tuple[Qubit, ...]:
    """Кубиты решётки rows×cols, id по строкам начиная с first_id."""
    return tuple(
        Qubit(first_id + r * cols + c, c, r) for r in range(rows) for c in range(cols)
    )


def nearest_neighbour_pairs(register: tuple[Qubit, ...]) -> list[tuple[int, int]]:
    by_coord = {(q.x, q.y): q.id for q in register}
    pairs = []
    for q in register:
        for dx, dy in ((1, 0), (0, 1)):
            other = by_coord.get((q.x + dx, q.y + dy))
            if other is not None:
                pairs.append((q.id, other))
    return pairs


def random_crosstalk(
    register: tuple[Qubit, ...],
    rng: np.random.Generator,
    j_range: tuple[float, float] = DEFAULT_J_RANGE,
    edge_probability: float = 1.0,
) -> tuple[CrosstalkEdge, ...]:
    """Случайный ZZ-crosstalk между соседями решётки, J ~ U[j_range]."""
    edges = []
    for a, b in nearest_neighbour_pairs(register):
        if edge_probability < 1.0 and rng.random() >= edge_probability:
            continue
        edges.append(CrosstalkEdge(a, b, float(rng.uniform(*j_range))))
    return tuple(edges)


def random_crosstalk_model(
    rows: int,
    cols: int,
    rng: np.random.Generator,
    *,
    num_steps: int = 2,
    j_range: tuple[float, float] = DEFAULT_J_RANGE,
    register_init: str = "plus",
) -> DeviceModel:
    """Модель только с crosstalk (без дефектов): нулевая гипотеза для BNM."""
    register = grid_register(rows, cols)
    return DeviceModel(
        register=register,
        crosstalk_edges=random_crosstalk(register, rng, j_range),
        num_steps=num_steps,
        initial_register_state=product_state([basis_state(register_init)] * len(register)),
        nearest_neighbour=True,
    )
