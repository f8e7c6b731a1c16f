"""Таблица 24 одно-кубитных элементов Клиффорда (с точностью до глобальной фазы).

Таблица строится обходом в ширину из I по образующим (H, S): элемент
U порождает H·U и S·U. Порядок обхода фиксирован, поэтому индекс
CliffordIndex стабилен между запусками; индекс 0: тождество.
Глобальная фаза нормирована: первый ненулевой элемент матрицы вещественный и положительный.
"""

from __future__ import annotations

from collections import deque

import numpy as np

NUM_CLIFFORDS = 24
_ROUND = 9

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PHASE = np.array([[1, 0], [0, 1j]], dtype=complex)
GENERATORS = (HADAMARD, PHASE)


def normalize_phase(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    pivot = flat[np.argmax(np.abs(flat) > 1e-9)]
    return u * (abs(pivot) / pivot)


def _key(u: np.ndarray) -> tuple[float, ...]:
    flat = np.round(normalize_phase(u).reshape(-1), _ROUND) + 0.0
    return tuple(np.concatenate([flat.real, flat.imag]).tolist())


def _generate() -> np.ndarray:
    identity = np.eye(2, dtype=complex)
    elements = [identity]
    seen = {_key(identity)}
    queue = deque([identity])
    while queue:
        current = queue.popleft()
        for g in GENERATORS:
            candidate = normalize_phase(g @ current)
            key = _key(candidate)
            if key not in seen:
                seen.add(key)
                elements.append(candidate)
                queue.append(candidate)
    table = np.array(elements)
    if len(table) != NUM_CLIFFORDS:
        raise RuntimeError(f"Группа Клиффорда: получено {len(table)} элементов вместо 24")
    return table


CLIFFORD_TABLE = _generate()
CLIFFORD_TABLE.setflags(write=False)

_INDEX = {_key(u): n for n, u in enumerate(CLIFFORD_TABLE)}


def clifford(index: int) -> np.ndarray:
    return CLIFFORD_TABLE[index]


def index_of(u: np.ndarray) -> int:
    """Индекс элемента таблицы, совпадающего с u с точностью до фазы."""
    try:
        return _INDEX[_key(np.asarray(u, dtype=complex))]
    except KeyError:
        raise ValueError("Матрица не является одно-кубитным элементом Клиффорда") from None


def compose(first: int, second: int) -> int:
    """Индекс произведения clifford(first) @ clifford(second)."""
    return index_of(CLIFFORD_TABLE[first] @ CLIFFORD_TABLE[second])


HADAMARD_INDEX = index_of(HADAMARD)
