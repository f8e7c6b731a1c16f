"""Монте-Карло схемы пространственно-временных теней на векторах состояния.

Каждый выстрел: начальное состояние (выборка из спектрального ансамбля),
затем k раз: случайный Клиффорд и Z-измерение каждого кубита с коллапсом,
сброс в |0⟩, случайное приготовление, шаг эволюции U; в конце t_k:
последний слой измерений. Дефекты не сбрасываются и не измеряются.

Случайность счётчиковая: выстрел s потребляет фиксированные R равномерных
чисел из потока Philox(key=master_seed), начиная со смещения s·R. Поэтому любое
разбиение диапазона выстрелов между исполнителями даёт те же записи.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.process.device import DeviceModel
from src.process.dynamics import step_unitaries
from src.shadow.instruments import DEFAULT_INSTRUMENT, CliffordInstrument
from src.shadow.records import ShadowBatch, ShadowRecord
from src.tensor import spectral_decomposition

logger = logging.getLogger(__name__)

# Philox выдаёт по 4 слова на один шаг счётчика
PHILOX_BLOCK = 4
DEFAULT_CHUNK = 8192
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class StreamLayout:
    """Раскладка равномерных чисел одного выстрела."""
    num_qubits: int
    num_steps: int
    num_defects: int

    @property
    def meas(self) -> slice:
        n = (self.num_steps + 1) * self.num_qubits
        return slice(0, n)

    @property
    def prep(self) -> slice:
        start = self.meas.stop
        return slice(start, start + self.num_steps * self.num_qubits)

    @property
    def outcomes(self) -> slice:
        start = self.prep.stop
        return slice(start, start + (self.num_steps + 1) * self.num_qubits)

    @property
    def initial(self) -> slice:
        start = self.outcomes.stop
        return slice(start, start + 1 + self.num_defects)

    @property
    def width(self) -> int:
        """R: число равномерных на выстрел, выровненное на блок Philox."""
        used = self.initial.stop
        return -(-used // PHILOX_BLOCK) * PHILOX_BLOCK


def shot_uniforms(master_seed: int, start: int, count: int, width: int) -> np.ndarray:
    """Равномерные числа выстрелов [start, start + count), форма (count, width)."""
    if width % PHILOX_BLOCK:
        raise ValueError(f"Ширина {width} не кратна блоку Philox")
    bit_generator = np.random.Philox(key=master_seed & _SEED_MASK)
    if start:
        bit_generator = bit_generator.advance(start * width // PHILOX_BLOCK)
    generator = np.random.Generator(bit_generator)
    return generator.random((count, width))


def _ensemble(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Спектральный ансамбль: кумулятивные веса и векторы-столбцы."""
    spectrum = spectral_decomposition(rho)
    weights = np.clip(spectrum.eigenvalues, 0.0, None)
    cumulative = np.cumsum(weights / weights.sum())
    cumulative[-1] = 1.0
    return cumulative, spectrum.eigenvectors


def _sample_pure(rho: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    cumulative, vectors = _ensemble(rho)
    choice = np.searchsorted(cumulative, uniforms, side="right")
    choice = np.minimum(choice, len(cumulative) - 1)
    return vectors[:, choice].T  # (B, dim)


def _initial_states(model: DeviceModel, uniforms: np.ndarray) -> np.ndarray:
    state = _sample_pure(model.register_state, uniforms[:, 0])
    for n, defect in enumerate(model.defects, start=1):
        local = _sample_pure(defect.initial_state, uniforms[:, n])
        state = np.einsum("bi,bj->bij", state, local).reshape(len(state), -1)
    return state


def _apply_local(state: np.ndarray, matrices: np.ndarray, position: int) -> np.ndarray:
    """Применить по-выстрельные 2×2 матрицы (B, 2, 2) к кубиту position."""
    b = state.shape[0]
    left = 2**position
    view = state.reshape(b, left, 2, -1)
    return np.einsum("bij,bljr->blir", matrices, view).reshape(b, -1)


def _measure(
    state: np.ndarray, position: int, uniforms: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Z-измерение кубита position с коллапсом; возвращает (состояние, биты)."""
    b = state.shape[0]
    view = state.reshape(b, 2**position, 2, -1)
    p_one = np.sum(np.abs(view[:, :, 1, :]) ** 2, axis=(1, 2))
    bits = (uniforms < p_one).astype(np.uint8)
    mask = np.zeros((b, 1, 2, 1))
    mask[np.arange(b), 0, bits, 0] = 1.0
    view = view * mask
    norm = np.sqrt(np.where(bits == 1, p_one, 1.0 - p_one))
    view = view / np.maximum(norm, 1e-300)[:, None, None, None]
    return view.reshape(b, -1), bits


def _reset(state: np.ndarray, position: int, bits: np.ndarray) -> np.ndarray:
    """Сброс измеренного кубита в |0⟩: при исходе 1 амплитуды переносятся в 0."""
    b = state.shape[0]
    view = state.reshape(b, 2**position, 2, -1).copy()
    flip = bits == 1
    view[flip, :, 0, :] = view[flip, :, 1, :]
    view[:, :, 1, :] = 0.0
    return view.reshape(b, -1)


def sample_shots(
    model: DeviceModel,
    start: int,
    count: int,
    master_seed: int,
    *,
    instrument: CliffordInstrument = DEFAULT_INSTRUMENT,
    force_clifford: int | None = None,
    chunk: int = DEFAULT_CHUNK,
) -> ShadowBatch:
    """Выстрелы [start, start + count) одной модели.

    force_clifford: тестовый хук: все индексы Клиффордов равны заданному.
    """
    if start < 0 or count < 0:
        raise ValueError("Диапазон выстрелов должен быть неотрицательным")
    n, k = model.num_qubits, model.num_steps
    if count == 0:
        return ShadowBatch.empty(model.qubit_ids, k, master_seed)
    layout = StreamLayout(n, k, len(model.defects))
    unitaries = [u.data.T for u in step_unitaries(model)]

    parts = []
    for offset in range(0, count, chunk):
        size = min(chunk, count - offset)
        uniforms = shot_uniforms(master_seed, start + offset, size, layout.width)
        parts.append(_simulate_chunk(model, uniforms, layout, unitaries, instrument, force_clifford))

    batch = ShadowBatch(
        tuple(model.qubit_ids), k, master_seed, start,
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]),
    )
    logger.debug("Сгенерированы выстрелы [%d, %d), seed=%d", start, start + count, master_seed)
    return batch


def _simulate_chunk(
    model: DeviceModel,
    uniforms: np.ndarray,
    layout: StreamLayout,
    unitaries: list[np.ndarray],
    instrument: CliffordInstrument,
    force_clifford: int | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    b = len(uniforms)
    n, k = layout.num_qubits, layout.num_steps
    if force_clifford is None:
        meas = instrument.draw(uniforms[:, layout.meas]).reshape(b, k + 1, n)
        prep = instrument.draw(uniforms[:, layout.prep]).reshape(b, k, n)
    else:
        meas = np.full((b, k + 1, n), force_clifford, np.uint8)
        prep = np.full((b, k, n), force_clifford, np.uint8)
    outcome_u = uniforms[:, layout.outcomes].reshape(b, k + 1, n)
    outcomes = np.zeros((b, k + 1, n), np.uint8)

    state = _initial_states(model, uniforms[:, layout.initial])
    for t in range(k + 1):
        for q in range(n):
            state = _apply_local(state, instrument.measurement_rotations(meas[:, t, q]), q)
            state, outcomes[:, t, q] = _measure(state, q, outcome_u[:, t, q])
        if t == k:
            break
        for q in range(n):
            state = _reset(state, q, outcomes[:, t, q])
            state = _apply_local(state, instrument.preparations(prep[:, t, q]), q)
        state = state @ unitaries[t]
    return meas, outcomes, prep


def sample_shot(model: DeviceModel, master_seed: int, shot_index: int = 0, **kwargs) -> ShadowRecord:
    """Один выстрел: поток случайности определяется (master_seed, shot_index)."""
    return sample_shots(model, shot_index, 1, master_seed, **kwargs).record(0)
