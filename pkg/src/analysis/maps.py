"""Карты немарковости по кубитам и парам кубитов."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence

import numpy as np

from src.analysis.measures import mutual_information, qmi
from src.analysis.sources import ExactSource, MarginalSource, ShadowSource, as_source
from src.process.device import DeviceModel
from src.process.marginals import Background, MarginalSpec
from src.shadow.records import ShadowBatch

logger = logging.getLogger(__name__)

Origin = DeviceModel | ShadowBatch | MarginalSource


def filtered_specs(qubits: Sequence[int], num_steps: int) -> list[MarginalSpec]:
    return [MarginalSpec.single_qubit(q, num_steps) for q in qubits]


def common_cause_specs(qubits: Sequence[int]) -> list[MarginalSpec]:
    return [MarginalSpec.common_cause(a, b) for a in qubits for b in qubits if a != b]


def spatial_specs(qubits: Sequence[int], step: int, num_steps: int) -> list[MarginalSpec]:
    return [
        MarginalSpec.spatial(a, b, step, num_steps)
        for n, a in enumerate(qubits) for b in qubits[n + 1:]
    ]


def filtered_qmi_map(origin: Origin, qubits: Sequence[int] | None = None) -> dict[int, float]:
    """BNM: QMI одно-кубитного маргинала при деполяризации всех остальных кубитов."""
    source = as_source(origin)
    qubits = list(qubits or source.qubits)
    scores = {
        q: qmi(source.process(MarginalSpec.single_qubit(q, source.num_steps))) for q in qubits
    }
    logger.debug("Отфильтрованная карта QMI: %s", scores)
    return scores


def naive_qmi_map(origin: DeviceModel | ExactSource, qubits: Sequence[int] | None = None) -> dict[int, float]:
    """QMI кубита при простаивающих остальных: смешивает RNM и BNM. Только точный путь."""
    source = as_source(origin)
    if not isinstance(source, ExactSource):
        raise TypeError("Наивная карта строится только по точной модели")
    qubits = list(qubits or source.qubits)
    return {
        q: qmi(source.process(MarginalSpec.single_qubit(q, source.num_steps, Background.idle)))
        for q in qubits
    }


def _own_temporal_split(source: MarginalSource, qubit: int) -> float:
    """QMI между шагом 2 кубита и его процессом Υ_{1:0}."""
    choi = source.process(MarginalSpec.single_qubit(qubit, 2))
    late = [leg for leg in choi.legs if leg.time == 2]
    early = [leg for leg in choi.legs if leg.time < 2]
    return mutual_information(choi, [late, early])


def common_cause_matrix(origin: Origin, qubits: Sequence[int] | None = None) -> np.ndarray:
    """M[i][j] = I(Ê^{(q_j)}_{2:1} : Υ^{(q_i)}_{1:0}); диагональ: собственное разбиение кубита."""
    source = as_source(origin)
    if source.num_steps != 2:
        raise ValueError(f"Анализ общей причины определён при k = 2, получено k = {source.num_steps}")
    qubits = list(qubits or source.qubits)
    matrix = np.zeros((len(qubits), len(qubits)))
    for i, early in enumerate(qubits):
        for j, late in enumerate(qubits):
            if i == j:
                matrix[i, j] = _own_temporal_split(source, early)
                continue
            choi = source.process(MarginalSpec.common_cause(early, late))
            late_block = [leg for leg in choi.legs if leg.qubit == late]
            early_block = [leg for leg in choi.legs if leg.qubit == early]
            matrix[i, j] = mutual_information(choi, [late_block, early_block])
    return matrix


def spatial_qmi_matrix(
    origin: Origin, qubits: Sequence[int] | None = None, step: int = 1,
) -> np.ndarray:
    """Чисто пространственная QMI между картами шага step двух кубитов; диагональ 0."""
    source = as_source(origin)
    qubits = list(qubits or source.qubits)
    matrix = np.zeros((len(qubits), len(qubits)))
    for i, a in enumerate(qubits):
        for j in range(i + 1, len(qubits)):
            b = qubits[j]
            choi = source.process(MarginalSpec.spatial(a, b, step, source.num_steps))
            blocks = [[leg for leg in choi.legs if leg.qubit == q] for q in (a, b)]
            matrix[i, j] = matrix[j, i] = mutual_information(choi, blocks)
    return matrix


def standard_errors(
    replicates: Sequence[dict[int, float] | np.ndarray],
) -> dict[int, float] | np.ndarray:
    """Выборочное стандартное отклонение карты по бутстреп-репликам."""
    if len(replicates) < 2:
        raise ValueError(f"Для стандартной ошибки нужно ≥ 2 реплик, получено {len(replicates)}")
    if isinstance(replicates[0], dict):
        keys = list(replicates[0])
        return {k: float(np.std([r[k] for r in replicates], ddof=1)) for k in keys}
    return np.std(np.stack(replicates), axis=0, ddof=1)


def bootstrap_errors(
    source: ShadowSource, score: Callable[[MarginalSource], dict[int, float] | np.ndarray],
) -> dict[int, float] | np.ndarray:
    """Бутстреп-стандартные ошибки карты score по блочным репликам."""
    return standard_errors([score(replicate) for replicate in source.bootstrap()])
