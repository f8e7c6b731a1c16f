"""Источники маргиналов процесса: точный эталон или тени (медиана средних → MLE).

Оба источника отдают process(spec) и кешируют результат под блокировкой,
так что анализы могут читать маргиналы из пула потоков.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from src.estimation.budget import EstimationPlan
from src.estimation.causality import free_observables
from src.estimation.median_of_means import estimate_table
from src.estimation.mle import MleOptions, PhysicalEstimate, mle_reconstruct
from src.estimation.tables import ExpectationTable
from src.process.choi import DEFAULT_MAX_DIM, exact_process_choi
from src.process.device import DeviceModel
from src.process.marginals import Background, MarginalSpec
from src.shadow.records import ShadowBatch
from src.tensor import LabelledOperator

logger = logging.getLogger(__name__)

DEFAULT_BOOTSTRAP_BLOCKS = 64
DEFAULT_BOOTSTRAP_REPLICATES = 16


class MarginalSource(Protocol):
    qubits: tuple[int, ...]
    num_steps: int

    def process(self, spec: MarginalSpec) -> LabelledOperator: ...

    def provenance(self) -> dict: ...


class ExactSource:
    """Точные маргиналы по модели устройства."""

    def __init__(self, model: DeviceModel, max_dim: int = DEFAULT_MAX_DIM) -> None:
        self.model = model
        self.max_dim = max_dim
        self.qubits = tuple(model.qubit_ids)
        self.num_steps = model.num_steps
        self._cache: dict[MarginalSpec, LabelledOperator] = {}
        self._lock = threading.Lock()

    def process(self, spec: MarginalSpec) -> LabelledOperator:
        with self._lock:
            cached = self._cache.get(spec)
        if cached is not None:
            return cached
        choi = exact_process_choi(self.model, spec, self.max_dim)
        with self._lock:
            self._cache.setdefault(spec, choi)
        return choi

    def provenance(self) -> dict:
        return {"kind": "exact"}


@dataclass(frozen=True)
class ShadowOptions:
    batches: int | None = None
    mle: MleOptions = field(default_factory=MleOptions)
    bootstrap_blocks: int = DEFAULT_BOOTSTRAP_BLOCKS
    bootstrap_replicates: int = DEFAULT_BOOTSTRAP_REPLICATES
    bootstrap_seed: int = 0


@dataclass(frozen=True)
class ShadowMarginal:
    table: ExpectationTable
    estimate: PhysicalEstimate


class ShadowSource:
    """Маргиналы, восстановленные из записей выстрелов."""

    def __init__(self, batch: ShadowBatch, options: ShadowOptions | None = None) -> None:
        if len(batch) == 0:
            raise ValueError("Пустой набор выстрелов")
        self.batch = batch
        self.options = options or ShadowOptions()
        self.qubits = batch.qubits
        self.num_steps = batch.num_steps
        self._tables: dict[frozenset, ExpectationTable] = {}
        self._cache: dict[frozenset, ShadowMarginal] = {}
        self._lock = threading.Lock()

    def _check(self, spec: MarginalSpec) -> None:
        if spec.background is Background.idle:
            raise ValueError("Тени всегда деполяризуют несохранённые ноги; фон idle недоступен")
        if spec.num_steps != self.num_steps:
            raise ValueError(f"Маргинал рассчитан на k={spec.num_steps}, выстрелы: на k={self.num_steps}")

    def table(self, spec: MarginalSpec) -> ExpectationTable:
        """Медиана средних по свободным строкам маргинала (кешируется)."""
        self._check(spec)
        key = spec.retained
        with self._lock:
            cached = self._tables.get(key)
        if cached is not None:
            return cached
        legs = spec.legs(self.qubits)
        plan = EstimationPlan.for_shots(
            free_observables(legs), len(self.batch), batches=self.options.batches,
        )
        table = estimate_table(self.batch, plan)
        with self._lock:
            return self._tables.setdefault(key, table)

    def marginal(self, spec: MarginalSpec) -> ShadowMarginal:
        self._check(spec)
        key = spec.retained
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached

        table = self.table(spec)
        estimate = mle_reconstruct(table, options=self.options.mle)
        result = ShadowMarginal(table, estimate)
        with self._lock:
            self._cache.setdefault(key, result)
        logger.debug(
            "Маргинал %s по %d выстрелам: MLE %s за %d итераций",
            spec.describe(), len(self.batch),
            "сошлась" if estimate.converged else "НЕ сошлась", estimate.iterations,
        )
        return result

    def process(self, spec: MarginalSpec) -> LabelledOperator:
        return self.marginal(spec).estimate.choi

    def estimates(self) -> list[PhysicalEstimate]:
        with self._lock:
            return [m.estimate for m in self._cache.values()]

    def provenance(self) -> dict:
        return {"kind": "shadow", "shots": len(self.batch), "seed": self.batch.master_seed}

    def bootstrap(self) -> list[ShadowSource]:
        """Блочный бутстреп: блоки выстрелов с возвращением, по источнику на реплику."""
        n = len(self.batch)
        blocks = max(1, min(self.options.bootstrap_blocks, n))
        edges = np.linspace(0, n, blocks + 1).astype(np.int64)
        rng = np.random.default_rng(self.options.bootstrap_seed)
        replicates = []
        for _ in range(self.options.bootstrap_replicates):
            chosen = rng.integers(0, blocks, size=blocks)
            indices = np.concatenate([np.arange(edges[b], edges[b + 1]) for b in chosen])
            replicates.append(ShadowSource(self.batch.take(indices), self.options))
        return replicates


def as_source(origin: DeviceModel | ShadowBatch | MarginalSource) -> MarginalSource:
    if isinstance(origin, DeviceModel):
        return ExactSource(origin)
    if isinstance(origin, ShadowBatch):
        return ShadowSource(origin)
    return origin
