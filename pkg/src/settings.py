"""Конфигурация эксперимента из YAML + переменных окружения."""

from __future__ import annotations

import hashlib
import logging
import os
import tempfile
import threading
from pathlib import Path
from typing import Any, Literal

import numpy as np
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from src.analysis.classify import DEFAULT_THRESHOLD, NULL_PERCENTILE, ThresholdMode
from src.analysis.sources import DEFAULT_BOOTSTRAP_BLOCKS, DEFAULT_BOOTSTRAP_REPLICATES, ShadowOptions
from src.estimation.mle import MleOptions
from src.process.choi import DEFAULT_MAX_DIM
from src.process.device import (
    DEFAULT_G_RANGE,
    DEFAULT_J_RANGE,
    CrosstalkEdge,
    Defect,
    DefectCoupling,
    DeviceModel,
    ModelError,
    Qubit,
    basis_state,
    grid_register,
    product_state,
    random_crosstalk,
)

# Lock для сериализации записи конфига
_config_lock = threading.Lock()

PROJECT_ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = PROJECT_ROOT / "config"

logger = logging.getLogger(__name__)

AnalysisName = Literal["filtered", "naive", "common_cause", "spatial", "all"]


class _Strict(BaseModel):
    """Неизвестные ключи запрещены."""
    model_config = ConfigDict(extra="forbid")


# --- Устройство ---


class GridConfig(_Strict):
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    first_id: int = 1


class QubitConfig(_Strict):
    id: int
    x: int
    y: int


class CrosstalkEdgeConfig(_Strict):
    a: int
    b: int
    j: float  # рад / ед. времени


class CrosstalkConfig(_Strict):
    mode: Literal["none", "explicit", "nearest_neighbour_random"] = "none"
    edges: list[CrosstalkEdgeConfig] = Field(default_factory=list)
    seed: int = 0
    j_range: tuple[float, float] = DEFAULT_J_RANGE
    edge_probability: float = Field(default=1.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _edges_match_mode(self) -> CrosstalkConfig:
        if self.mode != "explicit" and self.edges:
            raise ValueError(f"Список рёбер задан при mode={self.mode!r}")
        return self


class DefectCouplingConfig(_Strict):
    qubit: int
    g: float | None = None  # None: случайно из g_range дефекта


class DefectConfig(_Strict):
    id: int
    couplings: list[DefectCouplingConfig] = Field(default_factory=list)
    initial_state: Literal["zero", "one", "plus", "mixed"] = "zero"
    g_range: tuple[float, float] = DEFAULT_G_RANGE
    seed: int = 0


class DeviceConfig(_Strict):
    grid: GridConfig | None = None
    qubits: list[QubitConfig] = Field(default_factory=list)
    crosstalk: CrosstalkConfig = Field(default_factory=CrosstalkConfig)
    defects: list[DefectConfig] = Field(default_factory=list)
    step_duration: float = Field(default=1.0, gt=0)  # ед. времени
    step_durations: list[PositiveFloat] | None = None
    register_init: Literal["zero", "plus"] = "zero"
    nearest_neighbour: bool = False

    @model_validator(mode="after")
    def _one_register(self) -> DeviceConfig:
        if (self.grid is None) == (not self.qubits):
            if self.grid is None:
                raise ValueError("Нужен grid или явный список qubits")
            raise ValueError("Укажите либо grid, либо qubits, но не оба")
        return self

    def register(self) -> tuple[Qubit, ...]:
        if self.grid is not None:
            return grid_register(self.grid.rows, self.grid.cols, self.grid.first_id)
        return tuple(Qubit(q.id, q.x, q.y) for q in self.qubits)


# --- Протокол и анализ ---


class ProtocolConfig(_Strict):
    k: int = Field(default=2, ge=1)
    shots: int | None = Field(default=1_000_000, ge=1)
    master_seed: int = Field(default=0, ge=0)
    epsilon: float | None = Field(default=None, gt=0)
    batches: int | None = Field(default=None, ge=1)
    chunk: int = Field(default=8192, ge=1)

    @model_validator(mode="after")
    def _shots_or_epsilon(self) -> ProtocolConfig:
        if self.shots is None and self.epsilon is None:
            raise ValueError("Нужно задать shots или epsilon")
        if self.batches is not None and self.batches % 2 == 0:
            raise ValueError(f"Число пакетов должно быть нечётным, получено {self.batches}")
        return self


class ThresholdConfig(_Strict):
    mode: ThresholdMode = ThresholdMode.fixed
    value: float = Field(default=DEFAULT_THRESHOLD, gt=0)  # бит
    percentile: float = Field(default=NULL_PERCENTILE, gt=0, lt=100)
    null_models: int = Field(default=20, ge=1)
    null_seed: int = 0
    j_range: tuple[float, float] = DEFAULT_J_RANGE


class MleConfig(_Strict):
    max_iters: int = Field(default=500, ge=1)
    tol: float = Field(default=1e-9, gt=0)
    weighting: Literal["uniform", "shadow_norm"] = "shadow_norm"
    dykstra_iters: int = Field(default=200, ge=1)
    require_convergence: bool = True  # иначе несошедшаяся MLE: только предупреждение

    def options(self, seed: int = 0) -> MleOptions:
        return MleOptions(
            max_iters=self.max_iters,
            tol=self.tol,
            weighting=self.weighting,
            dykstra_iters=self.dykstra_iters,
            seed=seed,
        )


class AnalysisConfig(_Strict):
    analyses: list[AnalysisName] = Field(default_factory=lambda: ["all"])
    threshold: ThresholdConfig = Field(default_factory=ThresholdConfig)
    spatial_step: int = Field(default=1, ge=1)
    bootstrap_blocks: int = Field(default=DEFAULT_BOOTSTRAP_BLOCKS, ge=1)
    bootstrap_replicates: int = Field(default=DEFAULT_BOOTSTRAP_REPLICATES, ge=0)
    bootstrap_seed: int = 0
    mle: MleConfig = Field(default_factory=MleConfig)
    max_dim: int = Field(default=DEFAULT_MAX_DIM, ge=2)

    def wants(self, name: str) -> bool:
        """spatial включается только явно: у него нет критериев приёмки."""
        if name in self.analyses:
            return True
        return name != "spatial" and "all" in self.analyses


class OutputConfig(_Strict):
    directory: str = "runs"
    shots_file: str = "shots.stsh"
    report_file: str = "report.yaml"
    manifest_file: str = "manifest.yaml"
    tables_dir: str | None = "tables"
    ledger: str | None = "data/runs.db"

    def path(self, name: str) -> Path:
        return Path(self.directory) / name


class ExperimentConfig(_Strict):
    """Корневая конфигурация эксперимента."""
    name: str = ""
    device: DeviceConfig
    protocol: ProtocolConfig = Field(default_factory=ProtocolConfig)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    threads: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _references_exist(self) -> ExperimentConfig:
        ids = [q.id for q in self.device.register()]
        known = set(ids)
        if len(known) != len(ids):
            raise ValueError(f"Повторяющиеся id кубитов: {ids}")
        for edge in self.device.crosstalk.edges:
            for q in (edge.a, edge.b):
                if q not in known:
                    raise ValueError(f"Ребро ({edge.a}, {edge.b}) ссылается на несуществующий кубит {q}")
        for defect in self.device.defects:
            if defect.id in known:
                raise ValueError(f"id дефекта {defect.id} совпадает с id кубита")
            for c in defect.couplings:
                if c.qubit not in known:
                    raise ValueError(f"Дефект {defect.id} связан с несуществующим кубитом {c.qubit}")
        if self.device.step_durations is not None and len(self.device.step_durations) != self.protocol.k:
            raise ValueError(
                f"step_durations: ожидалось {self.protocol.k} значений, "
                f"получено {len(self.device.step_durations)}"
            )
        return self

    def shadow_options(self) -> ShadowOptions:
        a = self.analysis
        return ShadowOptions(
            batches=self.protocol.batches,
            mle=a.mle.options(seed=self.protocol.master_seed),
            bootstrap_blocks=a.bootstrap_blocks,
            bootstrap_replicates=a.bootstrap_replicates,
            bootstrap_seed=a.bootstrap_seed,
        )


# --- Построение модели ---


def build_model(config: ExperimentConfig) -> DeviceModel:
    """DeviceModel по конфигу; случайные части детерминированы своими seed."""
    device = config.device
    register = device.register()

    crosstalk = device.crosstalk
    if crosstalk.mode == "explicit":
        edges = tuple(CrosstalkEdge(e.a, e.b, e.j) for e in crosstalk.edges)
    elif crosstalk.mode == "nearest_neighbour_random":
        edges = random_crosstalk(
            register, np.random.default_rng(crosstalk.seed),
            crosstalk.j_range, crosstalk.edge_probability,
        )
    else:
        edges = ()

    defects = []
    for d in device.defects:
        rng = np.random.default_rng(d.seed)
        couplings = tuple(
            DefectCoupling(c.qubit, c.g if c.g is not None else float(rng.uniform(*d.g_range)))
            for c in d.couplings
        )
        defects.append(Defect(d.id, couplings, basis_state(d.initial_state)))

    model = DeviceModel(
        register=register,
        crosstalk_edges=edges,
        defects=tuple(defects),
        step_duration=device.step_duration,
        num_steps=config.protocol.k,
        initial_register_state=product_state([basis_state(device.register_init)] * len(register)),
        nearest_neighbour=device.nearest_neighbour,
        step_durations=tuple(device.step_durations) if device.step_durations else None,
    )
    logger.info(
        "Модель: %d кубитов, %d рёбер crosstalk, %d дефектов, k=%d",
        model.num_qubits, len(edges), len(defects), model.num_steps,
    )
    return model


def device_config(model: DeviceModel, register_init: Literal["zero", "plus"] = "zero") -> DeviceConfig:
    """Обратное преобразование: модель → явный конфиг (рёбра и g зафиксированы)."""
    initial_states = ("zero", "one", "plus", "mixed")

    def state_name(rho: np.ndarray) -> str:
        for name in initial_states:
            if np.allclose(rho, basis_state(name)):
                return name
        raise ModelError("Начальное состояние дефекта не выражается пресетом")

    return DeviceConfig(
        qubits=[QubitConfig(id=q.id, x=q.x, y=q.y) for q in model.register],
        crosstalk=CrosstalkConfig(
            mode="explicit" if model.crosstalk_edges else "none",
            edges=[CrosstalkEdgeConfig(a=e.a, b=e.b, j=e.j) for e in model.crosstalk_edges],
        ),
        defects=[
            DefectConfig(
                id=d.id,
                couplings=[DefectCouplingConfig(qubit=c.qubit, g=c.g) for c in d.couplings],
                initial_state=state_name(d.initial_state),
            )
            for d in model.defects
        ],
        step_duration=model.step_duration,
        step_durations=list(model.step_durations) if model.step_durations else None,
        register_init=register_init,
        nearest_neighbour=model.nearest_neighbour,
    )


# --- Загрузка и сохранение ---


def _to_data(config: ExperimentConfig) -> dict[str, Any]:
    return config.model_dump(mode="json")


def dump_config(config: ExperimentConfig) -> str:
    return yaml.dump(_to_data(config), default_flow_style=False, allow_unicode=True, sort_keys=False)


def config_hash(config: ExperimentConfig) -> str:
    """sha256 канонического дампа (ключи отсортированы, threads не влияет на результат)."""
    data = _to_data(config)
    data.pop("threads", None)
    canonical = yaml.dump(data, default_flow_style=False, allow_unicode=True, sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def default_threads(config: ExperimentConfig | None = None) -> int:
    """Число потоков: конфиг → SHADOWS_THREADS → os.cpu_count()."""
    if config is not None and config.threads:
        return config.threads
    if env := os.environ.get("SHADOWS_THREADS"):
        return max(1, int(env))
    return os.cpu_count() or 1


def parse_config(data: dict[str, Any]) -> ExperimentConfig:
    return ExperimentConfig.model_validate(data)


def load_config(path: str | Path) -> ExperimentConfig:
    """Загрузить и проверить конфиг; .env подхватывается до переменных окружения."""
    env_path = PROJECT_ROOT / ".env"
    load_dotenv(env_path)

    path = Path(path)
    with open(path, encoding="utf-8") as f:
        data: dict[str, Any] = yaml.safe_load(f) or {}
    config = parse_config(data)
    logger.info("Конфиг: %s (hash %s)", path, config_hash(config)[:12])
    return config


def save_config(config: ExperimentConfig, path: str | Path) -> None:
    """Атомарно сохранить конфиг в YAML (через tmp + rename).

    Использует threading lock для защиты от concurrent записи.
    """
    path = Path(path)
    with _config_lock:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=path.parent, suffix=".yaml.tmp", prefix=".experiment_")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(dump_config(config))
            os.replace(tmp_path, path)
        except BaseException:
            os.unlink(tmp_path)
            raise
