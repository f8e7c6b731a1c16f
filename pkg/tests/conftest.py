from __future__ import annotations

import math

import numpy as np
import pytest

from src.process.device import (
    CrosstalkEdge,
    Defect,
    DefectCoupling,
    DeviceModel,
    basis_state,
    grid_register,
    product_state,
)
from src.settings import CONFIG_DIR, ExperimentConfig, build_model, load_config

# g·τ = π/4: шаг Гейзенберга: точный SWAP кубита с дефектом
FULL_SWAP_G = math.pi / 4


def make_model(
    rows: int = 1,
    cols: int = 1,
    *,
    edges: tuple[tuple[int, int, float], ...] = (),
    defects: dict[int, dict[int, float]] | None = None,
    num_steps: int = 2,
    register_init: str = "zero",
) -> DeviceModel:
    """Модель по компактному описанию: defects = {id дефекта: {кубит: g}}."""
    register = grid_register(rows, cols)
    return DeviceModel(
        register=register,
        crosstalk_edges=tuple(CrosstalkEdge(a, b, j) for a, b, j in edges),
        defects=tuple(
            Defect(d, tuple(DefectCoupling(q, g) for q, g in couplings.items()))
            for d, couplings in (defects or {}).items()
        ),
        num_steps=num_steps,
        initial_register_state=product_state([basis_state(register_init)] * len(register)),
    )


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    g = rng.standard_normal((dim, rank or dim)) + 1j * rng.standard_normal((dim, rank or dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def experiment(tmp_path, **overrides) -> ExperimentConfig:
    """Маленький статистический эксперимент: 1×2, дефект на q1, несколько тысяч выстрелов."""
    data = {
        "name": "tiny",
        "device": {
            "grid": {"rows": 1, "cols": 2},
            "defects": [{"id": 101, "couplings": [{"qubit": 1, "g": 0.6}]}],
            "register_init": "plus",
        },
        "protocol": {"k": 2, "shots": 3000, "master_seed": 7, "chunk": 1024},
        "analysis": {
            "analyses": ["filtered", "common_cause"],
            "bootstrap_replicates": 0,
        },
        "output": {"directory": str(tmp_path / "run"), "ledger": str(tmp_path / "ledger" / "runs.db")},
    }
    for section, values in overrides.items():
        if isinstance(values, dict):
            data.setdefault(section, {}).update(values)
        else:
            data[section] = values
    return ExperimentConfig.model_validate(data)


@pytest.fixture(autouse=True)
def isolated_threads(monkeypatch):
    monkeypatch.delenv("SHADOWS_THREADS", raising=False)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def swap_model() -> DeviceModel:
    return make_model(defects={101: {1: FULL_SWAP_G}})


@pytest.fixture(scope="session")
def chain_config() -> ExperimentConfig:
    return load_config(CONFIG_DIR / "crosstalk_chain.yaml")


@pytest.fixture(scope="session")
def grid_config() -> ExperimentConfig:
    return load_config(CONFIG_DIR / "shared_bath_grid.yaml")


@pytest.fixture(scope="session")
def chain_model(chain_config) -> DeviceModel:
    return build_model(chain_config)


@pytest.fixture(scope="session")
def grid_model(grid_config) -> DeviceModel:
    return build_model(grid_config)
