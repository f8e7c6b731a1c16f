"""Синтетические устройства и точные процесс-тензоры."""

from src.process.choi import (
    DimensionOverflowError,
    causality_residual,
    exact_process_choi,
    marginalize,
    markov_closest,
    product_of_marginals,
)
from src.process.device import DeviceModel, ModelError
from src.process.dynamics import build_step_hamiltonian, build_step_unitary
from src.process.marginals import Background, MarginalSpec, StepStructureError

__all__ = [
    "Background",
    "DeviceModel",
    "DimensionOverflowError",
    "MarginalSpec",
    "ModelError",
    "StepStructureError",
    "build_step_hamiltonian",
    "build_step_unitary",
    "causality_residual",
    "exact_process_choi",
    "marginalize",
    "markov_closest",
    "product_of_marginals",
]
