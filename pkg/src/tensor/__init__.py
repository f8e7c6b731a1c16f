"""Плотная линейная алгебра над операторами с размеченными ногами."""

from src.tensor.legs import Direction, LegLabel
from src.tensor.operator import (
    LabelledOperator,
    LegError,
    apply_local,
    partial_trace,
    permute_legs,
    relabel_legs,
    tensor_product,
)
from src.tensor.spectral import (
    NotHermitianError,
    SpectralDecomposition,
    SupportError,
    project_psd,
    relative_entropy,
    spectral_decomposition,
    von_neumann_entropy,
)

__all__ = [
    "Direction",
    "LabelledOperator",
    "LegError",
    "LegLabel",
    "NotHermitianError",
    "SpectralDecomposition",
    "SupportError",
    "apply_local",
    "partial_trace",
    "permute_legs",
    "project_psd",
    "relabel_legs",
    "relative_entropy",
    "spectral_decomposition",
    "tensor_product",
    "von_neumann_entropy",
]
