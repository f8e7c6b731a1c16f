"""Гамильтониан шага и унитарный оператор эволюции на регистре ⊗ дефектах."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.process.device import DeviceModel
from src.tensor import LabelledOperator, LegLabel, permute_legs, spectral_decomposition, tensor_product
from src.tensor.pauli import PAULIS

logger = logging.getLogger(__name__)

_X, _Y, _Z = PAULIS[1], PAULIS[2], PAULIS[3]
ZZ = np.kron(_Z, _Z)
HEISENBERG = np.kron(_X, _X) + np.kron(_Y, _Y) + np.kron(_Z, _Z)


@dataclass(frozen=True)
class HamiltonianTerm:
    """Двухчастичный член: коэффициент × матрица на паре проводов."""
    kind: str  # "zz" | "heisenberg"
    legs: tuple[LegLabel, LegLabel]
    strength: float

    @property
    def matrix(self) -> np.ndarray:
        base = ZZ if self.kind == "zz" else HEISENBERG
        return self.strength * base


def system_legs(model: DeviceModel) -> tuple[LegLabel, ...]:
    """Провода системы: кубиты регистра в порядке регистра, затем дефекты."""
    return tuple(LegLabel.wire(q) for q in model.qubit_ids) + tuple(
        LegLabel.wire(d.id, d.dim) for d in model.defects
    )


def hamiltonian_terms(model: DeviceModel) -> list[HamiltonianTerm]:
    terms = [
        HamiltonianTerm("zz", (LegLabel.wire(e.a), LegLabel.wire(e.b)), e.j)
        for e in model.crosstalk_edges
    ]
    for defect in model.defects:
        for c in defect.couplings:
            terms.append(HamiltonianTerm(
                "heisenberg", (LegLabel.wire(c.qubit), LegLabel.wire(defect.id, defect.dim)), c.g,
            ))
    return terms


def embed(matrix: np.ndarray, on_legs: tuple[LegLabel, ...], legs: tuple[LegLabel, ...]) -> np.ndarray:
    """Вложить локальную матрицу в полное пространство legs (тождество на остальных)."""
    rest = tuple(leg for leg in legs if leg not in on_legs)
    local = LabelledOperator(matrix, on_legs)
    full = tensor_product(local, LabelledOperator.identity(rest))
    return permute_legs(full, legs).data


def build_step_hamiltonian(model: DeviceModel) -> LabelledOperator:
    """H = Σ J·Z⊗Z по рёбрам crosstalk + Σ g·(XX+YY+ZZ) по связям с дефектами."""
    legs = system_legs(model)
    dim = 2 ** len(legs)
    h = np.zeros((dim, dim), dtype=complex)
    for term in hamiltonian_terms(model):
        h += embed(term.matrix, term.legs, legs)
    return LabelledOperator(h, legs, hermitian=True)


def exponentiate(hamiltonian: LabelledOperator, duration: float) -> LabelledOperator:
    """U = exp(−iHτ) через спектральное разложение H."""
    spectrum = spectral_decomposition(hamiltonian)
    u = spectrum.apply(lambda lam: np.exp(-1j * lam * duration))
    return LabelledOperator(u, hamiltonian.legs)


def build_step_unitary(model: DeviceModel, step: int = 1) -> LabelledOperator:
    """Унитарный оператор шага step (1..k) длительности model.duration(step)."""
    return exponentiate(build_step_hamiltonian(model), model.duration(step))


def step_unitaries(model: DeviceModel) -> list[LabelledOperator]:
    """U_1 … U_k; гамильтониан диагонализуется один раз."""
    hamiltonian = build_step_hamiltonian(model)
    spectrum = spectral_decomposition(hamiltonian)
    result = []
    for step in range(1, model.num_steps + 1):
        tau = model.duration(step)
        u = spectrum.apply(lambda lam, tau=tau: np.exp(-1j * lam * tau))
        result.append(LabelledOperator(u, hamiltonian.legs))
    logger.debug(
        "Построены %d шаговых унитарных операторов, размерность %d",
        len(result), hamiltonian.dim,
    )
    return result
