"""Спектральные операции: разложение, энтропии, проекция на PSD-конус.

Логарифм везде по основанию 2: энтропии и QMI в битах.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from src.tensor.operator import LabelledOperator, LegError, permute_legs

logger = logging.getLogger(__name__)

# Собственные значения ρ ниже порога не дают вклада в Tr ρ log ρ
ZERO_EIGENVALUE = 1e-12
# Масса ρ на ядре σ выше порога: нарушение носителя
SUPPORT_MASS_TOL = 1e-9
HERMITIAN_CHECK_TOL = 1e-10


class SupportError(ValueError):
    """supp(ρ) ⊄ supp(σ): относительная энтропия бесконечна."""

    def __init__(self, mass: float, smallest: float) -> None:
        super().__init__(
            f"Носитель ρ выходит за носитель σ: масса {mass:.3e} "
            f"на собственных векторах σ с λ < {ZERO_EIGENVALUE:g} (минимальное λ = {smallest:.3e})"
        )
        self.mass = mass
        self.smallest = smallest


class NotHermitianError(ValueError):
    """Операция определена только для эрмитовых операторов."""


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply(self, fn) -> np.ndarray:
        """f(A) = V f(Λ) V†."""
        v = self.eigenvectors
        return (v * fn(self.eigenvalues)) @ v.conj().T


def _check_hermitian(data: np.ndarray, what: str = "Оператор") -> None:
    if data.size == 0:
        return
    deviation = float(np.max(np.abs(data - data.conj().T)))
    scale = max(1.0, float(np.max(np.abs(data))))
    if deviation > HERMITIAN_CHECK_TOL * scale:
        raise NotHermitianError(f"{what} не эрмитов: ‖A − A†‖_max = {deviation:.3e}")


def spectral_decomposition(a: LabelledOperator | np.ndarray) -> SpectralDecomposition:
    """Разложение эрмитова оператора A = VΛV† (собственные значения по возрастанию)."""
    data = a.data if isinstance(a, LabelledOperator) else np.asarray(a, dtype=complex)
    _check_hermitian(data)
    hermitian = (data + data.conj().T) / 2
    eigenvalues, eigenvectors = scipy.linalg.eigh(hermitian)
    return SpectralDecomposition(eigenvalues, eigenvectors)


def von_neumann_entropy(rho: LabelledOperator) -> float:
    """S(ρ) = −Tr ρ log₂ ρ в битах (ρ уже нормирован вызывающим)."""
    lam = spectral_decomposition(rho).eigenvalues
    lam = lam[lam > ZERO_EIGENVALUE]
    return float(-np.sum(lam * np.log2(lam)))


def relative_entropy(rho: LabelledOperator, sigma: LabelledOperator) -> float:
    """S[ρ‖σ] = Tr ρ (log₂ ρ − log₂ σ) в битах.

    Собственные значения ρ ниже 1e-12 не дают вклада; спектр σ ограничен
    снизу 1e-12, если ρ не имеет массы выше 1e-9 на ядре σ, иначе SupportError.
    """
    if set(rho.legs) != set(sigma.legs):
        raise LegError("Относительная энтропия требует одинаковых ног у ρ и σ")
    sigma = permute_legs(sigma, rho.legs)
    tr_rho, tr_sigma = rho.real_trace(), sigma.real_trace()
    if abs(tr_rho - tr_sigma) > 1e-9 * max(1.0, abs(tr_rho)):
        raise ValueError(f"Разная нормировка следа: Tr ρ = {tr_rho:.12g}, Tr σ = {tr_sigma:.12g}")

    rho_spec = spectral_decomposition(rho)
    sigma_spec = spectral_decomposition(sigma)

    lam = rho_spec.eigenvalues
    positive = lam > ZERO_EIGENVALUE
    self_term = float(np.sum(lam[positive] * np.log2(lam[positive])))

    mu = sigma_spec.eigenvalues
    v = sigma_spec.eigenvectors
    # ⟨v_j|ρ|v_j⟩: вес ρ на каждом собственном векторе σ
    weights = np.real(np.einsum("ij,ik,kj->j", v.conj(), rho.data, v))
    null = mu < ZERO_EIGENVALUE
    null_mass = float(np.sum(weights[null])) if np.any(null) else 0.0
    if null_mass > SUPPORT_MASS_TOL:
        raise SupportError(null_mass, float(mu.min()))
    cross_term = float(np.sum(weights * np.log2(np.maximum(mu, ZERO_EIGENVALUE))))
    return self_term - cross_term


def project_psd(a: LabelledOperator) -> LabelledOperator:
    """Ближайший по Фробениусу PSD-оператор: отрицательные λ обнуляются."""
    _check_hermitian(a.data, "Вход project_psd")
    spectrum = spectral_decomposition(a)
    clipped = spectrum.apply(lambda lam: np.maximum(lam, 0.0))
    return LabelledOperator((clipped + clipped.conj().T) / 2, a.legs, True)


def min_eigenvalue(a: LabelledOperator) -> float:
    return float(spectral_decomposition(a).eigenvalues[0])


def trace_distance(a: LabelledOperator, b: LabelledOperator) -> float:
    """½‖A − B‖₁ для эрмитовых операторов."""
    b = permute_legs(b, a.legs)
    lam = spectral_decomposition(a.data - b.data).eigenvalues
    return float(np.sum(np.abs(lam)) / 2)
