from __future__ import annotations

import numpy as np
import pytest

from src.tensor import (
    LabelledOperator,
    LegError,
    LegLabel,
    apply_local,
    partial_trace,
    permute_legs,
    relabel_legs,
    tensor_product,
)
from src.tensor.legs import Direction, canonical_order
from src.tensor.operator import max_abs_diff, tensor_all
from src.tensor.pauli import (
    from_pauli_coefficients,
    letters_to_indices,
    pauli_coefficients,
    pauli_matrix,
)
from tests.conftest import random_density

A, B, C = LegLabel.out(1, 0), LegLabel.inp(1, 1), LegLabel.out(2, 1)


def _op(rng, legs):
    dim = 2 ** len(legs)
    return LabelledOperator(random_density(rng, dim), legs, hermitian=True)


def test_leg_label_text_round_trip():
    leg = LegLabel.inp(3, 2)
    assert str(leg) == "q3:i2"
    assert LegLabel.parse("q3:i2") == leg
    assert str(LegLabel.wire(7)) == "q7"
    with pytest.raises(ValueError):
        LegLabel.parse("q3-i2")


def test_canonical_order_is_late_to_early_per_qubit():
    legs = [LegLabel.out(1, 0), LegLabel.inp(2, 1), LegLabel.out(1, 1), LegLabel.inp(1, 1), LegLabel.out(2, 1)]
    ordered = canonical_order(legs)
    assert [str(x) for x in ordered] == ["q1:o1", "q1:i1", "q1:o0", "q2:o1", "q2:i1"]
    # порядок кубитов задаёт регистр
    assert canonical_order(legs, [2, 1])[0] == LegLabel.out(2, 1)


def test_operator_rejects_bad_shapes_and_duplicate_legs():
    with pytest.raises(LegError):
        LabelledOperator(np.eye(4), (A, A))
    with pytest.raises(LegError):
        LabelledOperator(np.eye(2), (A, B))
    with pytest.raises(LegError):
        LabelledOperator(np.array([[0, 1], [0, 0]]), (A,), hermitian=True)


def test_partial_trace_of_product(rng):
    a, b = _op(rng, (A,)), _op(rng, (B, C))
    ab = tensor_product(a, b)
    assert max_abs_diff(partial_trace(ab, {B, C}), a) < 1e-12
    assert max_abs_diff(partial_trace(ab, {A}), b) < 1e-12
    with pytest.raises(LegError):
        partial_trace(ab, {LegLabel.out(9, 0)})


def test_permute_matches_kron_order(rng):
    a, b = _op(rng, (A,)), _op(rng, (B,))
    swapped = permute_legs(tensor_product(a, b), (B, A))
    assert np.allclose(swapped.data, np.kron(b.data, a.data))
    with pytest.raises(LegError):
        permute_legs(swapped, (A,))


def test_apply_local_equals_embedded_conjugation(rng):
    op = _op(rng, (A, B, C))
    u = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))[0]
    full = np.kron(np.kron(np.eye(2), u), np.eye(2))
    result = apply_local(op, u, (B,))
    assert np.allclose(result.data, full @ op.data @ full.conj().T)
    assert result.legs == op.legs


def test_relabel_keeps_data_and_checks_dims(rng):
    op = _op(rng, (A,))
    moved = relabel_legs(op, {A: B})
    assert moved.legs == (B,)
    assert np.array_equal(moved.data, op.data)
    with pytest.raises(LegError):
        relabel_legs(op, {A: LegLabel(1, 0, Direction.out, 3)})


def test_tensor_all_and_normalisation(rng):
    ops = [_op(rng, (leg,)).scaled(2.0) for leg in (A, B, C)]
    product = tensor_all(ops)
    assert product.legs == (A, B, C)
    assert product.real_trace() == pytest.approx(8.0)
    assert product.normalized().real_trace() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        LabelledOperator(np.zeros((2, 2)), (A,)).normalized()


def test_pauli_coefficients_invert(rng):
    op = _op(rng, (A, B, C))
    coeffs = pauli_coefficients(op)
    assert coeffs.shape == (4, 4, 4)
    assert coeffs[0, 0, 0] == pytest.approx(1.0)
    back = from_pauli_coefficients(coeffs, op.legs)
    assert max_abs_diff(back, op) < 1e-12


def test_pauli_coefficient_of_string():
    zz = LabelledOperator(pauli_matrix("ZZ"), (A, B), hermitian=True)
    coeffs = pauli_coefficients(zz)
    assert coeffs[letters_to_indices("ZZ")] == pytest.approx(4.0)
    assert np.count_nonzero(np.abs(coeffs) > 1e-12) == 1
    with pytest.raises(ValueError):
        letters_to_indices("XQ")


def test_tensor_product_of_basis_projectors():
    zero = LabelledOperator(np.diag([1.0, 0.0]), (A,), hermitian=True)
    one = LabelledOperator(np.diag([0.0, 1.0]), (B,), hermitian=True)
    assert np.allclose(tensor_product(zero, one).data, np.diag([0.0, 1.0, 0.0, 0.0]))


def test_tensor_product_matches_index_loop(rng):
    a, b = _op(rng, (A,)), _op(rng, (B, C))
    product = tensor_product(a, b).data
    for i in range(2):
        for k in range(2):
            for j in range(4):
                for m in range(4):
                    assert product[i * 4 + j, k * 4 + m] == pytest.approx(a.data[i, k] * b.data[j, m])


def test_partial_trace_matches_index_sum(rng):
    op = _op(rng, (A, B, C))
    tensor = op.data.reshape(2, 2, 2, 2, 2, 2)
    expected = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for c in range(2):
            for a2 in range(2):
                for c2 in range(2):
                    expected[a * 2 + c, a2 * 2 + c2] = sum(tensor[a, b, c, a2, b, c2] for b in range(2))
    reduced = partial_trace(op, {B})
    assert reduced.legs == (A, C)
    assert np.allclose(reduced.data, expected)


def test_half_of_a_bell_pair_is_maximally_mixed():
    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    bell = LabelledOperator(np.outer(phi, phi.conj()), (A, B), hermitian=True)
    assert np.allclose(partial_trace(bell, {B}).data, np.eye(2) / 2)
    assert np.allclose(partial_trace(bell, {A}).data, np.eye(2) / 2)


def test_permute_round_trip_keeps_the_spectrum(rng):
    op = _op(rng, (A, B, C))
    moved = permute_legs(op, (C, A, B))
    assert max_abs_diff(permute_legs(moved, (A, B, C)), op) == 0.0
    assert np.allclose(np.linalg.eigvalsh(moved.data), np.linalg.eigvalsh(op.data))


def test_leg_operations_preserve_positivity(rng):
    for _ in range(100):
        op = tensor_product(_op(rng, (A, B)), _op(rng, (C,)))
        for result in (op, partial_trace(op, {B}), permute_legs(op, (C, B, A))):
            assert np.linalg.eigvalsh(result.data).min() >= -1e-12
