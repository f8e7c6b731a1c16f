from __future__ import annotations

import numpy as np
import pytest

from src.shadow.clifford import (
    CLIFFORD_TABLE,
    HADAMARD,
    HADAMARD_INDEX,
    NUM_CLIFFORDS,
    compose,
    index_of,
)
from src.shadow.instruments import (
    DEFAULT_INSTRUMENT,
    MEAS_TABLE,
    PREP_TABLE,
    input_factor,
    invert_measurement,
    invert_preparation,
    measurement_effect,
    output_factor,
    prepared_state,
)
from src.tensor.pauli import PAULIS
from tests.conftest import random_density


def test_clifford_table_is_a_group():
    assert len(CLIFFORD_TABLE) == NUM_CLIFFORDS
    assert np.allclose(CLIFFORD_TABLE[0], np.eye(2))
    for u in CLIFFORD_TABLE:
        assert np.allclose(u @ u.conj().T, np.eye(2))
    products = {compose(a, b) for a in range(NUM_CLIFFORDS) for b in range(NUM_CLIFFORDS)}
    assert products == set(range(NUM_CLIFFORDS))
    assert index_of(HADAMARD) == HADAMARD_INDEX
    assert index_of(1j * HADAMARD) == HADAMARD_INDEX


def test_non_clifford_is_rejected():
    t_gate = np.diag([1, np.exp(1j * np.pi / 4)])
    with pytest.raises(ValueError):
        index_of(t_gate)


def test_cliffords_map_paulis_to_paulis():
    for u in CLIFFORD_TABLE:
        for p in PAULIS[1:]:
            image = u @ p @ u.conj().T
            overlaps = [abs(np.trace(q @ image)) / 2 for q in PAULIS[1:]]
            assert sorted(np.round(overlaps, 9)) == [0.0, 0.0, 1.0]


def test_measurement_inverse_is_unbiased(rng):
    for _ in range(5):
        rho = random_density(rng, 2)
        direct = np.zeros((2, 2), dtype=complex)
        transposed = np.zeros((2, 2), dtype=complex)
        for u in range(NUM_CLIFFORDS):
            for x in range(2):
                p = np.trace(measurement_effect(u, x) @ rho).real
                direct += p * output_factor(u, x)
                transposed += p * invert_measurement(u, x)
        assert np.allclose(direct / NUM_CLIFFORDS, rho)
        assert np.allclose(transposed / NUM_CLIFFORDS, rho.T)


def test_preparation_inverse_is_unbiased(rng):
    for _ in range(5):
        x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        half = sum(np.trace(x @ prepared_state(u)) * invert_preparation(u) for u in range(NUM_CLIFFORDS))
        assert np.allclose(half / NUM_CLIFFORDS, x / 2)
        full = sum(np.trace(x @ prepared_state(u).T) * input_factor(u) for u in range(NUM_CLIFFORDS))
        assert np.allclose(full / NUM_CLIFFORDS, x)


def test_inverse_factor_spectra():
    for u in range(NUM_CLIFFORDS):
        assert np.allclose(np.linalg.eigvalsh(invert_preparation(u)), [-1, 2])
        assert np.allclose(np.linalg.eigvalsh(invert_measurement(u, 1)), [-1, 2])
        assert np.trace(input_factor(u)).real == pytest.approx(2.0)


def test_outcome_one_has_probability_one_half_on_average():
    zero = np.diag([1.0, 0.0])
    p_one = np.mean([np.trace(measurement_effect(u, 1) @ zero).real for u in range(NUM_CLIFFORDS)])
    assert p_one == pytest.approx(0.5)


def test_pauli_tables():
    assert np.allclose(MEAS_TABLE[:, :, 0], 1.0)
    assert np.allclose(PREP_TABLE[:, 0], 2.0)
    # тождественный поворот: Z-компонента ±3
    assert MEAS_TABLE[0, 0, 3] == pytest.approx(3.0)
    assert MEAS_TABLE[0, 1, 3] == pytest.approx(-3.0)
    assert not MEAS_TABLE.flags.writeable


def test_instrument_draw_covers_range():
    indices = DEFAULT_INSTRUMENT.draw(np.array([0.0, 0.5, 0.999999999]))
    assert indices.tolist() == [0, 12, 23]
    assert DEFAULT_INSTRUMENT.size == NUM_CLIFFORDS
    rotations = DEFAULT_INSTRUMENT.measurement_rotations(np.array([HADAMARD_INDEX]))
    assert np.allclose(rotations[0], CLIFFORD_TABLE[HADAMARD_INDEX].conj().T)
