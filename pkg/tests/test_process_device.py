from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from src.process.device import (
    CrosstalkEdge,
    Defect,
    DefectCoupling,
    DeviceModel,
    ModelError,
    Qubit,
    basis_state,
    grid_register,
    nearest_neighbour_pairs,
    random_crosstalk,
    random_crosstalk_model,
)
from src.process.dynamics import (
    build_step_hamiltonian,
    build_step_unitary,
    hamiltonian_terms,
    step_unitaries,
    system_legs,
)
from src.process.marginals import Background, MarginalSpec, StepStructureError, step_blocks
from src.shadow.clifford import normalize_phase
from src.tensor import LegLabel
from tests.conftest import FULL_SWAP_G, make_model


def test_grid_register_layout():
    register = grid_register(2, 3)
    assert [q.id for q in register] == [1, 2, 3, 4, 5, 6]
    assert register[4] == Qubit(5, 1, 1)
    assert len(nearest_neighbour_pairs(register)) == 7


def test_random_crosstalk_respects_range(rng):
    edges = random_crosstalk(grid_register(2, 2), rng, (0.3, 0.4))
    assert len(edges) == 4
    assert all(0.3 <= e.j <= 0.4 for e in edges)
    sparse = random_crosstalk(grid_register(3, 3), rng, edge_probability=0.0)
    assert sparse == ()


def test_random_crosstalk_model_has_no_defects(rng):
    model = random_crosstalk_model(2, 2, rng)
    assert model.defects == ()
    assert model.nearest_neighbour


@pytest.mark.parametrize(
    "kwargs",
    [
        {"register": (Qubit(1, 0, 0), Qubit(1, 1, 0))},
        {"crosstalk_edges": (CrosstalkEdge(1, 1, 0.5),)},
        {"crosstalk_edges": (CrosstalkEdge(1, 9, 0.5),)},
        {"crosstalk_edges": (CrosstalkEdge(1, 2, 0.5), CrosstalkEdge(2, 1, 0.1))},
        {"defects": (Defect(2, (DefectCoupling(1, 0.5),)),)},
        {"defects": (Defect(101, (DefectCoupling(9, 0.5),)),)},
        {"defects": (Defect(101, (), np.eye(2)),)},
        {"num_steps": 0},
        {"step_durations": (1.0,)},
        {"step_durations": (1.0, 0.0)},
        {"step_durations": (-1.0, 1.0)},
    ],
)
def test_invalid_models_are_rejected(kwargs):
    base = {"register": grid_register(1, 2)}
    with pytest.raises(ModelError):
        DeviceModel(**{**base, **kwargs})


def test_nearest_neighbour_constraint():
    register = grid_register(2, 2)
    with pytest.raises(ModelError):
        DeviceModel(register, (CrosstalkEdge(1, 4, 0.5),), nearest_neighbour=True)
    DeviceModel(register, (CrosstalkEdge(1, 2, 0.5),), nearest_neighbour=True)


def test_unknown_initial_state_name():
    with pytest.raises(ModelError):
        basis_state("minus")


def test_decoupled_and_relabelled():
    model = make_model(1, 2, edges=((1, 2, 0.5),), defects={101: {1: 0.7, 2: 0.3}})
    decoupled = model.decoupled(1)
    assert [c.g for c in decoupled.defects[0].couplings] == [0.0, 0.3]
    swapped = model.relabelled({1: 2, 2: 1})
    assert swapped.qubit_ids == [2, 1]
    assert swapped.crosstalk_edges[0] == CrosstalkEdge(2, 1, 0.5)
    assert swapped.without_defects().defects == ()


def test_step_unitaries_are_unitary(chain_model):
    for u in step_unitaries(chain_model):
        assert np.allclose(u.data @ u.data.conj().T, np.eye(u.dim), atol=1e-12)
    assert system_legs(chain_model)[-1] == LegLabel.wire(101)
    kinds = sorted(t.kind for t in hamiltonian_terms(chain_model))
    assert kinds == ["heisenberg", "zz"]


def test_full_swap_coupling_is_swap(swap_model):
    u = build_step_unitary(swap_model).data
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(normalize_phase(u), swap, atol=1e-12)


def test_step_durations_change_unitaries():
    model = make_model(defects={101: {1: 0.5}})
    longer = replace(model, step_durations=(1.0, 2.0))
    first, second = step_unitaries(longer)
    assert np.allclose(first.data, build_step_unitary(model).data)
    assert not np.allclose(second.data, first.data)
    assert longer.duration(2) == 2.0
    assert math.isclose(model.duration(2), 1.0)


def test_marginal_spec_structure():
    spec = MarginalSpec.single_qubit(3, 2)
    assert [str(x) for x in spec.legs()] == ["q3:o2", "q3:i2", "q3:o1", "q3:i1", "q3:o0"]
    assert spec.num_inputs == 2
    assert spec.slug() == "q3o2_q3i2_q3o1_q3i1_q3o0"
    blocks = step_blocks(spec.legs())
    assert [len(b) for b in blocks] == [2, 2, 1]
    assert spec.with_background(Background.idle).background is Background.idle


def test_common_cause_and_spatial_specs():
    spec = MarginalSpec.common_cause(early=1, late=2)
    assert [str(x) for x in spec.legs()] == ["q1:o1", "q1:i1", "q1:o0", "q2:o2", "q2:i2"]
    assert spec.num_inputs == 2
    assert MarginalSpec.spatial(1, 2, 1, 2).qubits == [1, 2]
    with pytest.raises(StepStructureError):
        MarginalSpec.common_cause(1, 1)


def test_incomplete_steps_are_rejected():
    with pytest.raises(StepStructureError):
        MarginalSpec(frozenset({LegLabel.out(1, 1)}), 2)
    with pytest.raises(StepStructureError):
        MarginalSpec(frozenset({LegLabel.inp(1, 0)}), 2)
    with pytest.raises(StepStructureError):
        MarginalSpec(frozenset(MarginalSpec.single_qubit(1, 3).retained), 2)
    with pytest.raises(StepStructureError):
        MarginalSpec(frozenset(), 2)


def test_hamiltonian_without_couplings_is_zero():
    model = make_model(1, 3)
    assert hamiltonian_terms(model) == []
    assert not build_step_hamiltonian(model).data.any()
    assert np.allclose(build_step_unitary(model).data, np.eye(8))


def test_zz_hamiltonian_spectrum_and_unitary():
    j = 0.37
    model = make_model(1, 2, edges=((1, 2, j),))
    h = build_step_hamiltonian(model)
    assert np.allclose(np.sort(np.linalg.eigvalsh(h.data)), [-j, -j, j, j])
    phases = np.exp(-1j * j * np.array([1, -1, -1, 1]))
    assert np.allclose(build_step_unitary(model).data, np.diag(phases), atol=1e-12)


def test_one_term_per_edge_and_coupling():
    model = make_model(2, 2, edges=((1, 2, 0.3), (3, 4, 0.5)), defects={101: {1: 0.6, 4: 0.9}, 102: {2: 0.7}})
    terms = hamiltonian_terms(model)
    assert len(terms) == 2 + 3
    assert sorted(t.kind for t in terms).count("heisenberg") == 3
