from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from src.analysis.maps import (
    common_cause_matrix,
    filtered_qmi_map,
    naive_qmi_map,
    spatial_qmi_matrix,
    standard_errors,
)
from src.analysis.measures import mutual_information, qmi, qubit_blocks
from src.analysis.sources import ExactSource, ShadowSource
from src.process.choi import bell_pair
from src.process.device import random_crosstalk_model
from src.process.marginals import Background, MarginalSpec
from src.shadow.sampler import sample_shots
from src.tensor import LabelledOperator, LegLabel, tensor_product
from src.tensor.operator import permute_legs, tensor_all
from tests.conftest import make_model

NULL_TOL = 1e-8


def test_maximally_correlated_blocks_carry_four_bits():
    o2, i2, o1, i1 = (LegLabel.out(1, 2), LegLabel.inp(1, 2), LegLabel.out(1, 1), LegLabel.inp(1, 1))
    # блок {o₂, i₂} максимально запутан с блоком {o₁, i₁}
    pairs = tensor_product(bell_pair(o2, o1), bell_pair(i2, i1))
    zero = LabelledOperator(np.diag([1.0, 0.0]), (LegLabel.out(1, 0),), hermitian=True)
    choi = permute_legs(tensor_product(pairs, zero), (o2, i2, o1, i1, LegLabel.out(1, 0)))
    assert qmi(choi) == pytest.approx(4.0, abs=1e-9)


def test_product_process_has_no_memory(rng):
    legs = MarginalSpec.single_qubit(1, 2).legs()
    blocks = [
        LabelledOperator(np.eye(4) / 2, legs[0:2], hermitian=True),
        LabelledOperator(np.eye(4) / 2, legs[2:4], hermitian=True),
        LabelledOperator(np.diag([0.3, 0.7]), legs[4:], hermitian=True),
    ]
    assert qmi(tensor_all(blocks)) == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(tensor_all(blocks), [legs]) == 0.0


def test_full_swap_memory_is_two_bits(swap_model):
    assert filtered_qmi_map(swap_model)[1] == pytest.approx(2.0, abs=1e-8)
    plus = make_model(defects={101: {1: np.pi / 4}}, register_init="plus")
    assert filtered_qmi_map(plus)[1] == pytest.approx(2.0, abs=1e-8)


def test_crosstalk_is_filtered_but_bath_is_not(chain_model):
    filtered = filtered_qmi_map(chain_model)
    naive = naive_qmi_map(chain_model)
    assert filtered[2] > 0.02
    for q in (1, 3, 4):
        assert filtered[q] <= NULL_TOL
    assert naive[3] > 0.02 and naive[4] > 0.02
    assert naive[1] <= NULL_TOL
    # у q2 нет соседей по crosstalk: фон не меняет его маргинал
    assert naive[2] == pytest.approx(filtered[2], abs=1e-8)


def test_decoupling_the_bath_removes_the_signal(chain_model):
    assert filtered_qmi_map(chain_model.decoupled(2))[2] <= NULL_TOL


def test_relabelling_permutes_the_map(chain_model):
    mapping = {1: 4, 2: 3, 3: 2, 4: 1}
    original = filtered_qmi_map(chain_model)
    relabelled = filtered_qmi_map(chain_model.relabelled(mapping))
    for old, new in mapping.items():
        assert relabelled[new] == pytest.approx(original[old], abs=1e-10)


CROSSTALK_SHAPES = ((1, 3), (1, 4), (1, 5), (2, 2))


def _check_causal_break(model) -> None:
    filtered = filtered_qmi_map(model)
    naive = naive_qmi_map(model)
    coupled = {q for edge in model.crosstalk_edges for q in (edge.a, edge.b)}
    assert coupled
    for q in model.qubit_ids:
        assert filtered[q] <= NULL_TOL
        if q in coupled:
            assert naive[q] > 0.01


@pytest.mark.parametrize(("rows", "cols"), CROSSTALK_SHAPES)
def test_causal_break_on_random_crosstalk_models(rng, rows, cols):
    _check_causal_break(random_crosstalk_model(rows, cols, rng))


@pytest.mark.slow
def test_causal_break_on_many_random_crosstalk_models():
    rng = np.random.default_rng(2024)
    for n in range(100):
        rows, cols = CROSSTALK_SHAPES[n % len(CROSSTALK_SHAPES)]
        _check_causal_break(random_crosstalk_model(rows, cols, rng))


def test_naive_and_filtered_are_not_ordered_on_bath_qubits():
    gaps = []
    for j in (0.3, 0.5, 0.7, np.pi / 4, 0.9, 1.1):
        model = make_model(1, 2, edges=((1, 2, j),), defects={101: {1: np.pi / 4}}, register_init="plus")
        gaps.append(naive_qmi_map(model)[1] - filtered_qmi_map(model)[1])
    # соседний кубит в покое копит фазу за оба шага и сильнее дефазирует память дефекта
    assert min(gaps) < -1e-3
    no_bath = make_model(1, 2, edges=((1, 2, np.pi / 4),), register_init="plus")
    assert naive_qmi_map(no_bath)[1] - filtered_qmi_map(no_bath)[1] > 0.01


def test_common_cause_singles_out_the_shared_bath(grid_model):
    matrix = common_cause_matrix(grid_model)
    assert matrix[0, 1] > 0.02 and matrix[1, 0] > 0.02
    off = ~np.eye(4, dtype=bool)
    off[0, 1] = off[1, 0] = False
    assert np.all(matrix[off] <= NULL_TOL)
    assert matrix[3, 3] <= NULL_TOL
    assert np.all(matrix >= -1e-12)


def test_grid_crosstalk_changes_only_its_pair(grid_model):
    bare = replace(grid_model, crosstalk_edges=())
    naive, naive_bare = naive_qmi_map(grid_model), naive_qmi_map(bare)
    assert abs(naive[1] - naive_bare[1]) > 1e-3
    assert abs(naive[2] - naive_bare[2]) > 1e-3
    filtered, filtered_bare = filtered_qmi_map(grid_model), filtered_qmi_map(bare)
    for q in (3, 4):
        assert naive[q] == pytest.approx(naive_bare[q], abs=NULL_TOL)
        assert filtered[q] == pytest.approx(filtered_bare[q], abs=NULL_TOL)
    assert filtered[4] <= NULL_TOL


def test_direct_crosstalk_is_not_a_common_cause():
    model = make_model(1, 3, edges=((1, 2, 0.8), (2, 3, 0.5)), register_init="plus")
    matrix = common_cause_matrix(model)
    assert np.all(np.abs(matrix) <= NULL_TOL)


def test_symmetric_shared_bath_gives_a_symmetric_matrix():
    model = make_model(1, 2, defects={101: {1: 0.6, 2: 0.6}}, register_init="plus")
    matrix = common_cause_matrix(model)
    assert matrix[0, 1] > 0.02
    assert matrix[0, 1] == pytest.approx(matrix[1, 0], abs=1e-9)
    assert matrix[0, 0] == pytest.approx(matrix[1, 1], abs=1e-9)


def test_common_cause_requires_two_steps():
    with pytest.raises(ValueError):
        common_cause_matrix(make_model(1, 2, num_steps=1))


def test_spatial_map_is_symmetric():
    model = make_model(1, 3, edges=((1, 2, 0.8),), register_init="plus")
    matrix = spatial_qmi_matrix(model)
    assert np.allclose(matrix, matrix.T)
    assert matrix[0, 1] > 0.02
    assert matrix[0, 2] <= NULL_TOL and matrix[1, 2] <= NULL_TOL
    assert np.all(np.diag(matrix) == 0)


def test_qubit_blocks_split_by_group(chain_model):
    choi = ExactSource(chain_model).process(MarginalSpec.common_cause(1, 2))
    blocks = qubit_blocks(choi, [[1], [2]])
    assert [len(b) for b in blocks] == [3, 2]


def test_naive_map_needs_the_exact_path(chain_model):
    batch = sample_shots(chain_model, 0, 64, master_seed=1)
    with pytest.raises(TypeError):
        naive_qmi_map(batch)
    with pytest.raises(ValueError):
        ShadowSource(batch).process(MarginalSpec.single_qubit(1, 2, Background.idle))


def test_standard_errors_of_replicates():
    errors = standard_errors([{1: 0.1, 2: 0.0}, {1: 0.3, 2: 0.0}])
    assert errors[1] == pytest.approx(np.std([0.1, 0.3], ddof=1))
    assert errors[2] == 0.0
    assert standard_errors([np.zeros((2, 2)), np.ones((2, 2))]).shape == (2, 2)
    with pytest.raises(ValueError):
        standard_errors([{1: 0.1}])
