from __future__ import annotations

import numpy as np
import pytest

from src.estimation.budget import EstimationPlan
from src.estimation.causality import free_observables
from src.estimation.median_of_means import (
    ShotShortfallError,
    batch_means,
    estimate_observables,
    estimate_table,
    median_of_means,
)
from src.estimation.mle import MleOptions, mle_reconstruct, polish, project_physical
from src.estimation.observables import PauliObservable
from src.estimation.tables import ExpectationTable, read_table, write_table
from src.process.choi import bell_pair, exact_process_choi
from src.process.marginals import MarginalSpec
from src.settings import MleConfig
from src.shadow.sampler import sample_shots
from src.shadow.snapshot import snapshot
from src.tensor import LabelledOperator, permute_legs
from src.tensor.operator import max_abs_diff, tensor_all
from src.tensor.spectral import min_eigenvalue
from tests.conftest import make_model


def _exact_expectations(choi: LabelledOperator) -> dict[PauliObservable, float]:
    return {obs: obs.expectation(choi) for obs in free_observables(choi.legs)}


def test_median_of_means_ignores_outlier_batches():
    means = np.array([[1.0, 5.0], [100.0, 6.0], [2.0, -50.0]])
    assert median_of_means(means).tolist() == [2.0, 5.0]


def test_fast_and_generic_paths_agree(chain_model):
    batch = sample_shots(chain_model, 0, 90, master_seed=3)
    spec = MarginalSpec.single_qubit(2, 2)
    legs = spec.legs(batch.qubits)
    plan = EstimationPlan.for_shots(free_observables(legs)[:40], 90, batches=5)
    snapshots = (snapshot(batch.record(i), spec) for i in range(len(batch)))
    generic = estimate_observables(snapshots, plan)
    table = estimate_table(batch, plan)
    for obs in plan.observables:
        assert table.get(obs.letters) == pytest.approx(generic[obs], abs=1e-9)
    assert batch_means(batch, plan).shape == (5, 40)


def test_shortfall_is_reported(chain_model):
    batch = sample_shots(chain_model, 0, 20, master_seed=3)
    legs = MarginalSpec.single_qubit(1, 2).legs(batch.qubits)
    plan = EstimationPlan(tuple(free_observables(legs)[:3]), 3, 10, 0.1)
    with pytest.raises(ShotShortfallError) as info:
        estimate_table(batch, plan)
    assert (info.value.needed, info.value.available) == (30, 20)
    spec = MarginalSpec.single_qubit(1, 2)
    with pytest.raises(ShotShortfallError):
        estimate_observables((snapshot(batch.record(i), spec) for i in range(20)), plan)


def test_table_text_format(tmp_path):
    legs = tuple(MarginalSpec.single_qubit(4, 1).legs())
    table = ExpectationTable(legs, ("XII", "ZZY"), np.array([0.125, -1 / 3]), 7, 700)
    path = tmp_path / "tables" / "q4.tsv"
    write_table(path, table)
    text = path.read_text(encoding="utf-8").splitlines()
    assert text[0] == "# legs=q4:o1,q4:i1,q4:o0\tshots=700"
    loaded = read_table(path)
    assert loaded.legs == legs
    assert loaded.get("ZZY") == pytest.approx(-1 / 3, abs=1e-14)
    assert (loaded.num_batches, loaded.shots) == (7, 700)


def test_exact_expectations_reconstruct_the_process(chain_model):
    choi = exact_process_choi(chain_model, MarginalSpec.single_qubit(2, 2))
    estimate = mle_reconstruct(_exact_expectations(choi))
    assert estimate.converged
    assert max_abs_diff(estimate.choi, choi) <= 1e-6
    assert estimate.objective <= 1e-10


def test_noisy_expectations_give_physical_processes(swap_model):
    choi = exact_process_choi(swap_model, MarginalSpec.single_qubit(1, 2))
    exact = _exact_expectations(choi)
    for seed in range(20):
        rng = np.random.default_rng(seed)
        noisy = {obs: v + rng.normal(0, 0.05) for obs, v in exact.items()}
        estimate = mle_reconstruct(noisy)
        assert estimate.converged
        assert estimate.psd_residual <= 1e-9
        assert estimate.causality_residual <= 1e-8
        assert estimate.choi.real_trace() == pytest.approx(4.0)
        assert estimate.objective_history[-1] <= estimate.objective_history[0]


def test_string_keys_need_legs(swap_model):
    choi = exact_process_choi(swap_model, MarginalSpec.single_qubit(1, 2))
    by_letters = {obs.letters: v for obs, v in _exact_expectations(choi).items()}
    with pytest.raises(ValueError):
        mle_reconstruct(by_letters)
    estimate = mle_reconstruct(by_letters, legs=choi.legs)
    assert max_abs_diff(estimate.choi, choi) <= 1e-6


def test_single_iteration_budget_reports_non_convergence(swap_model):
    choi = exact_process_choi(swap_model, MarginalSpec.single_qubit(1, 2))
    rng = np.random.default_rng(0)
    noisy = {obs: v + rng.normal(0, 0.05) for obs, v in _exact_expectations(choi).items()}
    estimate = mle_reconstruct(noisy, options=MleOptions(max_iters=1))
    assert not estimate.converged
    assert estimate.iterations == 1


def test_identity_process_is_recovered():
    model = make_model(num_steps=2)
    choi = exact_process_choi(model, MarginalSpec.single_qubit(1, 2))
    o2, i2, o1, i1, o0 = choi.legs
    zero = LabelledOperator(np.diag([1.0, 0.0]).astype(complex), (o0,), hermitian=True)
    expected = tensor_all((bell_pair(o2, i2), bell_pair(o1, i1), zero))
    estimate = mle_reconstruct(_exact_expectations(choi))
    assert estimate.converged
    assert max_abs_diff(estimate.choi, permute_legs(expected, choi.legs)) <= 1e-6


def test_reconstruction_is_idempotent(swap_model):
    choi = exact_process_choi(swap_model, MarginalSpec.single_qubit(1, 2))
    rng = np.random.default_rng(11)
    noisy = {obs: v + rng.normal(0, 0.05) for obs, v in _exact_expectations(choi).items()}
    first = mle_reconstruct(noisy).choi
    again = mle_reconstruct(_exact_expectations(first))
    assert max_abs_diff(again.choi, first) <= 1e-8


def test_objective_never_increases_between_iterations(swap_model):
    choi = exact_process_choi(swap_model, MarginalSpec.single_qubit(1, 2))
    exact = _exact_expectations(choi)
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        noisy = {obs: v + rng.normal(0, 0.1) for obs, v in exact.items()}
        history = np.array(mle_reconstruct(noisy).objective_history)
        assert len(history) >= 2
        assert np.all(np.diff(history) <= 0)


def test_shadow_norm_weighting_is_the_default(swap_model):
    assert MleOptions().weighting == "shadow_norm"
    assert MleConfig().weighting == "shadow_norm"
    choi = exact_process_choi(swap_model, MarginalSpec.single_qubit(1, 2))
    rng = np.random.default_rng(3)
    noisy = {obs: v + rng.normal(0, 0.05) for obs, v in _exact_expectations(choi).items()}
    weighted = mle_reconstruct(noisy)
    uniform = mle_reconstruct(noisy, options=MleOptions(weighting="uniform"))
    assert weighted.converged and uniform.converged
    assert uniform.psd_residual <= 1e-9
    assert max_abs_diff(weighted.choi, uniform.choi) > 1e-6


def test_physical_projection_and_polish():
    legs = tuple(MarginalSpec.single_qubit(1, 1).legs())
    # след 2, одно отрицательное собственное значение
    op = LabelledOperator(np.diag([1.5, 0.7, -0.2, 0.0, 0.0, 0.0, 0.0, 0.0]), legs, hermitian=True)
    physical = project_physical(op, MleOptions())
    assert min_eigenvalue(physical) >= -1e-12
    assert physical.real_trace() == pytest.approx(2.0)
    mixed = polish(op)
    assert min_eigenvalue(mixed) == pytest.approx(0.0, abs=1e-12)
    assert mixed.real_trace() == pytest.approx(2.0)


@pytest.mark.slow
def test_median_of_means_error_halves_with_four_times_the_shots():
    model = make_model(defects={101: {1: 0.6}}, num_steps=1, register_init="plus")
    spec = MarginalSpec.single_qubit(1, 1)
    exact = _exact_expectations(exact_process_choi(model, spec))
    observables = list(exact)
    truth = np.array([exact[o] for o in observables])

    def rms_error(shots: int) -> float:
        errors = []
        for seed in range(12):
            batch = sample_shots(model, 0, shots, master_seed=1000 + seed)
            plan = EstimationPlan.for_shots(observables, shots)
            table = estimate_table(batch, plan)
            errors.append(table.estimates - truth)
        return float(np.sqrt(np.mean(np.square(errors))))

    ratio = rms_error(20_000) / rms_error(80_000)
    assert 1.6 <= ratio <= 2.6
