"""Оценка ожиданий по теням и физическая реконструкция процесса."""

from src.estimation.budget import (
    EstimationPlan,
    count_causality_fixed,
    count_free,
    num_batches,
    required_shots,
)
from src.estimation.causality import causal_projection, causality_fixed_value, free_observables
from src.estimation.median_of_means import ShotShortfallError, estimate_observables, estimate_table
from src.estimation.mle import MleOptions, NonConvergenceError, PhysicalEstimate, mle_reconstruct
from src.estimation.observables import PauliObservable
from src.estimation.tables import ExpectationTable, read_table, write_table

__all__ = [
    "EstimationPlan",
    "ExpectationTable",
    "MleOptions",
    "NonConvergenceError",
    "PauliObservable",
    "PhysicalEstimate",
    "ShotShortfallError",
    "causal_projection",
    "causality_fixed_value",
    "count_causality_fixed",
    "count_free",
    "estimate_observables",
    "estimate_table",
    "free_observables",
    "mle_reconstruct",
    "num_batches",
    "read_table",
    "required_shots",
    "write_table",
]
