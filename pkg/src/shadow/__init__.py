"""Протокол пространственно-временных классических теней."""

from src.shadow.clifford import CLIFFORD_TABLE, HADAMARD, HADAMARD_INDEX, NUM_CLIFFORDS, index_of
from src.shadow.instruments import CliffordInstrument, invert_measurement, invert_preparation
from src.shadow.records import ShadowBatch, ShadowRecord
from src.shadow.sampler import sample_shot, sample_shots
from src.shadow.snapshot import mean_snapshot, shot_pauli_values, snapshot
from src.shadow.storage import ShotFileError, ShotWriter, read_header, read_shots, write_shots

__all__ = [
    "CLIFFORD_TABLE",
    "HADAMARD",
    "HADAMARD_INDEX",
    "NUM_CLIFFORDS",
    "CliffordInstrument",
    "ShadowBatch",
    "ShadowRecord",
    "ShotFileError",
    "ShotWriter",
    "index_of",
    "invert_measurement",
    "invert_preparation",
    "mean_snapshot",
    "read_header",
    "read_shots",
    "sample_shot",
    "sample_shots",
    "shot_pauli_values",
    "snapshot",
    "write_shots",
]
