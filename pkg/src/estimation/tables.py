"""Таблица оценок ожиданий и её текстовый формат для аудита.

Формат (TSV, UTF-8):
    # legs=q1:o2,q1:i2,q1:o1,q1:i1,q1:o0	shots=123456
    observable	estimate	batches
    IIIIX	0.01234567890123	17
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.estimation.observables import PauliObservable
from src.tensor import LegLabel
from src.tensor.pauli import letters_to_indices

logger = logging.getLogger(__name__)

_COLUMNS = "observable\testimate\tbatches"


@dataclass(frozen=True)
class ExpectationTable:
    legs: tuple[LegLabel, ...]
    letters: tuple[str, ...]
    estimates: np.ndarray
    num_batches: int
    shots: int

    def __post_init__(self) -> None:
        if len(self.letters) != len(self.estimates):
            raise ValueError("Число строк и оценок не совпадает")

    def __len__(self) -> int:
        return len(self.letters)

    def as_mapping(self) -> dict[PauliObservable, float]:
        return {
            PauliObservable(s, self.legs): float(v) for s, v in zip(self.letters, self.estimates)
        }

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """(значения, маска наблюдённых) формы (4,)*L."""
        shape = (4,) * len(self.legs)
        values = np.zeros(shape)
        observed = np.zeros(shape, dtype=bool)
        for s, v in zip(self.letters, self.estimates):
            index = letters_to_indices(s)
            values[index] = v
            observed[index] = True
        return values, observed

    def get(self, letters: str) -> float:
        return float(self.estimates[self.letters.index(letters)])


def write_table(path: str | Path, table: ExpectationTable) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"# legs={','.join(str(leg) for leg in table.legs)}\tshots={table.shots}",
        _COLUMNS,
    ]
    lines += [
        f"{s}\t{v:.15g}\t{table.num_batches}" for s, v in zip(table.letters, table.estimates)
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug("Таблица ожиданий: %d строк → %s", len(table), path)


def read_table(path: str | Path) -> ExpectationTable:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 2 or not lines[0].startswith("# legs=") or lines[1] != _COLUMNS:
        raise ValueError(f"{path}: не таблица ожиданий")
    legs_field, shots_field = lines[0][2:].split("\t")
    legs = tuple(LegLabel.parse(x) for x in legs_field.removeprefix("legs=").split(","))
    shots = int(shots_field.removeprefix("shots="))
    letters, estimates, batches = [], [], 1
    for line in lines[2:]:
        if not line.strip():
            continue
        s, v, b = line.split("\t")
        letters.append(s)
        estimates.append(float(v))
        batches = int(b)
    return ExpectationTable(legs, tuple(letters), np.array(estimates), batches, shots)
