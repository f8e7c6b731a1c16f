"""Бинарный файл выстрелов STSH (только дозапись).

Раскладка, все числа little-endian:

    смещение  размер  поле
    0         4       магия b"STSH"
    4         2       версия (u16) = 1
    6         2       N: число кубитов (u16)
    8         2       k: число шагов (u16)
    10        8       число выстрелов (u64), обновляется при flush
    18        8       мастер-сид (u64)
    26        ...     записи выстрелов

Запись одного выстрела (R = (k+1)·N + (k+1)·⌈N/8⌉ + k·N байт):
    (k+1)·N байт    индексы измерительных Клиффордов, по моментам t₀…t_k, внутри: по кубитам
    (k+1)·⌈N/8⌉     биты исходов, по слою на момент; бит кубита n: бит (n mod 8) байта n // 8
    k·N байт        индексы приготовительных Клиффордов, по моментам t₁…t_k
"""

from __future__ import annotations

import logging
import os
import struct
import threading
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.shadow.records import ShadowBatch

logger = logging.getLogger(__name__)

MAGIC = b"STSH"
VERSION = 1
_HEADER = struct.Struct("<4sHHHQQ")
HEADER_SIZE = _HEADER.size
_COUNT_OFFSET = 10


class ShotFileError(ValueError):
    """Повреждённый, усечённый или несовместимый файл выстрелов."""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class ShotFileHeader:
    num_qubits: int
    num_steps: int
    shots: int
    master_seed: int
    version: int = VERSION

    def pack(self) -> bytes:
        return _HEADER.pack(
            MAGIC, self.version, self.num_qubits, self.num_steps, self.shots, self.master_seed,
        )

    @property
    def record_size(self) -> int:
        n, k = self.num_qubits, self.num_steps
        return (k + 1) * n + (k + 1) * _bit_bytes(n) + k * n

    def check(self, *, num_qubits: int, num_steps: int, master_seed: int) -> None:
        """Сверка с конфигурацией; ошибка называет несовпавшее поле."""
        expected = {"N": num_qubits, "k": num_steps, "seed": master_seed}
        actual = {"N": self.num_qubits, "k": self.num_steps, "seed": self.master_seed}
        for name, value in expected.items():
            if actual[name] != value:
                raise ShotFileError(
                    f"Заголовок файла не совпадает с конфигурацией: {name} = {actual[name]}, "
                    f"ожидалось {value}",
                    field=name,
                )


def _bit_bytes(n: int) -> int:
    return -(-n // 8)


def _unpack_header(raw: bytes) -> ShotFileHeader:
    if len(raw) < HEADER_SIZE:
        raise ShotFileError(f"Файл короче заголовка: {len(raw)} байт из {HEADER_SIZE}", field="header")
    magic, version, n, k, shots, seed = _HEADER.unpack(raw[:HEADER_SIZE])
    if magic != MAGIC:
        raise ShotFileError(f"Неверная сигнатура {magic!r}, ожидалось {MAGIC!r}", field="magic")
    if version != VERSION:
        raise ShotFileError(f"Неподдерживаемая версия формата {version}", field="version")
    return ShotFileHeader(n, k, shots, seed, version)


def encode_batch(batch: ShadowBatch) -> bytes:
    b = len(batch)
    meas = batch.meas_clifford.astype(np.uint8).reshape(b, -1)
    bits = np.packbits(batch.outcome.astype(np.uint8), axis=-1, bitorder="little").reshape(b, -1)
    prep = batch.prep_clifford.astype(np.uint8).reshape(b, -1)
    return np.concatenate([meas, bits, prep], axis=1).tobytes()


def decode_records(
    payload: bytes, header: ShotFileHeader, qubits: Sequence[int], start: int = 0,
) -> ShadowBatch:
    n, k = header.num_qubits, header.num_steps
    count = len(payload) // header.record_size
    rows = np.frombuffer(payload, dtype=np.uint8, count=count * header.record_size)
    rows = rows.reshape(count, header.record_size)
    meas_end = (k + 1) * n
    bits_end = meas_end + (k + 1) * _bit_bytes(n)
    meas = rows[:, :meas_end].reshape(count, k + 1, n)
    packed = rows[:, meas_end:bits_end].reshape(count, k + 1, _bit_bytes(n))
    outcome = np.unpackbits(packed, axis=-1, count=n, bitorder="little")
    prep = rows[:, bits_end:].reshape(count, k, n)
    return ShadowBatch(tuple(qubits), k, header.master_seed, start, meas.copy(), outcome, prep.copy())


class ShotWriter:
    """Единственный писатель файла выстрелов; потокобезопасная дозапись."""

    def __init__(self, path: str | Path, num_qubits: int, num_steps: int, master_seed: int,
                 *, append: bool = False) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if append and self.path.exists():
            self._file = open(self.path, "r+b")
            try:
                self.header = _unpack_header(self._file.read(HEADER_SIZE))
                self.header.check(num_qubits=num_qubits, num_steps=num_steps, master_seed=master_seed)
            except ShotFileError:
                self._file.close()
                raise
            self._file.seek(HEADER_SIZE + self.header.shots * self.header.record_size)
            self._file.truncate()
        else:
            self._file = open(self.path, "wb")
            self.header = ShotFileHeader(num_qubits, num_steps, 0, master_seed)
            self._file.write(self.header.pack())
        self.count = self.header.shots

    def append(self, batch: ShadowBatch) -> None:
        if batch.num_qubits != self.header.num_qubits or batch.num_steps != self.header.num_steps:
            raise ShotFileError("Пакет выстрелов не совпадает с заголовком файла", field="shape")
        if batch.start != self.count:
            raise ShotFileError(
                f"Дозапись должна быть непрерывной: файл содержит {self.count} выстрелов, "
                f"пакет начинается с {batch.start}",
                field="shots",
            )
        with self._lock:
            self._file.write(encode_batch(batch))
            self.count += len(batch)

    def flush(self) -> None:
        """Обновить счётчик выстрелов в заголовке."""
        with self._lock:
            position = self._file.tell()
            self._file.seek(_COUNT_OFFSET)
            self._file.write(struct.pack("<Q", self.count))
            self._file.seek(position)
            self._file.flush()
            os.fsync(self._file.fileno())

    def close(self) -> None:
        if self._file.closed:
            return
        self.flush()
        self._file.close()
        logger.info("Файл выстрелов %s: %d выстрелов", self.path, self.count)

    def __enter__(self) -> ShotWriter:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_shots(path: str | Path, batch: ShadowBatch) -> None:
    with ShotWriter(path, batch.num_qubits, batch.num_steps, batch.master_seed) as writer:
        writer.append(batch)


def read_header(path: str | Path) -> ShotFileHeader:
    with open(path, "rb") as f:
        return _unpack_header(f.read(HEADER_SIZE))


def read_shots(
    path: str | Path, qubits: Sequence[int] | None = None, limit: int | None = None,
) -> ShadowBatch:
    """Прочитать выстрелы; усечённый файл: ShotFileError с числами."""
    raw = Path(path).read_bytes()
    header = _unpack_header(raw)
    if qubits is None:
        qubits = tuple(range(header.num_qubits))
    if len(qubits) != header.num_qubits:
        raise ShotFileError(
            f"Файл содержит {header.num_qubits} кубитов, передано {len(qubits)}", field="N",
        )
    wanted = header.shots if limit is None else min(limit, header.shots)
    payload = raw[HEADER_SIZE:]
    available = len(payload) // header.record_size
    if available < wanted:
        raise ShotFileError(
            f"Файл усечён: заявлено {header.shots} выстрелов, прочитано {available}",
            field="shots",
        )
    return decode_records(payload[: wanted * header.record_size], header, qubits)
