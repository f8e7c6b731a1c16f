"""Пул потоков для выстрелов и реконструкций маргиналов.

numpy/scipy отпускают GIL в линейной алгебре, поэтому потоков достаточно.
"""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


class WorkerPool:
    """ThreadPoolExecutor с асинхронным map; результаты в порядке входа."""

    def __init__(self, threads: int) -> None:
        if threads < 1:
            raise ValueError(f"Число потоков должно быть >= 1, получено {threads}")
        self.threads = threads
        self._executor: ThreadPoolExecutor | None = None

    def start(self) -> None:
        if self._executor is not None:
            logger.warning("Пул уже запущен")
            return
        self._executor = ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix="shadows")
        logger.debug("Пул запущен: %d потоков", self.threads)

    def stop(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None
            logger.debug("Пул остановлен")

    async def map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        if self._executor is None:
            raise RuntimeError("Пул не запущен. Вызовите start() сначала.")
        loop = asyncio.get_running_loop()
        futures = [loop.run_in_executor(self._executor, fn, item) for item in items]
        return list(await asyncio.gather(*futures))

    async def __aenter__(self) -> WorkerPool:
        self.start()
        return self

    async def __aexit__(self, *exc) -> None:
        self.stop()


def shot_ranges(total: int, parts: int, min_size: int = 1024) -> list[tuple[int, int]]:
    """Разбить [0, total) на непрерывные диапазоны (start, count) для потоков."""
    if total <= 0:
        return []
    parts = max(1, min(parts, -(-total // min_size)))
    edges = [total * i // parts for i in range(parts + 1)]
    return [(edges[i], edges[i + 1] - edges[i]) for i in range(parts) if edges[i + 1] > edges[i]]
