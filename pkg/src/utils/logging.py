"""Настройка логирования."""

from __future__ import annotations

import logging
import sys


def setup_logging(level: str | None = None) -> None:
    """Настроить логирование для всего приложения (по умолчанию INFO)."""
    level = level or "INFO"
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stdout,
        force=True,
    )
    # Уменьшаем шум от библиотек
    logging.getLogger("aiosqlite").setLevel(logging.WARNING)
    logging.getLogger("asyncio").setLevel(logging.WARNING)
