"""Текстовое представление отчётов и таблиц для терминала."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from src.analysis.report import NonMarkovReport


def bits(value: float | None, digits: int = 4) -> str:
    """Значение в битах; None: прочерк."""
    if value is None:
        return "-"
    if abs(value) < 10 ** -(digits + 2):
        return "0"
    return f"{value:.{digits}g}"


def table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Моноширинная таблица с выравниванием по ширине колонок."""
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)


def matrix(values: np.ndarray, labels: Sequence[int], corner: str = "i\\j") -> str:
    headers = [corner] + [f"q{q}" for q in labels]
    rows = [
        [f"q{labels[i]}"] + [bits(float(v)) for v in values[i]]
        for i in range(len(labels))
    ]
    return table(headers, rows)


def format_report(report: NonMarkovReport) -> str:
    """Сводка отчёта: кубиты, пары, пороги, происхождение."""
    provenance = ", ".join(f"{k}={v}" for k, v in report.provenance.items())
    parts = [f"Отчёт ({provenance}), k={report.num_steps}"]

    rows = [
        [
            f"q{q.id}", f"({q.x},{q.y})", bits(q.naive_qmi), bits(q.filtered_qmi),
            bits(q.filtered_se), q.classification,
        ]
        for q in report.qubits
    ]
    parts.append(table(["кубит", "xy", "naive", "filtered", "se", "класс"], rows))

    if report.common_cause is not None:
        parts.append("Общая причина, M[i][j] (бит):")
        parts.append(matrix(report.common_cause, report.qubit_ids))
        shared = report.shared_pairs()
        parts.append(
            "Общая баня: " + (", ".join(f"(q{a}, q{b})" for a, b in shared) if shared else "нет")
        )
    if report.spatial is not None:
        parts.append("Пространственная QMI (бит):")
        parts.append(matrix(report.spatial, report.qubit_ids, corner="q"))

    for name, threshold in report.thresholds.items():
        parts.append(f"Порог {name}: {bits(threshold.value)} бит ({threshold.derivation.value})")
    return "\n\n".join(parts)
