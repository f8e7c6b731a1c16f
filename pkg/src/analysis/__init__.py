"""Меры немарковости и анализы crosstalk / общей бани."""

from src.analysis.classify import Threshold, ThresholdMode, bootstrap_threshold, classify
from src.analysis.maps import (
    common_cause_matrix,
    filtered_qmi_map,
    naive_qmi_map,
    spatial_qmi_matrix,
)
from src.analysis.measures import mutual_information, qmi
from src.analysis.report import NonMarkovReport, QubitEntry, read_report, write_report
from src.analysis.sources import ExactSource, ShadowOptions, ShadowSource

__all__ = [
    "ExactSource",
    "NonMarkovReport",
    "QubitEntry",
    "ShadowOptions",
    "ShadowSource",
    "Threshold",
    "ThresholdMode",
    "bootstrap_threshold",
    "classify",
    "common_cause_matrix",
    "filtered_qmi_map",
    "mutual_information",
    "naive_qmi_map",
    "qmi",
    "read_report",
    "spatial_qmi_matrix",
    "write_report",
]
