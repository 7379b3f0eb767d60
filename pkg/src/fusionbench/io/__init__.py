"""Readers and writers for the toolkit's file formats."""

from fusionbench.io.arff import ArffAttribute, ArffDocument, parse_arff, read_arff, write_arff
from fusionbench.io.cmfile import read_cm, write_cm
from fusionbench.io.hexagon import render_hexagon, vertex_radius
from fusionbench.io.manifest import ExperimentManifest, load_manifest
from fusionbench.io.predictions import read_predictions, write_predictions
from fusionbench.io.report import read_report, write_curve_csv, write_report

__all__ = [
    "ArffAttribute",
    "ArffDocument",
    "ExperimentManifest",
    "load_manifest",
    "parse_arff",
    "read_arff",
    "read_cm",
    "read_predictions",
    "read_report",
    "render_hexagon",
    "vertex_radius",
    "write_arff",
    "write_cm",
    "write_curve_csv",
    "write_predictions",
    "write_report",
]
