"""Density-of-states measures of random lattice Schrodinger operators."""

import json

from ._core import (
    Box,
    InvalidInput,
    Lattice,
    Measure,
    MisalignedBox,
    NumericalFailure,
    Operator,
    Quadrature,
    TestFunction,
    bl_distance,
    bl_distance_oracle,
    c_norm,
    dosm_estimate,
    eig_trace,
    experiments,
    hs_trace,
    ids_curve,
    lipschitz_seminorm,
    moment,
    quantize,
    sample_disorder,
    sup_derivative,
    truncate_disorder,
    weighted_norm,
)
from ._core import run_config_json as _run_config_json

EXIT_CODES = {"pass": 0, "none": 0, "fail": 2, "inconclusive": 3}


def run(config, seed=None, threads=None, out_dir=None, write_files=False):
    """Run an experiment config (dict or JSON text); returns the report document.

    With write_files the JSON and CSV paths are added under "files".
    """
    text = config if isinstance(config, str) else json.dumps(config)
    doc, json_path, csv_path = _run_config_json(text, seed, threads, out_dir, write_files)
    report = json.loads(doc)
    if write_files:
        report["files"] = {"json": json_path, "csv": csv_path}
    return report


def minimal_config(kind):
    for e in experiments():
        if e["name"] == kind:
            return json.loads(e["minimal_config"])
    raise InvalidInput(f"unknown experiment '{kind}'")


__all__ = [
    "Box",
    "EXIT_CODES",
    "InvalidInput",
    "Lattice",
    "Measure",
    "MisalignedBox",
    "NumericalFailure",
    "Operator",
    "Quadrature",
    "TestFunction",
    "bl_distance",
    "bl_distance_oracle",
    "c_norm",
    "dosm_estimate",
    "eig_trace",
    "experiments",
    "hs_trace",
    "ids_curve",
    "lipschitz_seminorm",
    "minimal_config",
    "moment",
    "quantize",
    "run",
    "sample_disorder",
    "sup_derivative",
    "truncate_disorder",
    "weighted_norm",
]
