"""Closed-loop Lindblad simulator for dissipative two-atom entanglement."""

import json

from ._core import (
    TIMESERIES_HEADER,
    ConfigError,
    IntegratorError,
    ModelError,
    ModelSpec,
    classify,
    cooperativity,
    pump_for_squeezing,
    reference_spec,
    reservoir_coeffs,
    simulate,
    squeezing_parameters,
)
from ._core import run_config as _run_config

__all__ = [
    "TIMESERIES_HEADER",
    "ConfigError",
    "IntegratorError",
    "ModelError",
    "ModelSpec",
    "classify",
    "cooperativity",
    "pump_for_squeezing",
    "reference_spec",
    "reservoir_coeffs",
    "run_config",
    "simulate",
    "squeezing_parameters",
]


def run_config(text, workers=1, out_dir=None):
    """Run a flat ``key = value`` config; returns the list of run summaries."""
    return json.loads(_run_config(text, workers, out_dir))
