"""Frequency, superlevel-set and drift-equation experiments for planar harmonic gradients."""

import json as _json

from ._harmgrad import (
    HarmgradError,
    HoloField,
    appendix_identity_residual,
    appendix_identity_scale,
    beurling_transform,
    cartan_cover,
    cauchy_transform,
    frequency_ball,
    frequency_series,
    propagation,
    series_field,
    solve_beltrami,
    solve_drift,
    superlevel_volume,
)

__all__ = [
    "HarmgradError",
    "HoloField",
    "appendix_identity_residual",
    "appendix_identity_scale",
    "beurling_transform",
    "cartan_cover",
    "cauchy_transform",
    "frequency_ball",
    "frequency_series",
    "list_experiments",
    "propagation",
    "run_experiment",
    "series_field",
    "solve_beltrami",
    "solve_drift",
    "superlevel_volume",
]


def list_experiments():
    """Catalog entries as dicts with name, description, verifies and criteria."""
    from ._harmgrad import catalog_json

    return _json.loads(catalog_json())


def run_experiment(name, params=None, seed=1, jobs=0):
    """Run a named experiment; tables come back as {name: {columns, rows}} with rows as strings."""
    from ._harmgrad import run_experiment_json

    return _json.loads(run_experiment_json(name, _json.dumps(params or {}), seed, jobs))
