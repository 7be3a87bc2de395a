"""Posterior inference for the normalized gamma-gamma hierarchical CRV."""

from .data import (  # noqa: F401
    BaseMeasure,
    GroupedCounts,
    ModelParams,
    ingest_groups,
    load_dataset,
    save_dataset,
    validate_params,
)

__version__ = "0.1.0"
