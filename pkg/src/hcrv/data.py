"""Grouped-count data model and model parameters.

Observations arrive as d groups of real values; ties across all groups are
collapsed into k distinct values with a d x k count matrix.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGroup, InvalidParam, NonFinite


@dataclass(frozen=True)
class GroupedCounts:
    """Summary of d groups of observations by distinct values and counts."""

    d: int
    k: int
    distinct: np.ndarray  # (k,) distinct observed values, ascending
    counts: np.ndarray  # (d, k) non-negative integers

    @property
    def group_sizes(self):
        return self.counts.sum(axis=1)

    @property
    def indicators(self):
        return np.minimum(self.counts, 1)

    @property
    def column_totals(self):
        return self.counts.sum(axis=0)

    @property
    def column_indicator_totals(self):
        return self.indicators.sum(axis=0)

    @property
    def m(self):
        return int(self.indicators.sum())

    @property
    def n(self):
        return int(self.counts.sum())

    def to_groups(self):
        """Expand back to per-group multisets (sorted)."""
        out = []
        for i in range(self.d):
            vals = np.repeat(self.distinct, self.counts[i])
            out.append(sorted(vals.tolist()))
        return out


def ingest_groups(groups):
    """Build a GroupedCounts from a list of d lists of real observations.

    Ties are detected by exact equality; distinct values are sorted
    ascending so column indices are deterministic across runs.
    """
    if len(groups) < 1:
        raise EmptyGroup("need at least one group")
    for i, g in enumerate(groups):
        if len(g) == 0:
            raise EmptyGroup(f"group {i} is empty")
        for v in g:
            if not math.isfinite(v):
                raise NonFinite(f"non-finite observation in group {i}: {v}")
    distinct = sorted({float(v) for g in groups for v in g})
    index = {v: j for j, v in enumerate(distinct)}
    d, k = len(groups), len(distinct)
    counts = np.zeros((d, k), dtype=np.int64)
    for i, g in enumerate(groups):
        for v in g:
            counts[i, index[float(v)]] += 1
    return GroupedCounts(d=d, k=k, distinct=np.array(distinct), counts=counts)


@dataclass
class BaseMeasure:
    """Diffuse base measure P0: normal(mean, sd) or uniform(low, high)."""

    kind: str = "normal"
    mean: float = 0.0
    sd: float = 1.0
    low: float = 0.0
    high: float = 1.0

    def sample(self, size, rng):
        if self.kind == "normal":
            return rng.normal(self.mean, self.sd, size=size)
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size=size)
        raise InvalidParam("base_measure", f"unknown base measure kind {self.kind!r}")


@dataclass
class ModelParams:
    """Shapes and rates (alpha, alpha0, b, b0) plus the base measure P0."""

    alpha: float
    alpha0: float
    b: float = 1.0
    b0: float = 1.0
    base_measure: BaseMeasure = field(default_factory=BaseMeasure)


def validate_params(p):
    """Check positivity and report the identifiable reparameterization.

    Returns a diagnostic dict; the normalized law depends only on alpha0 and
    the ratio alpha / b0.
    """
    for name in ("alpha", "alpha0", "b", "b0"):
        v = getattr(p, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise InvalidParam(name)
    if p.base_measure.kind not in ("normal", "uniform"):
        raise InvalidParam("base_measure")
    if p.base_measure.kind == "normal" and p.base_measure.sd <= 0:
        raise InvalidParam("base_measure")
    if p.base_measure.kind == "uniform" and p.base_measure.high <= p.base_measure.low:
        raise InvalidParam("base_measure")
    return {"alpha0": p.alpha0, "alpha_over_b0": p.alpha / p.b0}


def load_dataset(path):
    """Read a dataset from JSON ({"groups": [[...], ...]}) or CSV.

    The CSV form has columns (group_id, value) with an optional header.
    """
    path = str(path)
    if path.endswith(".json"):
        with open(path) as f:
            payload = json.load(f)
        return ingest_groups(payload["groups"])
    groups = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        for row in reader:
            if not row or row[0].startswith("#"):
                continue
            try:
                gid = int(row[0])
            except ValueError:
                continue  # header line
            groups.setdefault(gid, []).append(float(row[1]))
    return ingest_groups([groups[g] for g in sorted(groups)])


def save_dataset(groups, path):
    """Write raw groups to a JSON dataset file."""
    with open(path, "w") as f:
        json.dump({"groups": [[float(v) for v in g] for g in groups]}, f)
        f.write("\n")
