"""Synthetic grouped-data generators for experiments and benchmarks."""

from __future__ import annotations

import numpy as np

from .data import BaseMeasure
from .errors import InvalidParam


def poisson_groups(means, sizes, rng):
    """Independent Poisson groups; group i has the given mean and size."""
    means = list(means)
    sizes = list(sizes)
    if len(means) != len(sizes):
        raise InvalidParam("sizes", "means and sizes must have equal length")
    if any(s < 1 for s in sizes):
        raise InvalidParam("sizes", "every group size must be at least 1")
    return [rng.poisson(mu, size=int(n)).astype(float).tolist()
            for mu, n in zip(means, sizes)]


def hdp_crf_groups(d, n, alpha, alpha0, rng, base_sampler=None):
    """Draw d groups of n observations from a hierarchical Dirichlet process.

    Uses the restaurant-franchise predictive: customers join an existing
    table with probability proportional to its occupancy or open a new one
    with weight alpha; a new table serves an existing dish with weight
    proportional to its franchise-wide table count or a fresh draw from the
    base measure with weight alpha0. The realized number of distinct values
    varies with the seed.
    """
    if d < 1 or n < 1:
        raise InvalidParam("d", "d and n must be at least 1")
    if alpha <= 0 or alpha0 <= 0:
        raise InvalidParam("alpha", "concentrations must be positive")
    base_sampler = base_sampler or BaseMeasure("normal", 0.0, 1.0)
    dishes = []  # distinct values drawn from the base measure
    dish_tables = []  # franchise-wide table count per dish
    groups = []
    for _ in range(d):
        table_counts = []  # occupancy per table in this restaurant
        table_dish = []  # dish index per table
        values = []
        for _ in range(n):
            w = np.array(table_counts + [alpha], dtype=float)
            t = rng.choice(w.size, p=w / w.sum())
            if t == len(table_counts):
                dw = np.array(dish_tables + [alpha0], dtype=float)
                j = rng.choice(dw.size, p=dw / dw.sum())
                if j == len(dishes):
                    dishes.append(float(base_sampler.sample(1, rng)[0]))
                    dish_tables.append(0)
                dish_tables[j] += 1
                table_counts.append(0)
                table_dish.append(j)
            table_counts[t] += 1
            values.append(dishes[table_dish[t]])
        groups.append(values)
    return groups
