"""Figure renderers for the five supported kinds.

bench   -- cost-per-effective-sample curves, one line per sampler
heat    -- concentration heat maps over the (variance, correlation) grid
borrow  -- per-group posterior mean weights, one panel per input file
density -- Gaussian-kernel density overlays of the scalar chains
trace   -- traceplots of every numeric chain column
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from scipy.stats import gaussian_kde

from .errors import SchemaMismatch
from .io import numeric, read_table, require_columns

KINDS = ("bench", "heat", "borrow", "density", "trace")


@dataclass
class FigureSpec:
    """What to render: input CSVs, figure kind, output path, axis columns."""

    inputs: list
    kind: str
    out: Path
    x_column: str = "n"
    group_column: str = "sampler"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaMismatch(
                f"unknown figure kind {self.kind!r}; choose from {KINDS}"
            )
        if not self.inputs:
            raise SchemaMismatch("at least one input file is required")
        self.inputs = [Path(p) for p in self.inputs]
        self.out = Path(self.out)


def render(spec):
    """Render the figure and write the image; inputs are never modified."""
    fig = _RENDERERS[spec.kind](spec)
    fig.savefig(spec.out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return spec.out


def _render_bench(spec):
    path = spec.inputs[0]
    cols, rows = read_table(path)
    require_columns(path, cols, [spec.x_column, spec.group_column,
                                 "cpu_per_ess"])
    fig, ax = plt.subplots(figsize=(5, 4))
    for sampler in sorted({r[spec.group_column] for r in rows}):
        sub = [r for r in rows if r[spec.group_column] == sampler]
        xs = sorted({float(r[spec.x_column]) for r in sub})
        med = [np.median([float(r["cpu_per_ess"]) for r in sub
                          if float(r[spec.x_column]) == x]) for x in xs]
        ax.plot(xs, med, marker="o", label=sampler)
    ax.set_yscale("log")
    ax.set_xlabel(spec.x_column)
    ax.set_ylabel("CPU seconds per effective sample")
    ax.legend()
    return fig


def _render_heat(spec):
    path = spec.inputs[0]
    cols, rows = read_table(path)
    require_columns(path, cols, ["sigma2", "rho", "alpha", "alpha0", "model"])
    models = sorted({r["model"] for r in rows})
    fig, axes = plt.subplots(len(models), 2,
                             figsize=(8, 3.5 * len(models)), squeeze=False)
    for mi, model in enumerate(models):
        sub = [r for r in rows if r["model"] == model]
        s2 = sorted({float(r["sigma2"]) for r in sub})
        rho = sorted({float(r["rho"]) for r in sub})
        for ci, value in enumerate(("alpha", "alpha0")):
            grid = np.full((len(rho), len(s2)), np.nan)
            for r in sub:
                i = rho.index(float(r["rho"]))
                j = s2.index(float(r["sigma2"]))
                grid[i, j] = float(r[value])
            ax = axes[mi][ci]
            im = ax.imshow(grid, origin="lower", aspect="auto",
                           extent=(min(s2), max(s2), min(rho), max(rho)))
            fig.colorbar(im, ax=ax)
            ax.set_title(f"{model}: {value}")
            ax.set_xlabel("variance factor")
            ax.set_ylabel("correlation")
    return fig


def _render_borrow(spec):
    fig, axes = plt.subplots(1, len(spec.inputs),
                             figsize=(4 * len(spec.inputs), 3.5),
                             squeeze=False, sharey=True)
    for pi, path in enumerate(spec.inputs):
        cols, rows = read_table(path)
        require_columns(path, cols, ["draw", "group"])
        wcols = [c for c in cols if c.startswith("w_")]
        if not wcols:
            raise SchemaMismatch(f"{path}: missing column 'w_0'")
        ax = axes[0][pi]
        for g in sorted({r["group"] for r in rows}, key=float):
            sub = [r for r in rows if r["group"] == g]
            means = [np.mean(numeric(sub, c)) for c in wcols]
            ax.plot(range(len(wcols)), means, marker=".", label=f"group {g}")
        ax.set_title(Path(path).parent.name or Path(path).stem)
        ax.set_xlabel("atom index")
        if pi == 0:
            ax.set_ylabel("posterior mean weight")
        ax.legend(fontsize=8)
    return fig


def _render_density(spec):
    fig, ax = plt.subplots(figsize=(5, 4))
    for path in spec.inputs:
        cols, rows = read_table(path)
        require_columns(path, cols, ["scalar"])
        x = np.asarray(numeric(rows, "scalar"))
        label = Path(path).parent.name or Path(path).stem
        if np.ptp(x) == 0:
            ax.axvline(x[0], linestyle="--", label=label)
            continue
        kde = gaussian_kde(x, bw_method="silverman")
        grid = np.linspace(x.min(), x.max(), 400)
        ax.plot(grid, kde(grid), label=label)
    ax.set_xlabel("scalar chain value")
    ax.set_ylabel("density")
    ax.legend()
    return fig


def _render_trace(spec):
    path = spec.inputs[0]
    cols, rows = read_table(path)
    require_columns(path, cols, ["draw"])
    series = [c for c in cols if c != "draw"]
    if not series:
        raise SchemaMismatch(f"{path}: missing column 'scalar'")
    draw = numeric(rows, "draw")
    fig, axes = plt.subplots(len(series), 1,
                             figsize=(6, 1.8 * len(series)),
                             squeeze=False, sharex=True)
    for si, name in enumerate(series):
        ax = axes[si][0]
        ax.plot(draw, numeric(rows, name), linewidth=0.7)
        ax.set_ylabel(name)
    axes[-1][0].set_xlabel("draw")
    return fig


_RENDERERS = {
    "bench": _render_bench,
    "heat": _render_heat,
    "borrow": _render_borrow,
    "density": _render_density,
    "trace": _render_trace,
}
