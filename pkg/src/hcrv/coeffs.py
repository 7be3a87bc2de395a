"""Blocked-permutation cycle coefficients and their convolutions.

For a column of counts (q_1, ..., q_d) the coefficient S(q_1,...,q_d; h)
counts the permutations with h cycles in the Young subgroup induced by the
block sizes. They satisfy the one-observation-at-a-time recursion

    S(q_1,...,q_l + 1,...,q_d; h) = q_l S(q; h) + S(q; h - 1)

with S(0,...,0; 0) = 1, and reduce to unsigned Stirling numbers of the
first kind when d = 1. All production coefficients are stored as logs;
an exact integer mode backs the small-n test oracles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DomainError

NEG_INF = -np.inf


def stirling_column(q):
    """Log coefficients log S(q_1,...,q_d; h) for h = m .. sum(q).

    Returns (h_min, log_coeffs) with h_min = #{i : q_i > 0}; the vector is
    indexed h = h_min, ..., sum(q). Cost O(sum(q)^2).
    """
    q = [int(v) for v in q]
    if any(v < 0 for v in q):
        raise DomainError("counts must be non-negative")
    total = sum(q)
    if total < 1:
        raise DomainError("at least one count must be positive")
    # logS[h] over h = 0..current total; start from the empty product
    logS = np.array([0.0])
    for ql in q:
        for c in range(ql):
            prev = logS
            n_old = prev.size - 1
            out = np.full(n_old + 2, NEG_INF)
            # out[h] = log(c * prev[h] + prev[h-1])
            if c > 0:
                out[: n_old + 1] = np.log(c) + prev
            out[1:] = np.logaddexp(out[1:], prev)
            logS = out
    h_min = sum(1 for v in q if v > 0)
    return h_min, logS[h_min:]


def stirling_column_exact(q):
    """Exact integer coefficients, for test oracles at small n."""
    q = [int(v) for v in q]
    total = sum(q)
    if total < 1:
        raise DomainError("at least one count must be positive")
    S = [1]
    for ql in q:
        for c in range(ql):
            prev = S
            S = [0] * (len(prev) + 1)
            for h, v in enumerate(prev):
                S[h] += c * v
                S[h + 1] += v
    h_min = sum(1 for v in q if v > 0)
    return h_min, S[h_min:]


def log_convolve(h1, a1, h2, a2):
    """Log-space discrete convolution of (offset, log-vector) pairs."""
    n1, n2 = len(a1), len(a2)
    out = np.full(n1 + n2 - 1, NEG_INF)
    for i in range(n1):
        if a1[i] == NEG_INF:
            continue
        out[i : i + n2] = np.logaddexp(out[i : i + n2], a1[i] + a2)
    return h1 + h2, out


@dataclass
class StirlingTable:
    """Per-column log coefficients and their cross-column convolution."""

    h_mins: list  # per column, = m_.j
    log_cols: list  # per column, log S(n_1j..n_dj; h) for h = m_.j .. n_.j
    m: int  # sum of m_.j
    n: int  # sum of n_.j
    log_c: np.ndarray  # log c_h for h = m .. n

    @classmethod
    def from_counts(cls, counts):
        """Build the table from a d x k count matrix."""
        counts = np.asarray(counts)
        h_mins, log_cols = [], []
        for j in range(counts.shape[1]):
            h_min, logS = stirling_column(counts[:, j])
            h_mins.append(h_min)
            log_cols.append(logS)
        log_c, m = convolve_columns(h_mins, log_cols)
        n = int(counts.sum())
        return cls(h_mins=h_mins, log_cols=log_cols, m=m, n=n, log_c=log_c)

    def mixture_weights(self, j, lam):
        """Gamma-mixture weights for column j at rate lam.

        w_h is proportional to lam^-h Gamma(h) S(n_1j,...,n_dj; h) over
        h = m_.j .. n_.j; returned normalized.
        """
        if lam <= 0:
            raise DomainError("mixture rate must be positive")
        h = self.h_mins[j] + np.arange(self.log_cols[j].size)
        logw = -h * np.log(lam) + gammaln(h) + self.log_cols[j]
        w = np.exp(logw - logsumexp(logw))
        return w / w.sum()

    def dump_json(self, path):
        payload = [
            {
                "column": j,
                "h": (self.h_mins[j] + np.arange(self.log_cols[j].size)).tolist(),
                "log_coeff": self.log_cols[j].tolist(),
            }
            for j in range(len(self.log_cols))
        ]
        with open(path, "w") as f:
            json.dump({"columns": payload, "m": self.m, "n": self.n,
                       "log_c": self.log_c.tolist()}, f)


def convolve_columns(h_mins, log_cols):
    """Convolve per-column vectors a(j; h) = Gamma(h) S(...; h).

    Returns (log_c, m) with log_c indexed h = m .. n; computed by k - 1
    pairwise log-space convolutions.
    """
    h0 = h_mins[0]
    acc_h = h0
    acc = gammaln(h0 + np.arange(log_cols[0].size)) + log_cols[0]
    for j in range(1, len(log_cols)):
        hj = h_mins[j]
        aj = gammaln(hj + np.arange(log_cols[j].size)) + log_cols[j]
        acc_h, acc = log_convolve(acc_h, acc, hj, aj)
    return acc, acc_h
