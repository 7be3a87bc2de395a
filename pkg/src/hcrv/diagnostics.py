"""MCMC diagnostics: effective sample size and split-chain statistics."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateChain


def _autocovariance(x):
    """Biased autocovariance via FFT, lags 0..n-1."""
    n = x.size
    xc = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conjugate(f), nfft)[:n].real
    return acov / n


def ess(chain):
    """Effective sample size by Geyer's initial positive sequence.

    Pairs of consecutive autocorrelations are summed while the pair sums
    stay positive; the result is clipped to (0, n].
    """
    x = np.asarray(chain, dtype=float)
    if x.size < 10:
        raise DegenerateChain(f"chain too short: {x.size} < 10")
    acov = _autocovariance(x)
    # FFT roundoff can leave ~1e-32 "variance" on a constant chain
    if acov[0] <= 1e-20 * max(1.0, x.mean() ** 2):
        raise DegenerateChain("chain has zero variance")
    rho = acov / acov[0]
    tau = -1.0
    m = 0
    while 2 * m + 1 < x.size:
        gamma = rho[2 * m] + (rho[2 * m + 1] if 2 * m + 1 < x.size else 0.0)
        if gamma <= 0:
            break
        tau += 2.0 * gamma
        m += 1
    tau = max(tau, 1.0 / x.size)
    return float(min(x.size / tau, x.size))


def gelman_rubin(chains):
    """Potential scale reduction factor across chains of equal length."""
    chains = np.asarray(chains, dtype=float)
    m, n = chains.shape
    means = chains.mean(axis=1)
    variances = chains.var(axis=1, ddof=1)
    w = variances.mean()
    b = n * means.var(ddof=1)
    var_hat = (n - 1) / n * w + b / n
    return float(np.sqrt(var_hat / w))
