"""Closed-form prior analysis: moments, correlation, parameter solvers.

All normalized moments assume the b = b0 = 1 normalization, under which
the law depends only on (alpha0, alpha). The key quantity is
kappa(alpha, alpha0) = (alpha0/alpha) e^(1/alpha) E_alpha0(1/alpha),
through which corr = 1/(1 + kappa).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoSolution
from .specfun import exp_scaled_gen_exp_integral


@dataclass
class MomentReport:
    mean: float
    variance: float
    covariance: float
    correlation: float
    unnorm_variance: float | None = None
    unnorm_correlation: float | None = None


def _kappa(alpha, alpha0):
    """(alpha0/alpha) e^(1/alpha) E_alpha0(1/alpha), overflow-free."""
    return (alpha0 / alpha) * exp_scaled_gen_exp_integral(alpha0, 1.0 / alpha)


def hcrv_moments(alpha, alpha0, p0a):
    """Moments of the normalized gamma-gamma pair (P_i(A), P_j(A))."""
    if not 0.0 < p0a < 1.0:
        raise DomainError("p0a must lie in (0, 1)")
    if alpha <= 0 or alpha0 <= 0:
        raise DomainError("alpha and alpha0 must be positive")
    pq = p0a * (1.0 - p0a)
    kap = _kappa(alpha, alpha0)
    variance = (1.0 + kap) * pq / (1.0 + alpha0)
    covariance = pq / (1.0 + alpha0)
    correlation = 1.0 / (1.0 + kap)
    return MomentReport(
        mean=p0a, variance=variance, covariance=covariance,
        correlation=correlation,
        unnorm_variance=alpha0 * alpha * (1.0 + alpha) * p0a,
        unnorm_correlation=alpha / (1.0 + alpha),
    )


def hdp_moments(alpha, alpha0, p0a):
    """Moments of the HDP(alpha, alpha0) pair (P_i(A), P_j(A))."""
    if not 0.0 < p0a < 1.0:
        raise DomainError("p0a must lie in (0, 1)")
    if alpha <= 0 or alpha0 <= 0:
        raise DomainError("alpha and alpha0 must be positive")
    pq = p0a * (1.0 - p0a)
    variance = (1.0 + alpha + alpha0) / ((1.0 + alpha0) * (1.0 + alpha)) * pq
    correlation = (1.0 + alpha) / (1.0 + alpha + alpha0)
    return MomentReport(mean=p0a, variance=variance,
                        covariance=correlation * variance,
                        correlation=correlation)


def solve_hcrv_params(sigma2, rho):
    """Map target (variance factor, correlation) to (alpha, alpha0).

    alpha0 solves sigma2 (1 + alpha0) = 1/rho in closed form; alpha solves
    rho (1 + kappa(alpha, alpha0)) = 1 by bracketed bisection with a few
    Newton-style polish steps through the same kappa evaluator, so the
    round trip through hcrv_moments is self-consistent.
    """
    if not (0.0 < sigma2 < 1.0 and 0.0 < rho < 1.0):
        raise DomainError("sigma2 and rho must lie in (0, 1)")
    alpha0 = 1.0 / (rho * sigma2) - 1.0
    if alpha0 <= 0:
        raise NoSolution(f"rho * sigma2 = {rho * sigma2} >= 1")
    target = 1.0 / rho - 1.0  # kappa(alpha, alpha0) must equal this

    def g(log_alpha):
        return _kappa(np.exp(log_alpha), alpha0) - target

    lo, hi = np.log(1e-8), np.log(1e8)
    glo, ghi = g(lo), g(hi)
    if not np.isfinite(glo) or not np.isfinite(ghi) or glo * ghi > 0:
        raise NoSolution(
            f"no root in bracket: g({lo:.3g})={glo:.3g}, g({hi:.3g})={ghi:.3g}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if glo * gm <= 0:
            hi, ghi = mid, gm
        else:
            lo, glo = mid, gm
        if hi - lo < 1e-14 * (1 + abs(mid)):
            break
    return float(np.exp(0.5 * (lo + hi))), float(alpha0)


def hdp_params_from(sigma2, rho):
    """Closed-form HDP parameters matching (variance factor, correlation)."""
    if not (0.0 < sigma2 < 1.0 and 0.0 < rho < 1.0):
        raise DomainError("sigma2 and rho must lie in (0, 1)")
    alpha = (1.0 / (1.0 - rho)) * (1.0 / sigma2 - 1.0)
    alpha0 = 1.0 / (rho * sigma2) - 1.0
    return float(alpha), float(alpha0)


def laplace_exponent(family, params, lambdas):
    """Multivariate Laplace exponent of the hierarchical prior total mass.

    family "gamma-gamma": params (alpha, alpha0, b, b0);
    family "stable-stable": params dict with alpha, alpha0, sigma, sigma0.
    """
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam < 0):
        raise DomainError("lambdas must be non-negative")
    if family == "gamma-gamma":
        alpha, alpha0, b, b0 = (params["alpha"], params["alpha0"],
                                params.get("b", 1.0), params.get("b0", 1.0))
        if min(alpha, alpha0, b, b0) <= 0:
            raise DomainError("gamma-gamma parameters must be positive")
        return float(alpha0 * np.log1p((alpha / b0) * np.sum(np.log1p(lam / b))))
    if family == "stable-stable":
        alpha, alpha0 = params["alpha"], params["alpha0"]
        sigma, sigma0 = params["sigma"], params["sigma0"]
        if min(alpha, alpha0) <= 0:
            raise DomainError("stable-stable shapes must be positive")
        if not (0 < sigma < 1 and 0 < sigma0 < 1):
            raise DomainError("stable discounts must lie in (0, 1)")
        return float(alpha0 * alpha**sigma0 * np.sum(lam**sigma) ** sigma0)
    raise DomainError(f"unknown family {family!r}")


def elicitation_grid(sigma2_values, rho_values):
    """Rows (sigma2, rho, alpha, alpha0, model) over the product grid."""
    rows = []
    for s2 in sigma2_values:
        for rho in rho_values:
            a, a0 = solve_hcrv_params(s2, rho)
            rows.append((s2, rho, a, a0, "hcrv"))
            a, a0 = hdp_params_from(s2, rho)
            rows.append((s2, rho, a, a0, "hdp"))
    return rows
