import math

import mpmath
import numpy as np
import pytest

from hcrv import elicitation
from hcrv.errors import DomainError, NoSolution


def test_kappa_matches_mpmath():
    with mpmath.workdps(40):
        for alpha, alpha0 in [(1.0, 1.0), (2.0, 3.0), (0.3, 5.0), (20.0, 0.7)]:
            oracle = float((alpha0 / alpha) * mpmath.exp(1 / alpha)
                           * mpmath.expint(alpha0, 1 / alpha))
            np.testing.assert_allclose(elicitation._kappa(alpha, alpha0),
                                       oracle, rtol=1e-10)


def test_hcrv_moments_structure():
    rep = elicitation.hcrv_moments(1.0, 1.0, 0.5)
    assert rep.mean == 0.5
    assert rep.covariance == 0.25 / 2.0
    assert 0 < rep.correlation < 1
    # variance = covariance / correlation by construction
    np.testing.assert_allclose(rep.variance * rep.correlation,
                               rep.covariance, rtol=1e-12)


def test_correlation_independent_of_set_probability():
    rhos = [elicitation.hcrv_moments(2.0, 3.0, p).correlation
            for p in (0.1, 0.5, 0.9)]
    assert max(rhos) - min(rhos) < 1e-12


def test_correlation_limits_in_alpha():
    alpha0 = 2.0
    lo = elicitation.hcrv_moments(1e-4, alpha0, 0.5).correlation
    hi = elicitation.hcrv_moments(1e4, alpha0, 0.5).correlation
    np.testing.assert_allclose(lo, 1.0 / (1.0 + alpha0), rtol=1e-3)
    np.testing.assert_allclose(hi, 1.0, atol=2e-3)


def test_hdp_moment_limits():
    alpha0 = 2.0
    lo = elicitation.hdp_moments(1e-4, alpha0, 0.5)
    hi = elicitation.hdp_moments(1e4, alpha0, 0.5)
    np.testing.assert_allclose(lo.correlation, 1.0 / (1.0 + alpha0), rtol=1e-3)
    np.testing.assert_allclose(hi.correlation, 1.0, atol=2e-3)
    # variance spans pq/(1+alpha0) .. pq as alpha moves across its range
    np.testing.assert_allclose(hi.variance, 0.25 / (1.0 + alpha0), rtol=1e-3)
    np.testing.assert_allclose(lo.variance, 0.25, rtol=1e-3)


def test_moment_domain_errors():
    with pytest.raises(DomainError):
        elicitation.hcrv_moments(1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        elicitation.hcrv_moments(-1.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        elicitation.hdp_moments(1.0, 0.0, 0.5)


def test_hdp_reference_point():
    # variance factor 0.5 and correlation 0.5 pin down (2, 3) exactly
    alpha, alpha0 = elicitation.hdp_params_from(0.5, 0.5)
    assert alpha == 2.0 and alpha0 == 3.0
    rep = elicitation.hdp_moments(alpha, alpha0, 0.5)
    np.testing.assert_allclose(rep.variance / 0.25, 0.5, rtol=1e-12)
    np.testing.assert_allclose(rep.correlation, 0.5, rtol=1e-12)


def test_round_trip_grid():
    grid = np.arange(0.1, 0.95, 0.1)
    for s2 in grid:
        for rho in grid:
            alpha, alpha0 = elicitation.solve_hcrv_params(s2, rho)
            rep = elicitation.hcrv_moments(alpha, alpha0, 0.5)
            np.testing.assert_allclose(rep.variance / 0.25, s2, rtol=1e-8)
            np.testing.assert_allclose(rep.correlation, rho, rtol=1e-8)
            a2, a02 = elicitation.hdp_params_from(s2, rho)
            rep2 = elicitation.hdp_moments(a2, a02, 0.5)
            np.testing.assert_allclose(rep2.variance / 0.25, s2, rtol=1e-12)
            np.testing.assert_allclose(rep2.correlation, rho, rtol=1e-12)


def test_solver_rejects_impossible_targets():
    with pytest.raises(DomainError):
        elicitation.solve_hcrv_params(1.5, 0.5)
    with pytest.raises((NoSolution, DomainError)):
        elicitation.solve_hcrv_params(0.999999, 0.999999999)


def test_laplace_exponent_values():
    p = {"alpha": 2.0, "alpha0": 3.0, "b": 1.0, "b0": 1.0}
    assert elicitation.laplace_exponent("gamma-gamma", p, [0.0, 0.0]) == 0.0
    val = elicitation.laplace_exponent("gamma-gamma", p, [1.0])
    np.testing.assert_allclose(val, 3.0 * math.log1p(2.0 * math.log(2.0)),
                               rtol=1e-12)
    ps = {"alpha": 2.0, "alpha0": 3.0, "sigma": 0.5, "sigma0": 0.5}
    val = elicitation.laplace_exponent("stable-stable", ps, [4.0])
    np.testing.assert_allclose(val, 3.0 * math.sqrt(2.0) * math.sqrt(2.0),
                               rtol=1e-12)
    with pytest.raises(DomainError):
        elicitation.laplace_exponent("gamma-gamma", p, [-1.0])
    with pytest.raises(DomainError):
        elicitation.laplace_exponent("poisson", p, [1.0])
    with pytest.raises(DomainError):
        elicitation.laplace_exponent(
            "stable-stable", {**ps, "sigma": 1.5}, [1.0])


def test_elicitation_grid_rows():
    rows = elicitation.elicitation_grid([0.3, 0.5], [0.2])
    assert len(rows) == 4
    models = {r[4] for r in rows}
    assert models == {"hcrv", "hdp"}
    for s2, rho, alpha, alpha0, _ in rows:
        assert alpha > 0 and alpha0 > 0
