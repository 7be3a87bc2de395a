import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from hcrv import exact
from hcrv.data import ingest_groups
from hcrv.errors import BudgetExceeded
from hcrv.rng import stream


@pytest.fixture(scope="module")
def toy_plan(toy_dataset, unit_params):
    return exact.build_plan(toy_dataset, unit_params)


def _density_moments(plan):
    """Quadrature mean/variance of the target density of alpha*T."""
    logf = lambda t: ((plan.alpha0 - 1) * math.log(t) - plan.rate * t
                      + plan.log_R(t))
    f = lambda t: math.exp(logf(t))
    z, _ = quad(f, 0, np.inf, limit=400)
    m1, _ = quad(lambda t: t * f(t), 0, np.inf, limit=400)
    m2, _ = quad(lambda t: t * t * f(t), 0, np.inf, limit=400)
    return m1 / z, m2 / z - (m1 / z) ** 2


def test_plan_r_opt_in_range(toy_plan, toy_dataset):
    width = toy_dataset.m - toy_dataset.d
    assert 0.0 <= toy_plan.r_opt <= width
    assert np.isfinite(toy_plan.log_sup)


def test_r_opt_zero_when_no_ties(unit_params):
    # all values distinct in every group: m == n == sum n_i, m - d width
    ds = ingest_groups([[1.0, 2.0], [3.0, 4.0]])
    assert ds.m == ds.n
    plan = exact.build_plan(ds, unit_params)
    assert 0.0 <= plan.r_opt <= ds.m - ds.d
    # single observation per group leaves no slack at all
    ds1 = ingest_groups([[1.0], [2.0]])
    plan1 = exact.build_plan(ds1, unit_params)
    assert plan1.r_opt == 0.0


def test_log_ratio_bounded_by_log_sup(toy_plan):
    rng = stream(7, "bound")
    for _ in range(500):
        t = rng.gamma(toy_plan.alpha0 + toy_plan.r_opt, 1.0 / toy_plan.rate)
        assert toy_plan.log_ratio(t) <= toy_plan.log_sup + 1e-9


def test_log_r_asymptote(toy_plan):
    np.testing.assert_allclose(toy_plan.log_R(1e9), toy_plan.log_asymptote,
                               rtol=1e-6)


def test_exact_sampler_matches_quadrature(toy_plan, toy_dataset, unit_params):
    mean, var = _density_moments(toy_plan)
    rng = stream(8, "exact")
    draws = np.array([exact.sample_alpha_t_exact(toy_plan, rng)
                      for _ in range(20000)])
    se = draws.std() / math.sqrt(draws.size)
    assert abs(draws.mean() - mean) < 3.5 * se
    assert abs(draws.var() - var) / var < 0.1
    assert toy_plan.bound_violations == 0
    assert 0.0 < toy_plan.acceptance_rate() <= 1.0


def test_ars_matches_plain_rejection(toy_dataset, unit_params):
    plan_a = exact.build_plan(toy_dataset, unit_params)
    plan_b = exact.build_plan(toy_dataset, unit_params)
    rng = stream(9, "ars")
    env = None
    ars_draws = []
    for _ in range(5000):
        val, env, flagged = exact.ars_sample_alpha_t(plan_a, rng, env)
        ars_draws.append(val)
        assert not flagged
    rng2 = stream(10, "plain")
    plain = np.array([exact.sample_alpha_t_exact(plan_b, rng2)
                      for _ in range(5000)])
    assert stats.ks_2samp(ars_draws, plain).pvalue > 0.01
    # the adapted envelope should accept at least as often as plain rejection
    assert plan_a.tracker.rate("ars") >= plan_b.tracker.rate("alpha_t")


def test_ars_envelope_dominates_density(toy_dataset, unit_params):
    plan = exact.build_plan(toy_dataset, unit_params)
    env = exact.make_ars_envelope(plan)
    rng = stream(11, "dom")
    for t in rng.uniform(0.01, 30.0, size=200):
        assert env.value(t) >= exact._log_f_alpha_t(plan, t) - 1e-9
    assert not env.concavity_violation()


def test_budget_exceeded_surfaces(toy_dataset, unit_params):
    plan = exact.build_plan(toy_dataset, unit_params)
    plan.log_sup += 50.0  # make acceptance essentially impossible
    plan.budget = 200
    with pytest.raises(BudgetExceeded):
        exact.sample_alpha_t_exact(plan, stream(12, "budget"))


def test_bound_violation_counter(toy_dataset, unit_params):
    plan = exact.build_plan(toy_dataset, unit_params)
    plan.log_sup -= 5.0  # deliberately broken bound
    exact.sample_alpha_t_exact(plan, stream(13, "broken"))
    assert plan.bound_violations > 0


def test_exact_draw_structure(toy_plan, toy_dataset, unit_params):
    rng = stream(14, "draw")
    draw = exact.exact_draw(toy_plan, toy_dataset, unit_params, rng)
    assert draw.u.shape == (toy_dataset.d,)
    assert draw.alpha_j0.shape == (toy_dataset.k,)
    assert draw.jumps.shape == (toy_dataset.d, toy_dataset.k)
    assert draw.lam > unit_params.b0 / unit_params.alpha
    assert np.all(draw.jumps > 0) and np.all(draw.alpha_j0 > 0)


def test_plan_summary_and_dump(tmp_path, toy_plan):
    summary = toy_plan.summary()
    assert {"r_opt", "t_star", "log_sup", "m", "n"} <= set(summary)
    path = tmp_path / "plan.json"
    toy_plan.dump_json(path, lam=2.0)
    import json

    payload = json.loads(path.read_text())
    assert "mixture_weights" in payload
    for w in payload["mixture_weights"]:
        assert abs(sum(w) - 1.0) < 1e-9
