import numpy as np
import pytest
from scipy import stats

from hcrv import exact, measures
from hcrv.data import BaseMeasure, ModelParams, ingest_groups
from hcrv.rng import stream
from hcrv.specfun import exp_integral_e1


@pytest.fixture(scope="module")
def toy_draw(toy_dataset, unit_params):
    plan = exact.build_plan(toy_dataset, unit_params)
    return exact.exact_draw(plan, toy_dataset, unit_params, stream(20, "md"))


def test_root_jumps_decreasing_and_tail_identity(unit_params):
    lam, alpha0, alpha, L = 2.0, 1.5, 1.3, 50
    rng = stream(21, "fk")
    jumps, _ = measures.ferguson_klass_root(lam, alpha0, alpha, L, rng)
    assert jumps.shape == (L,)
    assert np.all(np.diff(jumps) < 0)
    # replay the arrival times from the identical stream: the tail integral
    # alpha0 E1(alpha lam omega) must equal the Poisson arrival time
    rng2 = stream(21, "fk")
    xi = np.cumsum(rng2.exponential(1.0, size=L))
    omega = jumps / alpha
    np.testing.assert_allclose(alpha0 * np.array(
        [exp_integral_e1(alpha * lam * w) for w in omega]), xi, rtol=1e-9)


def test_root_mass_distribution(unit_params):
    # untruncated residual root mass is Gamma(alpha0, rate alpha * lam)
    lam = 3.0
    rng = stream(22, "mass")
    masses = np.array([
        measures.residual_total_mass(np.array([0.5, 1.0]), lam, unit_params,
                                     rng)[1]
        for _ in range(10000)
    ])
    cdf = stats.gamma(unit_params.alpha0,
                      scale=1.0 / (unit_params.alpha * lam)).cdf
    assert stats.kstest(masses, cdf).pvalue > 0.01


def test_group_jumps_shapes(toy_draw, toy_dataset, unit_params):
    rng = stream(23, "gj")
    root = np.array([0.5, 0.2, 0.1])
    out = measures.sample_group_jumps(root, toy_draw.u, unit_params.b, rng)
    assert out.shape == (toy_dataset.d, 3)
    assert np.all(out > 0)


def test_materialize_and_normalize(toy_draw, toy_dataset, unit_params):
    rng = stream(24, "mat")
    atoms = measures.materialize_atoms(toy_draw, toy_dataset, unit_params,
                                       rng, L=40)
    assert atoms.fixed_jumps.shape == (toy_dataset.d, toy_dataset.k)
    assert atoms.root_residual.shape == (40,)
    weights = measures.normalized_weights(atoms, toy_dataset, rng)
    np.testing.assert_allclose(weights.totals(), 1.0, rtol=1e-12)
    assert np.all(weights.fixed >= 0) and np.all(weights.residual >= 0)


def test_normalized_weights_dirichlet_moments(toy_draw, toy_dataset,
                                              unit_params):
    rng = stream(25, "dirmom")
    atoms = measures.materialize_atoms(toy_draw, toy_dataset, unit_params,
                                       rng, L=20)
    draws = np.array([
        measures.normalized_weights(atoms, toy_dataset, rng).fixed[0, 0]
        for _ in range(4000)
    ])
    conc = np.concatenate([
        toy_dataset.counts[0] + toy_draw.alpha_j0, atoms.root_residual])
    expected = conc[0] / conc.sum()
    se = draws.std() / np.sqrt(draws.size)
    assert abs(draws.mean() - expected) < 4 * se


def test_posterior_random_mean_range(toy_draw, toy_dataset, unit_params):
    rng = stream(26, "prm")
    atoms = measures.materialize_atoms(toy_draw, toy_dataset, unit_params,
                                       rng, L=40)
    weights = measures.normalized_weights(atoms, toy_dataset, rng)
    means = measures.posterior_random_mean(weights, atoms)
    assert means.shape == (toy_dataset.d,)
    lo = min(atoms.fixed_atoms.min(), atoms.residual_atoms.min())
    hi = max(atoms.fixed_atoms.max(), atoms.residual_atoms.max())
    assert np.all((means >= lo) & (means <= hi))


def test_scale_parameter_invariance():
    """The normalized weights' law must not depend on b."""
    groups = [[0.0, 0.0, 1.0, 2.0], [1.0, 1.0, 3.0]]
    ds = ingest_groups(groups)

    def pipeline(b, seed):
        params = ModelParams(alpha=1.2, alpha0=0.8, b=b, b0=1.0,
                             base_measure=BaseMeasure("normal"))
        plan = exact.build_plan(ds, params)
        rng = stream(seed, "scale", str(b))
        out = []
        for _ in range(3000):
            draw = exact.exact_draw(plan, ds, params, rng)
            atoms = measures.materialize_atoms(draw, ds, params, rng, L=25)
            out.append(measures.normalized_weights(atoms, ds, rng).fixed[0, 0])
        return np.array(out)

    w1 = pipeline(1.0, 27)
    w7 = pipeline(7.0, 28)
    assert stats.ks_2samp(w1, w7).pvalue > 0.01


def test_prior_simulation_mean(unit_params):
    rng = stream(29, "prior")
    p = np.array([
        measures.simulate_prior_group_probs(unit_params, 0.3, 2, 400, rng)
        for _ in range(600)
    ])
    assert abs(p.mean() - 0.3) < 0.02
