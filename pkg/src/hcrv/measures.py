"""Posterior random-measure materialization and functionals.

The residual (non-fixed-atom) part of each posterior random measure is a
hierarchy of gamma CRMs: the root is truncated to its L largest jumps by
inverting the exponential-integral tail integral at unit-rate Poisson
arrival times, while total masses are sampled exactly so the truncation
affects atom placement only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfun import inverse_e1_vec


@dataclass
class PosteriorAtoms:
    """One complete posterior draw of the d random measures."""

    fixed_jumps: np.ndarray  # (d, k) J_ij
    fixed_atoms: np.ndarray  # (k,) distinct values
    root_residual: np.ndarray  # (L,) decreasing jumps alpha*omega_0l
    residual_atoms: np.ndarray  # (L,) Y_l from P0
    group_residual: np.ndarray  # (d, L) omega_il
    residual_masses: np.ndarray  # (d,) exact untruncated masses
    latent: object  # LatentDraw snapshot


@dataclass
class NormalizedWeights:
    """Per-group simplex over k fixed atoms and L residual atoms."""

    fixed: np.ndarray  # (d, k)
    residual: np.ndarray  # (d, L)

    def totals(self):
        return self.fixed.sum(axis=1) + self.residual.sum(axis=1)


def ferguson_klass_root(lam, alpha0, alpha, L, rng, base_sampler=None):
    """Largest-L jumps alpha*omega_0l of the root gamma CRM, plus atoms.

    Solves E1(alpha lam omega_0l) = xi_l / alpha0 at the arrival times
    xi_l of a unit-rate Poisson process; each Newton solve warm-starts at
    the previous (larger) jump.
    """
    xi = np.cumsum(rng.exponential(1.0, size=L))
    jumps = inverse_e1_vec(xi / alpha0) / (alpha * lam)
    atoms = base_sampler.sample(L, rng) if base_sampler is not None else np.full(L, np.nan)
    return alpha * jumps, atoms


def sample_group_jumps(root_jumps, u, b, rng):
    """omega_il ~ Gamma(alpha omega_0l, b(1 + U_i/b)), per group and atom."""
    rate = b * (1.0 + np.asarray(u))  # (d,)
    shapes = np.broadcast_to(root_jumps, (rate.size, root_jumps.size))
    return rng.gamma(shapes, 1.0 / rate[:, None])


def residual_total_mass(u, lam, params, rng):
    """Exact residual masses: root Gamma(a0, alpha lam), then per group."""
    root_mass = rng.gamma(params.alpha0, 1.0 / (params.alpha * lam))
    rate = params.b * (1.0 + np.asarray(u))
    masses = rng.gamma(params.alpha * root_mass, 1.0 / rate)
    return masses, float(root_mass)


def materialize_atoms(draw, dataset, params, rng, L=1000, base_sampler=None):
    """Complete a latent draw into a PosteriorAtoms record."""
    base_sampler = base_sampler or params.base_measure
    root, atoms = ferguson_klass_root(draw.lam, params.alpha0, params.alpha,
                                      L, rng, base_sampler)
    group = sample_group_jumps(root, draw.u, params.b, rng)
    masses, _ = residual_total_mass(draw.u, draw.lam, params, rng)
    return PosteriorAtoms(
        fixed_jumps=draw.jumps, fixed_atoms=np.asarray(dataset.distinct),
        root_residual=root, residual_atoms=atoms, group_residual=group,
        residual_masses=masses, latent=draw,
    )


def normalized_weights(atoms, dataset, rng):
    """Per-group Dirichlet draw of the posterior probability weights.

    The (k+L)-dimensional concentration is (n_i1 + alpha J_01, ...,
    n_ik + alpha J_0k, alpha omega_01, ..., alpha omega_0L); groups are
    conditionally independent given the base jumps and the root residual.
    """
    d, k = dataset.d, dataset.k
    L = atoms.root_residual.size
    alpha_j0 = atoms.latent.alpha_j0
    fixed = np.empty((d, k))
    residual = np.empty((d, L))
    conc_tail = atoms.root_residual
    for i in range(d):
        conc = np.concatenate([dataset.counts[i] + alpha_j0, conc_tail])
        w = rng.dirichlet(conc)
        fixed[i] = w[:k]
        residual[i] = w[k:]
    return NormalizedWeights(fixed=fixed, residual=residual)


def posterior_random_mean(weights, atoms):
    """Per-group mean of the posterior random probability."""
    fixed_part = weights.fixed @ atoms.fixed_atoms
    residual_part = weights.residual @ atoms.residual_atoms
    return fixed_part + residual_part


def simulate_prior_group_probs(params, p0a, d, L, rng):
    """One prior replicate of (P_1(A), ..., P_d(A)) by truncation.

    The root gamma CRM (shape a0, rate b0) is truncated to L jumps; atom
    membership in A is Bernoulli(p0a). Group measures put independent
    Gamma(alpha omega_0l, b) masses on the shared atoms.
    """
    xi = np.cumsum(rng.exponential(1.0, size=L))
    root = inverse_e1_vec(xi / params.alpha0) / params.b0
    in_a = rng.random(L) < p0a
    # summing the independent gamma masses inside and outside A gives a
    # beta ratio per group, which avoids underflow at tiny shapes
    s_in = params.alpha * root[in_a].sum()
    s_out = params.alpha * root[~in_a].sum()
    if s_in == 0.0:
        return np.zeros(d)
    if s_out == 0.0:
        return np.ones(d)
    return rng.beta(s_in, s_out, size=d)
