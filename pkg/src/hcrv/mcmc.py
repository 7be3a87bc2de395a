"""Metropolis-within-Gibbs sampler on the (2k+1)-dimensional latent state.

One sweep updates the simplex pairs (V_0, V_j), the total-mass variable
alpha*T, the per-group latents, the base jumps alpha*J_0j, and finally the
fixed-location jumps J_ij, in that order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .specfun import log_ascending_factorial, log_ascending_factorial_vec


@dataclass
class ProposalConfig:
    kind: str = "log-walk"  # "gamma" or "log-walk"
    delta: float = 2.0  # gamma proposal concentration, >= 1
    sigma: float = 0.5  # log-walk step sd
    j0_steps: int = 25  # inner MH iterations per alpha*J_0j update
    j0_sigma: float = 1.5  # log-walk sd for the alpha*J_0j inner kernel

    def __post_init__(self):
        if self.kind not in ("gamma", "log-walk"):
            raise ValueError(f"unknown proposal kind {self.kind!r}")
        if self.kind == "gamma" and self.delta < 1:
            raise ValueError("gamma proposal requires delta >= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.j0_steps < 1:
            raise ValueError("j0_steps must be at least 1")
        if self.j0_sigma <= 0:
            raise ValueError("j0_sigma must be positive")


@dataclass
class LatentState:
    """Chain state: alpha*T, simplex vector V, base jumps alpha*J_0j.

    Derived per sweep: scaled group latents b*beta_i and U_i/b, and the
    tilted rate lambda(U) = b0/alpha + sum_i log(1 + U_i/b).
    """

    alpha_t: float
    v: np.ndarray  # (k+1,), v[0] = V_0, sums to 1
    alpha_j0: np.ndarray  # (k,)
    beta: np.ndarray | None = None  # (d,) scaled b*beta_i
    u: np.ndarray | None = None  # (d,) scaled U_i/b
    lam: float | None = None

    @property
    def dimension(self):
        return 2 * self.v.size - 1  # 2k + 1


@dataclass
class AcceptanceTracker:
    proposed: dict = field(default_factory=dict)
    accepted: dict = field(default_factory=dict)

    def record(self, key, accepted):
        self.proposed[key] = self.proposed.get(key, 0) + 1
        if accepted:
            self.accepted[key] = self.accepted.get(key, 0) + 1

    def rate(self, key):
        p = self.proposed.get(key, 0)
        return self.accepted.get(key, 0) / p if p else float("nan")


def log_target_alpha_t(t, v, dataset, params):
    """Log full conditional of alpha*T given the simplex vector V."""
    if t <= 0:
        return -np.inf
    a0, b0a = params.alpha0, params.b0 / params.alpha
    counts = dataset.counts
    vj = v[1:]
    out = (a0 - 1) * np.log(t) - b0a * t
    mask = counts > 0
    tv = np.broadcast_to(t * vj, counts.shape)
    out += float(np.sum(log_ascending_factorial_vec(tv[mask], counts[mask])))
    for ni in dataset.group_sizes:
        out -= log_ascending_factorial(t, int(ni))
    return out


def log_target_alpha_j0(t, counts_col, lam):
    """Log full conditional of alpha*J_0j given lambda(U)."""
    if t <= 0:
        return -np.inf
    out = -lam * t - np.log(t)
    for nij in counts_col:
        if nij > 0:
            out += log_ascending_factorial(t, int(nij))
    return out


def _mh_positive(x, logf, cfg, rng):
    """One MH step for a positive scalar with target log-density logf."""
    if cfg.kind == "gamma":
        delta = cfg.delta
        xs = rng.gamma(delta, x / delta)
        if xs <= 0:
            return x, False
        corr = (2 * delta - 1) * (np.log(x) - np.log(xs)) + delta * (xs / x - x / xs)
    else:
        eps = rng.normal(0.0, cfg.sigma)
        xs = x * np.exp(eps)
        corr = eps
    log_ratio = logf(xs) - logf(x) + corr
    if log_ratio >= 0 or np.log(rng.random()) < log_ratio:
        return xs, True
    return x, False


def step_v_pair(state, j, dataset, params, rng, tracker=None):
    """MH update of the pair (V_0, V_j); the simplex sum is preserved."""
    v = state.v
    s = v[0] + v[j]
    eps = rng.random()
    while eps == 0.0:
        eps = rng.random()
    vj_new = eps * s
    v0_new = s - vj_new
    t = state.alpha_t
    counts_col = dataset.counts[:, j - 1]
    log_ratio = (params.alpha0 - 1) * (np.log(v0_new) - np.log(v[0]))
    log_ratio -= np.log(vj_new) - np.log(v[j])
    for nij in counts_col:
        if nij > 0:
            log_ratio += log_ascending_factorial(t * vj_new, int(nij))
            log_ratio -= log_ascending_factorial(t * v[j], int(nij))
    accept = log_ratio >= 0 or np.log(rng.random()) < log_ratio
    if accept:
        v[0], v[j] = v0_new, vj_new
    if tracker is not None:
        tracker.record("v", accept)
    return accept


def step_alpha_t(state, cfg, dataset, params, rng, tracker=None):
    """MH update of alpha*T from its full conditional given V."""
    logf = lambda t: log_target_alpha_t(t, state.v, dataset, params)
    state.alpha_t, accept = _mh_positive(state.alpha_t, logf, cfg, rng)
    if tracker is not None:
        tracker.record("alpha_t", accept)
    return accept


def step_alpha_j0(state, j, cfg, dataset, rng, tracker=None):
    """Update alpha*J_0j; exact gamma draw when the column has no ties."""
    counts_col = dataset.counts[:, j]
    lam = state.lam
    if np.all(counts_col <= 1):
        total = int(counts_col.sum())
        state.alpha_j0[j] = rng.gamma(total, 1.0 / lam)
        if tracker is not None:
            tracker.record("alpha_j0_exact", True)
        return True
    logf = lambda t: log_target_alpha_j0(t, counts_col, lam)
    # The rate lambda is refreshed every sweep, so a single MH step would
    # leave the pair (lambda, alpha*J_0j) out of equilibrium when the
    # fixed-location jumps are drawn; a short inner loop with a wide
    # log-walk kernel lets the update forget its starting point first.
    inner = ProposalConfig("log-walk", sigma=cfg.j0_sigma,
                           j0_steps=cfg.j0_steps, j0_sigma=cfg.j0_sigma)
    accept = False
    for _ in range(cfg.j0_steps):
        state.alpha_j0[j], acc = _mh_positive(state.alpha_j0[j], logf, inner, rng)
        accept = accept or acc
        if tracker is not None:
            tracker.record("alpha_j0", acc)
    return accept


def gibbs_sweep(state, cfg, dataset, params, rng, tracker=None):
    """One full sweep; returns the d x k matrix of fixed-location jumps."""
    k = dataset.k
    for j in range(1, k + 1):
        step_v_pair(state, j, dataset, params, rng, tracker)
    step_alpha_t(state, cfg, dataset, params, rng, tracker)
    n_i = dataset.group_sizes
    state.beta = rng.gamma(state.alpha_t, 1.0, size=dataset.d)
    state.u = rng.gamma(n_i, 1.0 / state.beta)
    state.lam = params.b0 / params.alpha + float(np.sum(np.log1p(state.u)))
    for j in range(k):
        step_alpha_j0(state, j, cfg, dataset, rng, tracker)
    rate = params.b * (1.0 + state.u)  # = b + U_i
    shapes = dataset.counts + state.alpha_j0[None, :]
    jumps = rng.gamma(shapes, 1.0 / rate[:, None])
    return jumps


def init_state(dataset, params, rng):
    """Deterministic-prior initialization of the chain state."""
    k = dataset.k
    v = np.full(k + 1, 1.0 / (k + 1))
    alpha_t = params.alpha0 * params.alpha / params.b0
    beta = rng.gamma(max(alpha_t, 1e-3), 1.0, size=dataset.d)
    u = rng.gamma(dataset.group_sizes, 1.0 / beta)
    lam = params.b0 / params.alpha + float(np.sum(np.log1p(u)))
    alpha_j0 = dataset.column_totals / lam
    return LatentState(alpha_t=alpha_t, v=v, alpha_j0=alpha_j0.astype(float),
                       beta=beta, u=u, lam=lam)


@dataclass
class ChainOutput:
    alpha_t: np.ndarray  # (draws,)
    v: np.ndarray  # (draws, k+1)
    alpha_j0: np.ndarray  # (draws, k)
    lam: np.ndarray  # (draws,)
    u: np.ndarray  # (draws, d)
    jumps: np.ndarray  # (draws, d, k)
    tracker: AcceptanceTracker


def run_chain(dataset, params, cfg=None, draws=1000, burnin=100, thin=10,
              rng=None, state=None):
    """Run the Metropolis-within-Gibbs chain and return thinned draws."""
    cfg = cfg or ProposalConfig()
    rng = rng if rng is not None else np.random.default_rng()
    state = state or init_state(dataset, params, rng)
    tracker = AcceptanceTracker()
    for _ in range(burnin):
        gibbs_sweep(state, cfg, dataset, params, rng)
    tracker = AcceptanceTracker()
    k, d = dataset.k, dataset.d
    out = ChainOutput(
        alpha_t=np.empty(draws), v=np.empty((draws, k + 1)),
        alpha_j0=np.empty((draws, k)), lam=np.empty(draws),
        u=np.empty((draws, d)), jumps=np.empty((draws, d, k)), tracker=tracker,
    )
    for s in range(draws):
        for _ in range(thin):
            jumps = gibbs_sweep(state, cfg, dataset, params, rng, tracker)
        out.alpha_t[s] = state.alpha_t
        out.v[s] = state.v
        out.alpha_j0[s] = state.alpha_j0
        out.lam[s] = state.lam
        out.u[s] = state.u
        out.jumps[s] = jumps
    return out
