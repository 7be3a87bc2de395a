"""Reference marginal Gibbs sampler: Chinese restaurant franchise.

Observations are draws from the random probabilities themselves, so each
table serves exactly the dish equal to its customers' shared value and a
customer can only sit at a table serving their own value. The group-level
concentration is either fixed or carries a gamma prior, in which case this
sampler targets the same posterior as the table-free algorithms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import ModeError


@dataclass
class FranchiseState:
    """Table bookkeeping for d restaurants sharing k dishes."""

    d: int
    k: int
    counts: np.ndarray  # (d, k) observation counts
    tables: list  # tables[i][j] = list of customer counts
    assign: list  # assign[i][j] = table index per customer
    concentration: float  # group-level, random in gamma mode
    alpha0: float  # franchise-level concentration
    mode: str = "gamma"  # "gamma" or "fixed"
    prior_shape: float = 1.0
    prior_rate: float = 1.0

    @classmethod
    def init(cls, dataset, params, mode="gamma", concentration=None, rng=None):
        """Start with one table per non-empty (group, dish) cell."""
        d, k = dataset.d, dataset.k
        tables = [[[] for _ in range(k)] for _ in range(d)]
        assign = [[[] for _ in range(k)] for _ in range(d)]
        for i in range(d):
            for j in range(k):
                nij = int(dataset.counts[i, j])
                if nij > 0:
                    tables[i][j] = [nij]
                    assign[i][j] = [0] * nij
        prior_shape = params.alpha0
        prior_rate = params.b0 / params.alpha
        if concentration is None:
            if mode == "gamma":
                rng = rng if rng is not None else np.random.default_rng()
                concentration = rng.gamma(prior_shape, 1.0 / prior_rate)
            else:
                concentration = params.alpha
        return cls(d=d, k=k, counts=np.asarray(dataset.counts), tables=tables,
                   assign=assign, concentration=float(concentration),
                   alpha0=params.alpha0, mode=mode,
                   prior_shape=prior_shape, prior_rate=prior_rate)

    def dish_table_counts(self):
        """M_j = number of tables serving dish j across the franchise."""
        M = np.zeros(self.k, dtype=int)
        for i in range(self.d):
            for j in range(self.k):
                M[j] += sum(1 for c in self.tables[i][j] if c > 0)
        return M

    def tables_per_group(self):
        return np.array(
            [sum(len([c for c in tj if c > 0]) for tj in self.tables[i])
             for i in range(self.d)]
        )

    def audit(self):
        """Raise AssertionError on any bookkeeping violation."""
        for i in range(self.d):
            for j in range(self.k):
                n_ij = int(self.counts[i, j])
                assert sum(self.tables[i][j]) == n_ij
                assert len(self.assign[i][j]) == n_ij
                assert all(c >= 1 for c in self.tables[i][j])
        M = self.dish_table_counts()
        assert np.all(M[self.counts.sum(axis=0) > 0] >= 1)


def crf_gibbs_sweep(state, rng):
    """Resample every customer's table by the franchise predictive rule."""
    alpha = state.concentration
    a0 = state.alpha0
    M = state.dish_table_counts()
    M_tot = int(M.sum())
    for i in range(state.d):
        for j in range(state.k):
            n_ij = int(state.counts[i, j])
            if n_ij == 0:
                continue
            tabs = state.tables[i][j]
            asg = state.assign[i][j]
            for c in range(n_ij):
                t_old = asg[c]
                tabs[t_old] -= 1
                if tabs[t_old] == 0:
                    M[j] -= 1
                    M_tot -= 1
                # weights: occupied tables of (i, j), then a new table
                w = [float(cnt) for cnt in tabs if cnt > 0]
                live = [t for t, cnt in enumerate(tabs) if cnt > 0]
                if M[j] > 0:
                    w_new = alpha * M[j] / (M_tot + a0)
                else:
                    w_new = alpha * a0 / (M_tot + a0)
                w.append(w_new)
                w = np.array(w)
                choice = rng.choice(w.size, p=w / w.sum())
                if choice < len(live):
                    t_new = live[choice]
                    tabs[t_new] += 1
                else:
                    # reuse an emptied slot if any, else append
                    empty = [t for t, cnt in enumerate(tabs) if cnt == 0]
                    if empty:
                        t_new = empty[0]
                        tabs[t_new] = 1
                    else:
                        t_new = len(tabs)
                        tabs.append(1)
                    M[j] += 1
                    M_tot += 1
                asg[c] = t_new
            # drop trailing empty slots, remapping assignments
            live = [t for t, cnt in enumerate(tabs) if cnt > 0]
            remap = {t: s for s, t in enumerate(live)}
            state.tables[i][j] = [tabs[t] for t in live]
            state.assign[i][j] = [remap[t] for t in asg]
    return state


def resample_concentration(state, rng, method="auxiliary"):
    """Refresh the group-level concentration from its full conditional."""
    if state.mode != "gamma":
        raise ModeError("concentration is fixed in this mode")
    n_i = state.counts.sum(axis=1)
    m_tot = int(state.tables_per_group().sum())
    a, b = state.prior_shape, state.prior_rate
    if n_i.size == 0 or n_i.sum() == 0:
        state.concentration = float(rng.gamma(a, 1.0 / b))
        return state
    alpha = state.concentration
    if method == "auxiliary":
        w = rng.beta(alpha + 1.0, n_i)
        s = rng.random(n_i.size) < n_i / (n_i + alpha)
        shape = a + m_tot - int(s.sum())
        rate = b - float(np.sum(np.log(w)))
        state.concentration = float(rng.gamma(shape, 1.0 / rate))
        return state
    # Metropolis-Hastings fallback: random walk on the log scale
    m_i = state.tables_per_group()

    def logp(x):
        return ((a - 1) * np.log(x) - b * x
                + float(np.sum(m_i * np.log(x) + gammaln(x) - gammaln(x + n_i))))

    eps = rng.normal(0.0, 0.5)
    prop = alpha * np.exp(eps)
    log_ratio = logp(prop) - logp(alpha) + eps
    if log_ratio >= 0 or np.log(rng.random()) < log_ratio:
        state.concentration = float(prop)
    return state


def posterior_weights_from_state(state, L, rng, base_sampler=None):
    """Dirichlet draw of per-group weights given the table counts.

    Global dish weights come first (Dirichlet over table counts with an
    alpha0 residual slot, stick-broken into L pieces), then each group's
    (k+L)-simplex conditionally on them. Shape matches the table-free
    samplers' output for direct comparison.
    """
    M = state.dish_table_counts()
    conc = np.concatenate([np.maximum(M, 1e-9), [state.alpha0]])
    g = rng.dirichlet(conc)
    beta, beta_u = g[: state.k], g[-1]
    # stick-break the residual into L pieces; the last keeps the remainder
    sticks = np.empty(L)
    rem = beta_u
    for ell in range(L - 1):
        v = rng.beta(1.0, state.alpha0)
        sticks[ell] = rem * v
        rem *= 1.0 - v
    sticks[L - 1] = rem
    alpha = state.concentration
    fixed = np.empty((state.d, state.k))
    residual = np.empty((state.d, L))
    for i in range(state.d):
        conc_i = np.concatenate([
            state.counts[i] + alpha * beta, np.maximum(alpha * sticks, 1e-12)
        ])
        w = rng.dirichlet(conc_i)
        fixed[i] = w[: state.k]
        residual[i] = w[state.k:]
    atoms = (base_sampler.sample(L, rng) if base_sampler is not None
             else np.full(L, np.nan))
    from .measures import NormalizedWeights

    return NormalizedWeights(fixed=fixed, residual=residual), atoms


@dataclass
class FranchiseOutput:
    concentration: np.ndarray
    tables_total: np.ndarray
    fixed_weights: np.ndarray  # (draws, d, k)
    residual_weights: np.ndarray  # (draws, d, L)
    residual_atoms: np.ndarray  # (draws, L)
    state: FranchiseState = field(repr=False, default=None)


def run_franchise(dataset, params, draws=1000, burnin=100, thin=1, rng=None,
                  mode="gamma", concentration=None, L=20,
                  concentration_method="auxiliary", base_sampler=None,
                  state=None):
    """Run the franchise sampler and emit posterior weight draws."""
    rng = rng if rng is not None else np.random.default_rng()
    if state is None:
        state = FranchiseState.init(dataset, params, mode=mode,
                                    concentration=concentration, rng=rng)
    mode = state.mode
    for _ in range(burnin):
        crf_gibbs_sweep(state, rng)
        if mode == "gamma":
            resample_concentration(state, rng, concentration_method)
    out = FranchiseOutput(
        concentration=np.empty(draws), tables_total=np.empty(draws, dtype=int),
        fixed_weights=np.empty((draws, dataset.d, dataset.k)),
        residual_weights=np.empty((draws, dataset.d, L)),
        residual_atoms=np.empty((draws, L)), state=state,
    )
    for s in range(draws):
        for _ in range(thin):
            crf_gibbs_sweep(state, rng)
            if mode == "gamma":
                resample_concentration(state, rng, concentration_method)
        weights, atoms = posterior_weights_from_state(
            state, L, rng, base_sampler or params.base_measure
        )
        out.concentration[s] = state.concentration
        out.tables_total[s] = int(state.tables_per_group().sum())
        out.fixed_weights[s] = weights.fixed
        out.residual_weights[s] = weights.residual
        out.residual_atoms[s] = atoms
    return out
