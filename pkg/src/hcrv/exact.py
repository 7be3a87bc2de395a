"""Exact i.i.d. posterior sampling (rejection sampler on alpha*T).

The marginal density of alpha*T is proportional to
t^(a0-1) exp(-(b0/alpha) t) R(t), with R a ratio of degree-n polynomials
built from the convolved cycle coefficients. Proposals come from
Gamma(a0 + r, b0/alpha) and are accepted with probability proportional to
t^-r R(t); r is tuned to maximize the acceptance rate over [0, m - d].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, gammaln, logsumexp

from .coeffs import StirlingTable
from .errors import BudgetExceeded, NumericalFailure
from .mcmc import AcceptanceTracker
from .specfun import log_ascending_factorial

_LOG_T_LO, _LOG_T_HI = math.log(1e-10), math.log(1e10)


def _golden_max(f, lo, hi, tol=1e-12, max_iter=200):
    """Golden-section maximization of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol * (1 + abs(a) + abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = c if fc > fd else d
    return x, max(fc, fd)


@dataclass
class ExactSamplerPlan:
    """Precomputed rejection-sampling plan for one dataset."""

    stirling: StirlingTable
    alpha0: float
    rate: float  # proposal rate b0/alpha
    group_sizes: np.ndarray
    r_opt: float
    t_star: float  # +inf marker allowed
    log_sup: float  # log sup_t t^-r R(t)
    log_asymptote: float  # log lim_{t->inf} R(t)
    tracker: AcceptanceTracker = field(default_factory=AcceptanceTracker)
    budget: int = 10**6
    bound_violations: int = 0

    def log_R(self, t):
        """log R(t); finite for every t > 0."""
        tab = self.stirling
        h = tab.m + np.arange(tab.log_c.size)
        log_num = logsumexp(tab.log_c - self._log_af_alpha0 + h * math.log(t))
        log_den = sum(
            log_ascending_factorial(t, int(ni)) for ni in self.group_sizes
        )
        return float(log_num - log_den)

    @property
    def _log_af_alpha0(self):
        h = self.stirling.m + np.arange(self.stirling.log_c.size)
        return gammaln(self.alpha0 + h) - gammaln(self.alpha0)

    def log_ratio(self, t):
        """log of t^-r R(t); compared against log_sup at acceptance time."""
        return -self.r_opt * math.log(t) + self.log_R(t)

    def acceptance_rate(self):
        return self.tracker.rate("alpha_t")

    def summary(self):
        return {
            "r_opt": self.r_opt,
            "t_star": self.t_star,
            "log_sup": self.log_sup,
            "m": self.stirling.m,
            "n": self.stirling.n,
            "proposed": self.tracker.proposed.get("alpha_t", 0),
            "accepted": self.tracker.accepted.get("alpha_t", 0),
            "bound_violations": self.bound_violations,
        }

    def dump_json(self, path, lam=None):
        payload = self.summary()
        if lam is not None:
            payload["mixture_weights"] = [
                self.stirling.mixture_weights(j, lam).tolist()
                for j in range(len(self.stirling.log_cols))
            ]
        with open(path, "w") as f:
            json.dump(payload, f)


def _sup_log_ratio(plan_like, r, grid=None):
    """Maximize -r log t + log R(t); returns (log t*, value, at_infinity)."""
    f = lambda u: -r * u + plan_like.log_R(math.exp(u))
    if grid is None:
        grid = np.linspace(_LOG_T_LO, _LOG_T_HI, 160)
    vals = np.array([f(u) for u in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    u_star, v_star = _golden_max(f, lo, hi, tol=1e-10)
    if r <= 1e-12:
        # R may increase to its horizontal asymptote c_n / ((a0))_n
        v_inf = plan_like.log_asymptote
        if v_inf >= v_star:
            return math.inf, v_inf, True
    if not np.isfinite(v_star):
        raise NumericalFailure("no finite maximizer for t^-r R(t)")
    return u_star, v_star, False


def build_plan(dataset, params, budget=10**6):
    """Compute coefficients, the optimal r, and the rejection bound."""
    table = StirlingTable.from_counts(dataset.counts)
    m, d = table.m, dataset.d
    h = table.m + np.arange(table.log_c.size)
    log_af = gammaln(params.alpha0 + h) - gammaln(params.alpha0)
    plan = ExactSamplerPlan(
        stirling=table,
        alpha0=params.alpha0,
        rate=params.b0 / params.alpha,
        group_sizes=np.asarray(dataset.group_sizes),
        r_opt=0.0,
        t_star=math.inf,
        log_sup=0.0,
        log_asymptote=float(table.log_c[-1] - log_af[-1]),
        budget=budget,
    )
    width = m - d
    log_rate = math.log(plan.rate)

    def objective(r):
        _, log_sup, _ = _sup_log_ratio(plan, r)
        return (-log_sup + (params.alpha0 + r) * log_rate
                - gammaln(params.alpha0 + r))

    if width <= 0:
        r_opt = 0.0
    else:
        r_opt, _ = _golden_max(objective, 0.0, float(width), tol=1e-8)
        # interior stationary-point refinement of the digamma identity
        resid = lambda r: (_sup_log_ratio(plan, r)[0] + log_rate
                           - digamma(params.alpha0 + r))
        if 1e-6 < r_opt < width - 1e-6:
            lo, hi = max(r_opt - 0.5, 1e-9), min(r_opt + 0.5, width - 1e-9)
            rl, rh = resid(lo), resid(hi)
            if np.isfinite(rl) and np.isfinite(rh) and rl * rh < 0:
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    rm = resid(mid)
                    if rl * rm <= 0:
                        hi, rh = mid, rm
                    else:
                        lo, rl = mid, rm
                r_ref = 0.5 * (lo + hi)
                if objective(r_ref) >= objective(r_opt):
                    r_opt = r_ref
        for r_b in (0.0, float(width)):
            if objective(r_b) > objective(r_opt):
                r_opt = r_b
    u_star, log_sup, at_inf = _sup_log_ratio(plan, r_opt)
    plan.r_opt = float(r_opt)
    plan.t_star = math.inf if at_inf else math.exp(u_star)
    plan.log_sup = float(log_sup)
    return plan


def sample_alpha_t_exact(plan, rng):
    """Exact draw of alpha*T by rejection from Gamma(a0 + r, b0/alpha)."""
    shape = plan.alpha0 + plan.r_opt
    scale = 1.0 / plan.rate
    for _ in range(plan.budget):
        t = rng.gamma(shape, scale)
        if t <= 0:
            continue
        log_acc = plan.log_ratio(t) - plan.log_sup
        if log_acc > 1e-9:
            plan.bound_violations += 1
        accept = log_acc >= 0 or math.log(rng.random()) < log_acc
        plan.tracker.record("alpha_t", accept)
        if accept:
            return float(t)
    raise BudgetExceeded(
        f"no acceptance within {plan.budget} proposals (pathological dataset)"
    )


class _ArsEnvelope:
    """Piecewise-linear upper hull (tangent construction) for log f."""

    def __init__(self, xs, h, hprime):
        xs = np.asarray(sorted(xs), dtype=float)
        self.h, self.hprime = h, hprime
        self.x = xs
        self.hx = np.array([h(x) for x in xs])
        self.dx = np.array([hprime(x) for x in xs])
        self._rebuild()

    def _rebuild(self):
        x, hx, dx = self.x, self.hx, self.dx
        # intersection of consecutive tangents
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (hx[1:] - hx[:-1] - x[1:] * dx[1:] + x[:-1] * dx[:-1]) / (
                dx[:-1] - dx[1:]
            )
        z = np.clip(z, x[:-1], x[1:])
        self.z = np.concatenate(([0.0], z, [math.inf]))
        # log mass of each exponential segment
        logm = np.empty(x.size)
        for i in range(x.size):
            a, b = self.z[i], self.z[i + 1]
            s = dx[i]
            c = hx[i] - s * x[i]
            if s == 0:
                logm[i] = c + math.log(b - a) if math.isfinite(b) else math.inf
            elif math.isinf(b):
                logm[i] = c + s * a - math.log(-s) if s < 0 else math.inf
            else:
                hi_v, lo_v = max(s * a, s * b), min(s * a, s * b)
                logm[i] = c + hi_v + math.log1p(-math.exp(lo_v - hi_v)) - math.log(abs(s))
        self.logm = logm
        self.logtot = logsumexp(logm)

    def value(self, t):
        i = int(np.searchsorted(self.z, t) - 1)
        i = min(max(i, 0), self.x.size - 1)
        return self.hx[i] + self.dx[i] * (t - self.x[i])

    def sample(self, rng):
        w = np.exp(self.logm - self.logtot)
        i = rng.choice(w.size, p=w / w.sum())
        a, b = self.z[i], self.z[i + 1]
        s = self.dx[i]
        u = rng.random()
        if s == 0:
            return a + u * (b - a)
        if math.isinf(b):
            return a + math.log1p(-u) / s  # s < 0 here
        # inverse cdf of exp(s t) on [a, b]
        return a + math.log1p(u * (math.exp(s * (b - a)) - 1.0)) / s

    def insert(self, t):
        if np.any(np.isclose(self.x, t)):
            return
        i = int(np.searchsorted(self.x, t))
        self.x = np.insert(self.x, i, t)
        self.hx = np.insert(self.hx, i, self.h(t))
        self.dx = np.insert(self.dx, i, self.hprime(t))
        self._rebuild()

    def concavity_violation(self, tol=1e-8):
        """True if slopes increase anywhere beyond tolerance."""
        return bool(np.any(np.diff(self.dx) > tol))


def _log_f_alpha_t(plan, t):
    return (plan.alpha0 - 1) * math.log(t) - plan.rate * t + plan.log_R(t)


def _dlog_f_alpha_t(plan, t):
    tab = plan.stirling
    h = tab.m + np.arange(tab.log_c.size)
    logw = tab.log_c - plan._log_af_alpha0 + h * math.log(t)
    w = np.exp(logw - logsumexp(logw))
    e_h = float(np.dot(w, h))
    out = (plan.alpha0 - 1) / t - plan.rate + e_h / t
    out -= float(np.sum(digamma(t + plan.group_sizes) - digamma(t)))
    return out


def make_ars_envelope(plan):
    """Initial three-point envelope bracketing the mode of log f."""
    f = lambda u: _log_f_alpha_t(plan, math.exp(u))
    grid = np.linspace(_LOG_T_LO, _LOG_T_HI, 120)
    vals = [f(u) for u in grid]
    u0 = grid[int(np.argmax(vals))]
    mode, _ = _golden_max(f, u0 - 0.5, u0 + 0.5, tol=1e-8)
    mode = math.exp(mode)
    h = lambda t: _log_f_alpha_t(plan, t)
    hp = lambda t: _dlog_f_alpha_t(plan, t)
    left, right = mode * 0.5, mode * 2.0
    for _ in range(200):
        if hp(left) > 0:
            break
        left *= 0.5
    for _ in range(200):
        if hp(right) < 0:
            break
        right *= 2.0
    return _ArsEnvelope([left, mode, right], h, hp)


def ars_sample_alpha_t(plan, rng, envelope=None, refresh_threshold=0.8):
    """Adaptive-rejection draw of alpha*T with a log-concavity guard.

    The envelope gains a point only when the acceptance probability drops
    below `refresh_threshold`. If the slopes show a convexity violation the
    draw falls back to the plain rejection sampler, never returning a wrong
    sample. Returns (value, envelope, concavity_flag).
    """
    if envelope is None:
        envelope = make_ars_envelope(plan)
    if envelope.concavity_violation():
        plan.tracker.record("ars_fallback", True)
        return sample_alpha_t_exact(plan, rng), envelope, True
    for _ in range(plan.budget):
        t = envelope.sample(rng)
        if t <= 0:
            continue
        log_acc = _log_f_alpha_t(plan, t) - envelope.value(t)
        if log_acc > 1e-7:
            # envelope fails to dominate: log-concavity broken here
            envelope.insert(t)
            plan.tracker.record("ars_fallback", True)
            return sample_alpha_t_exact(plan, rng), envelope, True
        accept = math.log(rng.random()) < log_acc
        plan.tracker.record("ars", accept)
        if math.exp(min(log_acc, 0.0)) < refresh_threshold:
            envelope.insert(t)
        if accept:
            return float(t), envelope, False
    raise BudgetExceeded("adaptive rejection exceeded the proposal budget")


@dataclass
class LatentDraw:
    alpha_t: float
    u: np.ndarray  # (d,) U_i / b
    lam: float
    alpha_j0: np.ndarray  # (k,)
    jumps: np.ndarray  # (d, k)


def exact_draw(plan, dataset, params, rng, method="rejection", envelope=None):
    """One i.i.d. draw of (alpha*T, U, lambda, alpha*J_0, J)."""
    if method == "ars":
        alpha_t, envelope, _ = ars_sample_alpha_t(plan, rng, envelope)
    else:
        alpha_t = sample_alpha_t_exact(plan, rng)
    d, k = dataset.d, dataset.k
    beta = rng.gamma(alpha_t, 1.0, size=d)
    u = rng.gamma(dataset.group_sizes, 1.0 / beta)
    lam = params.b0 / params.alpha + float(np.sum(np.log1p(u)))
    alpha_j0 = np.empty(k)
    for j in range(k):
        w = plan.stirling.mixture_weights(j, lam)
        hj = plan.stirling.h_mins[j] + rng.choice(w.size, p=w)
        alpha_j0[j] = rng.gamma(hj, 1.0 / lam)
    rate = params.b * (1.0 + u)
    jumps = rng.gamma(dataset.counts + alpha_j0[None, :], 1.0 / rate[:, None])
    draw = LatentDraw(alpha_t=float(alpha_t), u=u, lam=lam,
                      alpha_j0=alpha_j0, jumps=jumps)
    return (draw, envelope) if method == "ars" else draw
