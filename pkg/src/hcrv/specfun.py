"""Special functions used throughout the samplers.

Log ascending factorial, the exponential integral E1 with a Newton inverse
in the log domain, and the generalized exponential integral E_nu for real
order nu >= 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import exp1, expn, gammaln

from .errors import DomainError, MaxIterExceeded

EULER_GAMMA = 0.5772156649015328606

# Below this argument E1 is evaluated through its small-x expansion
# E1(x) = -gamma - log(x) + O(x), which avoids exp1's domain edge.
_E1_TINY = 1e-280
# exp(z) overflows the E1 underflow threshold past this point.
_Z_MAX = 709.0


def log_ascending_factorial(t, n):
    """log of Gamma(t + n) / Gamma(t) for t > 0 and integer n >= 0.

    For small n the product form sum(log(t + i)) is used, which stays
    accurate when t is tiny; otherwise the lgamma difference.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("log_ascending_factorial requires t > 0")
    n = int(n)
    if n < 0:
        raise DomainError("log_ascending_factorial requires n >= 0")
    if n == 0:
        return np.zeros_like(t) if t.ndim else 0.0
    if n <= 32:
        i = np.arange(n, dtype=float)
        out = np.sum(np.log(t[..., None] + i), axis=-1)
    else:
        out = gammaln(t + n) - gammaln(t)
    return out if out.ndim else float(out)


def log_ascending_factorial_vec(t, n):
    """Elementwise log ascending factorial for broadcastable arrays t, n."""
    t, n = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(n))
    if np.any(t <= 0):
        raise DomainError("log_ascending_factorial requires t > 0")
    out = gammaln(t + n) - gammaln(t)
    # lgamma difference loses accuracy only for tiny t; patch by product form
    small = (t < 1e-4) & (n > 0)
    if np.any(small):
        out = np.array(out, copy=True)
        idx = np.argwhere(small)
        for ix in idx:
            ix = tuple(ix)
            out[ix] = np.sum(np.log(t[ix] + np.arange(int(n[ix]))))
    return out


def exp_integral_e1(x):
    """E1(x) = int_x^inf exp(-s)/s ds for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("exp_integral_e1 requires x > 0")
    out = np.where(x < _E1_TINY, -EULER_GAMMA - np.log(np.maximum(x, 1e-300)),
                   exp1(np.maximum(x, _E1_TINY)))
    return out if out.ndim else float(out)


def _e1_of_exp(z):
    """E1(exp(z)) evaluated stably on the whole real line."""
    if z < np.log(_E1_TINY):
        return -EULER_GAMMA - z
    x = np.exp(min(z, _Z_MAX))
    return exp1(x)


@dataclass
class E1InversionReport:
    solution: float
    iterations: int
    final_residual: float


def inverse_e1(y, start=None, tol=1e-12, max_iter=100):
    """Solve E1(x) = y for x > 0 by Newton iteration on z = log(x).

    The log transform makes the domain all of R; f(z) = E1(exp(z)) is
    decreasing and convex, so the iteration converges from any start.
    `start` is an optional initial guess for x (e.g. the previous solution
    in a sequential Ferguson-Klass scan).
    """
    y = float(y)
    if y <= 0:
        raise DomainError("inverse_e1 requires y > 0")
    if start is not None and start > 0:
        z = np.log(start)
    elif y > 2.0:
        # asymptote E1(x) ~ -gamma - log(x) for small x
        z = -(y + EULER_GAMMA)
    elif y < 0.1:
        # asymptote E1(x) ~ exp(-x)/x for large x
        ly = -np.log(y)
        z = np.log(max(ly - np.log(ly), 1.0))
    else:
        z = 0.0
    resid = _e1_of_exp(z) - y
    for it in range(1, max_iter + 1):
        # f'(z) = -exp(-exp(z)); for very negative z this is -1
        x = np.exp(min(z, _Z_MAX))
        fprime = -np.exp(-min(x, _Z_MAX))
        if fprime == 0.0:
            # overshot far right where E1 underflows; pull back
            z, step = _Z_MAX / 2, np.inf
        else:
            step = -resid / fprime
            z = min(z + step, np.log(740.0))
        resid = _e1_of_exp(z) - y
        if not np.isfinite(resid):
            raise MaxIterExceeded("inverse_e1 produced a non-finite residual")
        # the step bounds the remaining error of z = log(x) directly
        if abs(step) <= tol * max(1.0, abs(z)):
            return E1InversionReport(float(np.exp(z)), it, float(resid))
    raise MaxIterExceeded(f"inverse_e1 did not converge for y={y}")


def inverse_e1_vec(y, tol=1e-12, max_iter=200):
    """Vectorized E1 inverse: solve E1(x_i) = y_i elementwise.

    Same Newton-on-log iteration as inverse_e1, run on the whole array at
    once; used where many tail inversions are needed per draw.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise DomainError("inverse_e1_vec requires y > 0")
    with np.errstate(invalid="ignore", divide="ignore"):
        ly = -np.log(np.minimum(y, 0.5))
        far = np.log(np.maximum(ly - np.log(ly), 1.0))
    z = np.where(y > 2.0, -(y + EULER_GAMMA), np.where(y < 0.1, far, 0.0))
    z_cap = np.log(740.0)

    def f(z):
        small = z < np.log(_E1_TINY)
        zs = np.clip(z, np.log(_E1_TINY), _Z_MAX)
        return np.where(small, -EULER_GAMMA - z, exp1(np.exp(zs)))

    resid = f(z) - y
    done = np.zeros(y.shape, dtype=bool)
    for _ in range(max_iter):
        x = np.exp(np.minimum(z, _Z_MAX))
        fprime = -np.exp(-np.minimum(x, _Z_MAX))
        stuck = fprime == 0.0
        step = -resid / np.where(stuck, 1.0, fprime)
        z_new = np.minimum(np.where(stuck, _Z_MAX / 2, z + step), z_cap)
        z = np.where(done, z, z_new)
        resid = f(z) - y
        if not np.all(np.isfinite(resid)):
            raise MaxIterExceeded("inverse_e1_vec produced a non-finite residual")
        done |= (~stuck) & (np.abs(step) <= tol * np.maximum(1.0, np.abs(z)))
        if np.all(done):
            break
    if not np.all(done):
        raise MaxIterExceeded("inverse_e1_vec did not converge")
    return np.exp(z)


def _gen_exp_cf(order, x, eps=1e-15, max_iter=400):
    """exp(x) * E_order(x) by modified Lentz continued fraction (x >= 1)."""
    tiny = 1e-300
    b = x + order
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        a = -i * (order - 1.0 + i)
        b += 2.0
        d = a * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + a / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise MaxIterExceeded("continued fraction for E_nu did not converge")


def gen_exp_integral(order, x):
    """Generalized exponential integral E_nu(x) = int_1^inf t^-nu exp(-xt) dt.

    Supports real order nu >= 0 (needed for non-integer shape parameters).
    """
    order = float(order)
    x = float(x)
    if x <= 0:
        raise DomainError("gen_exp_integral requires x > 0")
    if order < 0:
        raise DomainError("gen_exp_integral requires order >= 0")
    if order == 0:
        return np.exp(-x) / x
    if order == round(order) and order <= 100:
        return float(expn(int(round(order)), x))
    if x >= 1.0:
        return float(np.exp(-x) * _gen_exp_cf(order, x))
    import mpmath

    with mpmath.workdps(30):
        return float(mpmath.expint(order, x))


def exp_scaled_gen_exp_integral(order, x):
    """exp(x) * E_order(x), overflow-free for large x."""
    order = float(order)
    x = float(x)
    if x <= 0:
        raise DomainError("exp_scaled_gen_exp_integral requires x > 0")
    if order < 0:
        raise DomainError("exp_scaled_gen_exp_integral requires order >= 0")
    if order == 0:
        return 1.0 / x
    if x >= 1.0:
        return float(_gen_exp_cf(order, x))
    return float(np.exp(x) * gen_exp_integral(order, x))
