"""Scalar special functions: gamma, Bessel J/I/K and their zeros, erfc, heat kernel.

J, I, K and erfc evaluations are delegated to :mod:`scipy.special`; the zeros
of J_mu for real order are located here.
"""
from __future__ import annotations

import math
import threading

import numpy as np
from scipy import special

from .errors import DomainError, NumericError

__all__ = [
    "gamma_fn", "sphere_area", "ball_volume", "bessel_j", "bessel_j_zero", "bessel_j_zeros",
    "bessel_i", "bessel_i_scaled", "bessel_k", "bessel_k_scaled", "erfc", "gauss_kernel",
    "mcmahon_guess", "j1_bracket",
]


def gamma_fn(x):
    """Euler gamma function for x > 0."""
    if np.ndim(x) == 0:
        if not x > 0:
            raise DomainError(f"gamma_fn requires x > 0, got {x}")
        return math.gamma(float(x))
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("gamma_fn requires x > 0")
    return special.gamma(x)


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^{N-1} in R^N."""
    _check_dim(N)
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def ball_volume(N: int) -> float:
    return sphere_area(N) / N


def _check_dim(N):
    if int(N) != N or N < 1:
        raise DomainError(f"dimension must be a positive integer, got {N}")


def bessel_j(mu, x):
    """J_mu(x) for x >= 0."""
    if np.any(np.asarray(x) < 0):
        raise DomainError("bessel_j requires x >= 0")
    out = special.jv(mu, x)
    return float(out) if np.ndim(out) == 0 else out


def bessel_i(nu, x):
    if np.any(np.asarray(x) < 0):
        raise DomainError("bessel_i requires x >= 0")
    out = special.iv(nu, x)
    return float(out) if np.ndim(out) == 0 else out


def bessel_i_scaled(nu, x):
    """exp(-x) I_nu(x); use when I_nu itself overflows."""
    if np.any(np.asarray(x) < 0):
        raise DomainError("bessel_i_scaled requires x >= 0")
    out = special.ive(nu, x)
    return float(out) if np.ndim(out) == 0 else out


def bessel_k(nu, x):
    if np.any(~(np.asarray(x) > 0)):
        raise DomainError("bessel_k requires x > 0")
    out = special.kv(nu, x)
    return float(out) if np.ndim(out) == 0 else out


def bessel_k_scaled(nu, x):
    """exp(x) K_nu(x)."""
    if np.any(~(np.asarray(x) > 0)):
        raise DomainError("bessel_k_scaled requires x > 0")
    out = special.kve(nu, x)
    return float(out) if np.ndim(out) == 0 else out


def erfc(x):
    """Complementary error function (2/sqrt(pi)) * int_x^inf exp(-y^2) dy."""
    out = special.erfc(x)
    return float(out) if np.ndim(out) == 0 else out


def gauss_kernel(d: int, t: float, x):
    """Heat kernel (2 pi t)^(-d/2) exp(-|x|^2 / 2t).

    For ``d == 1`` the kernel is applied elementwise; otherwise the last axis
    of ``x`` holds the ``d`` coordinates.
    """
    _check_dim(d)
    if not t > 0:
        raise DomainError(f"gauss_kernel requires t > 0, got {t}")
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        r2 = x * x
    else:
        if x.shape[-1] != d:
            raise DomainError(f"expected last axis of length {d}, got shape {x.shape}")
        r2 = np.sum(x * x, axis=-1)
    out = np.exp(-r2 / (2.0 * t)) / (2.0 * math.pi * t) ** (d / 2)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# zeros of J_mu

_ZERO_TOL = 1e-12
_MAX_NEWTON = 60
_SCAN_STEP = math.pi / 16
_SCAN_POINTS = 64


def mcmahon_guess(mu: float, k):
    """Large-k expansion (k + mu/2 - 1/4) pi - (4 mu^2 - 1) / (8 beta)."""
    beta = (np.asarray(k, dtype=float) + 0.5 * mu - 0.25) * math.pi
    return beta - (4.0 * mu * mu - 1.0) / (8.0 * beta)


def j1_bracket(mu: float) -> tuple[float, float]:
    """Known bounds sqrt((mu+1)(mu+5)) <= j_{mu,1} <= sqrt(mu+1)(sqrt(mu+2)+1)."""
    if not mu > -1:
        raise DomainError(f"j1 bounds need mu > -1, got {mu}")
    return math.sqrt((mu + 1) * (mu + 5)), math.sqrt(mu + 1) * (math.sqrt(mu + 2) + 1)


def _newton_in_bracket(mu, lo, hi, guess):
    f_lo = special.jv(mu, lo)
    x = guess if lo < guess < hi else 0.5 * (lo + hi)
    for it in range(_MAX_NEWTON):
        f = special.jv(mu, x)
        if f == 0.0:
            return x
        if (f > 0) == (f_lo > 0):
            lo, f_lo = x, f
        else:
            hi = x
        dfdx = (mu / x) * f - special.jv(mu + 1, x)
        step = f / dfdx if dfdx != 0 else math.inf
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= _ZERO_TOL * 1e-1 * max(1.0, x) or hi - lo <= _ZERO_TOL:
            return x_new
        x = x_new
    raise NumericError("Newton iteration for a Bessel zero did not converge",
                       mu=mu, bracket=(lo, hi), last=x, iterations=_MAX_NEWTON)


def _first_zero(mu):
    lo, hi = j1_bracket(mu)
    lo *= 1 - 1e-10
    hi *= 1 + 1e-10
    if not special.jv(mu, lo) > 0:
        raise NumericError("J_mu is not positive at the lower bound", mu=mu, bracket=(lo, hi))
    # for large mu the upper bound spans several zeros; scan below the
    # first zero gap, which is at least 1.75 (mu/2)^(1/3)
    step = 0.5 * max(1.0, (max(mu, 0.0) / 2) ** (1 / 3))
    xs = np.append(np.arange(lo, hi, step), hi)
    neg = np.nonzero(special.jv(mu, xs) <= 0)[0]
    if not neg.size:
        raise NumericError("first-zero bracket does not straddle a sign change", mu=mu, bracket=(lo, hi))
    i = neg[0]
    return _newton_in_bracket(mu, xs[i - 1], xs[i], mcmahon_guess(mu, 1))


def _next_zero(mu, prev, k):
    start = prev
    for _ in range(16):
        xs = start + _SCAN_STEP * np.arange(1, _SCAN_POINTS + 1)
        vals = special.jv(mu, xs)
        s0 = np.sign(special.jv(mu, start + 0.25 * _SCAN_STEP)) if start == prev else np.sign(special.jv(mu, start))
        change = np.nonzero(np.sign(vals) != s0)[0]
        if change.size:
            i = change[0]
            hi = xs[i]
            lo = xs[i - 1] if i > 0 else (prev + 0.25 * _SCAN_STEP if start == prev else start)
            return _newton_in_bracket(mu, lo, hi, float(mcmahon_guess(mu, k)))
        start = xs[-1]
    raise NumericError("no sign change found after the previous zero", mu=mu, k=k, prev=prev)


class _ZeroTable:
    """Per-order table of zeros, grown on demand and shared read-only."""

    def __init__(self):
        self._tables: dict[float, np.ndarray] = {}
        self._lock = threading.Lock()

    def get(self, mu: float, count: int) -> np.ndarray:
        mu = float(mu)
        table = self._tables.get(mu)
        if table is not None and table.size >= count:
            return table[:count]
        with self._lock:
            table = self._tables.get(mu)
            have = [] if table is None else list(table)
            target = max(count, 2 * len(have), 16)
            if not have:
                have.append(_first_zero(mu))
            while len(have) < target:
                have.append(_next_zero(mu, have[-1], len(have) + 1))
            arr = np.array(have)
            arr.setflags(write=False)
            self._tables[mu] = arr
            return arr[:count]


_ZEROS = _ZeroTable()


def bessel_j_zeros(mu: float, count: int) -> np.ndarray:
    """First ``count`` positive zeros of J_mu (read-only array)."""
    if not mu > -1:
        raise DomainError(f"zeros of J_mu need mu > -1, got {mu}")
    if count < 1:
        raise DomainError("count must be >= 1")
    return _ZEROS.get(mu, int(count))


def bessel_j_zero(mu: float, k: int) -> float:
    """k-th positive zero j_{mu,k} of J_mu."""
    if int(k) != k or k < 1:
        raise DomainError(f"zero index must be a positive integer, got {k}")
    return float(bessel_j_zeros(mu, int(k))[-1])
