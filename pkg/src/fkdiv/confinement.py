"""Probability that Brownian motion stays in the unit ball, via Bessel eigen-series."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, SlowConvergenceError
from .specfun import bessel_j_zeros, gamma_fn, sphere_area, ball_volume

T_MIN = 1e-3
_TERM_SAFETY = 2.0


@dataclass(frozen=True)
class SeriesCtl:
    eps_tail: float = 1e-14
    k_max: int = 20_000
    t_min: float = T_MIN

    def __post_init__(self):
        if not self.eps_tail > 0:
            raise DomainError("eps_tail must be positive")
        if self.k_max < 1:
            raise DomainError("k_max must be >= 1")


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float

    def __float__(self):
        return self.value

    def to_dict(self):
        return {"value": self.value, "terms_used": self.terms_used, "tail_bound": self.tail_bound}


def _order(N):
    if int(N) != N or N < 1:
        raise DomainError(f"dimension must be a positive integer, got {N}")
    return (N - 2) / 2


def _check_time(T, ctl):
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    if T < ctl.t_min:
        raise SlowConvergenceError(
            "eigen-series converges too slowly at this T; use the Monte Carlo estimator "
            "(confine_prob_mc) instead", T=T, t_min=ctl.t_min)


def _terms_needed(mu, T, eps):
    # smallest K with exp(-j_K^2 T / 2) well below eps, from the large-k zero law
    j_needed = math.sqrt(2.0 * (-math.log(eps) + 10.0) / T)
    return max(4, int(j_needed / math.pi - 0.5 * mu + 0.25) + 2)


def rayleigh_tail(mu: float, K: int) -> float:
    """Approximate sum_{k>K} j_{mu,k}^{-2} using j_k ~ (k + mu/2 - 1/4) pi."""
    return float(special.polygamma(1, K + 1 + 0.5 * mu - 0.25)) / math.pi ** 2


def confine_prob(N: int, rho: float, T: float, ctl: SeriesCtl = SeriesCtl()) -> SeriesResult:
    """P_xi(max_{s<=T} |B_s| < 1) for |xi| = rho in dimension N."""
    mu = _order(N)
    if not 0 <= rho < 1:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    _check_time(T, ctl)
    K = min(ctl.k_max, _terms_needed(mu, T, ctl.eps_tail))
    while True:
        value, tail = (_cosine_series if N == 1 else _bessel_series)(mu, rho, T, K)
        if tail <= ctl.eps_tail:
            break
        if K >= ctl.k_max:
            raise SlowConvergenceError("k_max reached before the tail tolerance",
                                       tail=tail, k_max=ctl.k_max)
        K = min(ctl.k_max, 2 * K)
    return SeriesResult(min(1.0, max(0.0, value)), K, tail)


def _cosine_series(mu, rho, T, K):
    odd = 2 * np.arange(1, K + 2) - 1
    mags = 4.0 / (math.pi * odd) * np.exp(-(math.pi ** 2) / 8 * odd ** 2 * T)
    signs = np.where(np.arange(K + 1) % 2 == 0, 1.0, -1.0)
    terms = signs * mags * np.cos(0.5 * odd * math.pi * rho)
    tail = float(mags[K]) / (1 - math.exp(-(math.pi ** 2) * T))
    return math.fsum(terms[:K]), tail


def _bessel_series(mu, rho, T, K):
    j = bessel_j_zeros(mu, K + 1)
    jk, j_next = j[:K], float(j[K])
    z = jk * rho
    # J_mu(z) / rho^mu, switching to its power series where rho^mu would underflow
    lead = (jk / 2) ** mu / gamma_fn(mu + 1)
    small = z < 1e-3
    series = lead * (1 - (z / 2) ** 2 / (mu + 1) + (z / 2) ** 4 / (2 * (mu + 1) * (mu + 2)))
    with np.errstate(all="ignore"):
        direct = special.jv(mu, z) / rho ** mu if rho > 0 else lead
    radial = np.where(small, series, direct)
    radial_bound = rho ** (-mu) if rho > 1e-8 else math.inf
    terms = 2.0 * radial / (jk * special.jv(mu + 1, jk)) * np.exp(-0.5 * jk ** 2 * T)
    # |J_mu(z)| <= min(1, (z/2)^mu / Gamma(mu+1)); sqrt(pi j/2) |J_{mu+1}(j)| -> 1
    b = min(radial_bound, (j_next / 2) ** mu / gamma_fn(mu + 1))
    b_next = 2.0 * b * _TERM_SAFETY * math.sqrt(math.pi / (2 * j_next)) * math.exp(-0.5 * j_next ** 2 * T)
    ratio = math.exp(-math.pi * j_next * T)
    tail = b_next / (1 - ratio) if ratio < 1 else math.inf
    return math.fsum(terms), tail


def confined_mass(N: int, T: float, ctl: SeriesCtl = SeriesCtl()) -> SeriesResult:
    """Integral of the confinement probability over the unit ball.

    Termwise integration gives 2 * area(S^{N-1}) * sum_k j_k^{-2} exp(-j_k^2 T / 2).
    """
    mu = _order(N)
    _check_time(T, ctl)
    K = min(ctl.k_max, _terms_needed(mu, T, ctl.eps_tail))
    j = bessel_j_zeros(mu, K + 1)
    terms = np.exp(-0.5 * j[:K] ** 2 * T) / j[:K] ** 2
    scale = 2.0 * sphere_area(N)
    value = scale * math.fsum(terms)
    tail = scale * math.exp(-0.5 * float(j[K]) ** 2 * T) * rayleigh_tail(mu, K - 1)
    return SeriesResult(min(value, ball_volume(N)), K, tail)


def keylem_bound(N: int, T: float) -> float:
    """Leading-term lower bound (2 area / j_1^2) exp(-j_1^2 T / 2) for confined_mass."""
    mu = _order(N)
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    j1 = float(bessel_j_zeros(mu, 1)[0])
    return 2.0 * sphere_area(N) / j1 ** 2 * math.exp(-0.5 * j1 ** 2 * T)


def zero_tail_asymptotic(mu: float, k: int) -> float:
    """sqrt(pi j_{mu,k} / 2) |J_{mu+1}(j_{mu,k})|, which tends to 1 as k grows."""
    if not mu > -0.5:
        raise DomainError(f"requires mu > -1/2, got {mu}")
    j = float(bessel_j_zeros(mu, k)[-1])
    return math.sqrt(math.pi * j / 2) * abs(float(special.jv(mu + 1, j)))


def decay_rate(N: int, T: float, ctl: SeriesCtl = SeriesCtl()) -> float:
    """-(2/T) log confined_mass(N, T); tends to j_{mu,1}^2 for large T."""
    return -2.0 / T * math.log(confined_mass(N, T, ctl).value)


def confine_prob_mc(N: int, rho: float, T: float, n_paths: int, rng, *, n_steps: int = 500,
                    bridge_correction: bool = True, workers: int = 1):
    """Random-walk estimate of the confinement probability.

    With ``bridge_correction`` each step is weighted by the probability that
    the Brownian bridge between the two grid points stays inside, using the
    flat-boundary formula exp(-2 d0 d1 / dt) for distances d0, d1 to the sphere.
    """
    from .estimate import run_batches

    mu = _order(N)  # noqa: F841 (validates N)
    dt = T / n_steps
    sd = math.sqrt(dt)

    def kernel(n, gen):
        x = np.zeros((n, N))
        x[:, 0] = rho
        w = np.ones(n)
        for _ in range(n_steps):
            x_new = x + sd * gen.standard_normal((n, N))
            if N == 1:
                a, b = x[:, 0], x_new[:, 0]
                inside = np.abs(b) < 1
                if bridge_correction:
                    p = np.exp(-2 * (1 - a) * (1 - b) / dt) + np.exp(-2 * (1 + a) * (1 + b) / dt)
                    w *= inside * np.clip(1 - p, 0, 1)
                else:
                    w *= inside
            else:
                d0 = 1 - np.sqrt(np.einsum("ij,ij->i", x, x))
                d1 = 1 - np.sqrt(np.einsum("ij,ij->i", x_new, x_new))
                inside = d1 > 0
                if bridge_correction:
                    w *= inside * (1 - np.exp(-2 * np.clip(d0, 0, None) * np.clip(d1, 0, None) / dt))
                else:
                    w *= inside
            x = x_new
        return w

    return run_batches(kernel, n_paths, rng, workers=workers)[0]
