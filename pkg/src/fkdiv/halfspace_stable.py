"""Boundary local time, inverse-maximum time changes and 1-stable processes.

A Brownian motion sampled at the hitting times of a second, independent
Brownian motion is a Cauchy process; with a drift m in the clock motion it is
the relativistic 1-stable process of mass m. The Laplace transform in t of the
half-space functional started on the boundary is expressed through that
process and the kernels f_0 and f_m defined below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats
from scipy.interpolate import CubicSpline

from .errors import DomainError, NumericError
from .estimate import MCEstimate, run_batches
from .laws import g1, hitting_time_sample, inverse_gaussian_sample, local_time_step
from .model import InitialDatum, PathGrid, PotentialSpec
from .rng import as_generator


@dataclass(frozen=True)
class TimeChangeSkeleton:
    """Level grid a_0 < ... < a_K, clock tau(a_k) and W(tau(a_k)) for each path.

    ``clock_values`` has shape (paths, K+1); ``spatial_values`` (paths, K+1, d).
    """

    levels: np.ndarray
    clock_values: np.ndarray
    spatial_values: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.clock_values, axis=-1) < 0):
            raise NumericError("clock values must be nondecreasing")


def _check_levels(a_grid):
    a = np.asarray(a_grid, dtype=float)
    if a.ndim != 1 or a.size < 1 or a[0] < 0 or np.any(np.diff(a) <= 0):
        raise DomainError("level grid must be strictly increasing and start at a value >= 0")
    return a


def cauchy_skeleton_sample(d: int, a_grid, rng, n_paths: int = 1, start=None) -> TimeChangeSkeleton:
    """Cauchy process sampled on a level grid as W(tau_a).

    tau-increments are first-passage times over the level increments; the
    spatial increments are Gaussian with variance equal to the clock increment.
    """
    a = _check_levels(a_grid)
    gen = as_generator(rng)
    x0 = np.zeros(d) if start is None else np.asarray(start, dtype=float)
    steps = np.diff(np.concatenate([[0.0], a]))
    clock = np.zeros((n_paths, a.size))
    pos = np.zeros((n_paths, a.size, d))
    tau = np.zeros(n_paths)
    w = np.tile(x0, (n_paths, 1))
    for k, da in enumerate(steps):
        if da > 0:
            dtau = np.atleast_1d(hitting_time_sample(da, gen, size=n_paths))
            w = w + np.sqrt(dtau)[:, None] * gen.standard_normal((n_paths, d))
            tau = tau + dtau
        clock[:, k] = tau
        pos[:, k] = w
    return TimeChangeSkeleton(a, clock, pos)


def cauchy_cf(a, xi):
    return math.exp(-a * abs(xi))


def relativistic_clock_sample(m: float, t_level: float, rng, size=None):
    """First passage of Brownian motion with drift m to level t: inverse Gaussian IG(t/m, t^2)."""
    if not (m > 0 and t_level > 0):
        raise DomainError("m and t_level must be positive")
    gen = as_generator(rng)
    out = inverse_gaussian_sample(t_level / m, t_level ** 2, gen, size)
    return float(out) if size is None else out


def relativistic_laplace(m, t, lam):
    return math.exp(-t * (math.sqrt(2 * lam + m * m) - m))


def relativistic_cf(m, t, xi):
    return math.exp(-t * (math.sqrt(xi * xi + m * m) - m))


# --------------------------------------------------------------------------
# f_0 and f_m kernels

def _lateral_factor(t, x, u0: InitialDatum):
    """int g_{N-1}(t, z - x) (lateral part of u0)(z) dz, vectorised over rows of x."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x.shape[-1]
    if u0.kind == "constant_one":
        return np.ones(x.shape[0])
    c = u0.center_vec(d + 1)[:d]
    d2 = np.sum((x - c) ** 2, axis=-1)
    if u0.kind == "gaussian_bump":
        w2 = u0.radius ** 2
        return (w2 / (t + w2)) ** (d / 2) * np.exp(-d2 / (2 * (t + w2)))
    if u0.interval is None:
        raise DomainError("box datum needs an interval for the half-space kernels")
    return stats.ncx2.cdf(u0.radius ** 2 / t, d, d2 / t)


def _vertical_factor(t, u0: InitialDatum, dim):
    """int_R (|y|/t) g_1(t, y) (vertical part of u0)(|y|) dy."""
    if u0.kind == "constant_one":
        return math.sqrt(2 / (math.pi * t))
    if u0.kind == "gaussian_bump":
        w2 = u0.radius ** 2
        cn = u0.center_vec(dim)[-1]
        v = t * w2 / (t + w2)
        mm = cn * t / (t + w2)
        inner = v * math.exp(-mm * mm / (2 * v)) + mm * math.sqrt(2 * math.pi * v) * special.ndtr(mm / math.sqrt(v))
        return 2 / (t * math.sqrt(2 * math.pi * t)) * math.exp(-cn * cn / (2 * (t + w2))) * inner
    lo, hi = u0.interval
    return 2 * float(g1(t, lo) - g1(t, hi))


def f0_kernel(t: float, x, u0: InitialDatum):
    """f_0(t, x) = int dz g_{N-1}(t, z-x) int dy (|y|/t) g_1(t, y) u0(z, |y|); x holds N-1 coordinates.

    Closed form for the separable data kinds; the amplitude multiplies.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rows = np.atleast_2d(x)
    out = u0.amplitude * _lateral_factor(t, rows, u0) * _vertical_factor(t, u0, rows.shape[-1] + 1)
    return float(out[0]) if x.ndim == 1 else out


def fm_kernel(m: float, x, u0: InitialDatum, rtol: float = 1e-6) -> float:
    """f_m(x) = int_0^inf exp(-m^2 t / 2) f_0(t, x) dt (substituting t = s^2)."""
    if not m > 0:
        raise DomainError("m must be positive")

    def g(s):
        return 2 * s * math.exp(-0.5 * m * m * s * s) * f0_kernel(s * s, x, u0)

    s_hi = math.sqrt(2 * 60 / (m * m))
    cuts = [0.0, 0.25, 1.0, 2.0, 4.0, s_hi]
    cuts = sorted({c for c in cuts if c <= s_hi})
    parts = [integrate.quad(g, a, b, epsabs=0, epsrel=rtol * 1e-2, limit=200) for a, b in zip(cuts[:-1], cuts[1:])]
    val = math.fsum(p[0] for p in parts)
    err = sum(p[1] for p in parts)
    if not math.isfinite(val) or err > rtol * max(abs(val), 1e-300):
        raise NumericError("Laplace quadrature for f_m missed its tolerance", m=m, value=val, err=err)
    return val


class FmTable:
    """f_m as a function of the lateral distance to the datum centre (log-spline)."""

    def __init__(self, m, u0: InitialDatum, lateral_dim, d_max=40.0, n=321):
        self.m, self.u0, self.dim = m, u0, lateral_dim
        self.center = u0.center_vec(lateral_dim + 1)[:lateral_dim]
        if u0.kind == "constant_one":
            self.const = fm_kernel(m, np.zeros(lateral_dim), u0)
            return
        self.const = None
        self.d_max = d_max
        d = np.linspace(0.0, d_max, n)
        vals = np.array([fm_kernel(m, self.center + np.eye(lateral_dim)[0] * di, u0) for di in d])
        self._spline = CubicSpline(d, np.log(vals))

    def __call__(self, x):
        x = np.atleast_2d(x)
        if self.const is not None:
            return np.full(x.shape[0], self.const)
        dist = np.sqrt(np.sum((x - self.center) ** 2, axis=-1))
        out = np.exp(self._spline(np.minimum(dist, self.d_max)))
        far = dist > self.d_max
        for i in np.nonzero(far)[0]:
            out[i] = fm_kernel(self.m, x[i], self.u0)
        return out


# --------------------------------------------------------------------------
# the Laplace-transform identity

@dataclass(frozen=True)
class IdentityCheck:
    lhs: MCEstimate
    rhs: MCEstimate
    k_sigma: float = 3.0
    rel_budget: float | None = None

    @property
    def z(self):
        return (self.lhs.mean - self.rhs.mean) / math.hypot(self.lhs.std_err, self.rhs.std_err)

    @property
    def rel_diff(self):
        return abs(self.lhs.mean - self.rhs.mean) / abs(self.rhs.mean)

    @property
    def passed(self):
        ok = abs(self.z) < self.k_sigma
        if self.rel_budget is not None:
            ok = ok and self.rel_diff <= self.rel_budget
        return bool(ok)

    def to_dict(self):
        return {"lhs": self.lhs.to_dict(), "rhs": self.rhs.to_dict(), "z": self.z,
                "rel_diff": self.rel_diff, "passed": self.passed}


def prelat_identity_check(m: float, x, pot: PotentialSpec, u0: InitialDatum, grid: PathGrid, rng,
                          *, workers: int = 1, rel_budget: float | None = None) -> IdentityCheck:
    """Both sides of u_m(x) = int e^{-mt} E_x[f_m(X_t) exp(int_0^t V(X_s) ds)] dt.

    lhs: t ~ Exp(m^2/2), weight 2/m^2, one half-space path from (x, 0) with
    exact local-time steps. rhs: t ~ Exp(m), weight 1/m, a relativistic
    skeleton on ``grid.n_steps`` level steps with left-endpoint potential sums.
    The potential acts on the lateral coordinates only.
    """
    if not m > 0:
        raise DomainError("m must be positive")
    if not pot.bounded:
        raise DomainError("the identity check needs a bounded potential")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.size
    K = grid.n_steps
    table = FmTable(m, u0, d)

    def lhs_kernel(n, gen):
        t = gen.exponential(2 / (m * m), n)
        dt = t / K
        lat = np.tile(x, (n, 1))
        vert = np.zeros(n)
        acc = np.zeros(n)
        for _ in range(K):
            dl, z = local_time_step(vert, dt, gen)
            acc += pot.value_r2(np.einsum("ij,ij->i", lat, lat)) * dl
            lat = lat + np.sqrt(dt)[:, None] * gen.standard_normal((n, d))
            vert = np.abs(z)
        pts = np.concatenate([lat, vert[:, None]], axis=1)
        return 2 / (m * m) * u0(pts) * np.exp(acc)

    def rhs_kernel(n, gen):
        t = gen.exponential(1 / m, n)
        dt = t / K
        pos = np.tile(x, (n, 1))
        acc = np.zeros(n)
        for _ in range(K):
            acc += pot.value_r2(np.einsum("ij,ij->i", pos, pos)) * dt
            tau = inverse_gaussian_sample(dt / m, dt * dt, gen, n)
            pos = pos + np.sqrt(tau)[:, None] * gen.standard_normal((n, d))
        return table(pos) * np.exp(acc) / m

    lhs = run_batches(lhs_kernel, grid.n_paths, rng.substream(0), workers=workers)[0]
    rhs = run_batches(rhs_kernel, grid.n_paths, rng.substream(1), workers=workers)[0]
    return IdentityCheck(lhs, rhs, rel_budget=rel_budget)


# --------------------------------------------------------------------------
# absorbed motion and the Bessel-K kernel

def absorbed_density(t: float, x_N: float, r):
    """Transition density of Brownian motion killed at 0: g_1(t, r - x_N) - g_1(t, r + x_N)."""
    if not (t > 0 and x_N >= 0):
        raise DomainError("needs t > 0 and x_N >= 0")
    out = g1(t, np.asarray(r) - x_N) - g1(t, np.asarray(r) + x_N)
    return float(out) if np.ndim(out) == 0 else out


def survival_probability(t, x_N):
    """P_{x_N}(sigma_0 > t) = erf(x_N / sqrt(2t))."""
    return math.erf(x_N / math.sqrt(2 * t))


@dataclass(frozen=True)
class DecompCheck:
    direct: MCEstimate
    formula: float

    @property
    def passed(self):
        return self.direct.agrees_with(self.formula)

    def to_dict(self):
        return {"direct": self.direct.to_dict(), "formula": self.formula, "passed": self.passed}


def decomp_second_term_formula(t: float, x, u0: InitialDatum) -> float:
    """int dz' int_0^inf dr u0(z', r) int_{|r-x_N|}^{r+x_N} d eta (eta/t) g_N(t, (z'-x', eta)).

    The lateral Gaussian integral is exact; the r- and eta-integrals are
    computed by quadrature.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xl, xn = x[:-1], float(x[-1])
    if not xn > 0:
        return 0.0
    lateral = u0.amplitude * float(_lateral_factor(t, xl, u0)[0])
    if u0.kind == "gaussian_bump":
        cn, w = u0.center_vec(x.size)[-1], u0.radius
        vert = lambda r: math.exp(-(r - cn) ** 2 / (2 * w * w))
        r_lo, r_hi = max(0.0, cn - 12 * w), cn + 12 * w
    elif u0.kind == "constant_one":
        vert = lambda r: 1.0
        r_lo, r_hi = 0.0, xn + 14 * math.sqrt(t)
    else:
        vert = lambda r: 1.0
        r_lo, r_hi = u0.interval
    eta_int = lambda r: integrate.quad(lambda e: e / t * float(g1(t, e)), abs(r - xn), r + xn,
                                       epsabs=1e-14, epsrel=1e-11)[0]
    pts = [p for p in (xn,) if r_lo < p < r_hi]
    val = integrate.quad(lambda r: vert(r) * eta_int(r), r_lo, r_hi, points=pts or None,
                         epsabs=1e-13, epsrel=1e-10, limit=200)[0]
    return lateral * val


def decomp_second_term_check(t: float, x, u0: InitialDatum, n_paths: int, rng, *, workers: int = 1) -> DecompCheck:
    """MC of E_x[u0(B'_t, |B^N_t|); sigma_0 > t] against the quadrature formula."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not x[-1] > 0:
        raise DomainError("needs x_N > 0")
    xn = float(x[-1])

    def kernel(n, gen):
        z = xn + math.sqrt(t) * gen.standard_normal(n)
        u = gen.random(n)
        alive = (z > 0) & (u >= np.exp(-2 * xn * np.maximum(z, 0) / t))
        lat = x[:-1] + math.sqrt(t) * gen.standard_normal((n, x.size - 1))
        pts = np.concatenate([lat, np.abs(z)[:, None]], axis=1)
        return u0(pts) * alive

    direct = run_batches(kernel, n_paths, rng, workers=workers)[0]
    return DecompCheck(direct, decomp_second_term_formula(t, x, u0))


def phi_kernel(N: int, y):
    """Phi_N(y) = 2 (2 pi y)^(-N/2) K_{N/2}(y)."""
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("y must be positive")
    out = 2 * np.power(2 * math.pi * y, -N / 2) * special.kv(N / 2, y)
    return float(out) if out.ndim == 0 else out


def bessel_k_laplace(N: int, m: float, a: float) -> tuple[float, float]:
    """(quadrature, closed form) of int_0^inf t^(-N/2-1) exp(-m^2 t/2 - a^2/2t) dt."""
    f = lambda u: math.exp(-(N / 2) * u - 0.5 * m * m * math.exp(u) - a * a / (2 * math.exp(u)))
    # t = e^u; the integrand in u is a smooth bump around the saddle u* = log(a/m)
    c = math.log(a / m)
    quad = math.fsum(integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
                     for lo, hi in ((c - 40, c - 4), (c - 4, c), (c, c + 4), (c + 4, c + 40)))
    closed = 2 * (m / a) ** (N / 2) * float(special.kv(N / 2, a * m))
    return quad, closed


def running_max_sample(t, rng, size=None):
    """Exact (max_{s<=t} B_s, B_t) from 0, via the bridge-maximum law."""
    gen = as_generator(rng)
    b = math.sqrt(t) * gen.standard_normal(size)
    e = gen.standard_exponential(size)
    mx = 0.5 * (b + np.sqrt(b * b + 2 * t * e))
    return mx, b
