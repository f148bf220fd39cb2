"""Exact densities and samplers for the path functionals used elsewhere.

Samplers take an ``rng`` (RngStream, numpy Generator or int seed) and an
optional ``size``; with ``size=None`` a scalar is returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

from .errors import DomainError, NumericError
from .rng import as_generator

SQRT2PI = math.sqrt(2.0 * math.pi)


def _out(x, size):
    return float(x) if size is None else x


def g1(t, x):
    """One-dimensional heat kernel, elementwise."""
    return np.exp(-np.square(x) / (2.0 * t)) / np.sqrt(2.0 * math.pi * t)


# --------------------------------------------------------------------------
# stable subordinator and hitting times

def _check_alpha(alpha):
    if not 0 < alpha < 2:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")


def subordinator_laplace(alpha: float, t: float, lam):
    """E exp(-lam T_t) = exp(-t lam^(alpha/2)) for the alpha/2-stable subordinator."""
    _check_alpha(alpha)
    out = np.exp(-t * np.power(lam, alpha / 2.0))
    return float(out) if np.ndim(out) == 0 else out


def positive_stable(beta: float, gen: np.random.Generator, size=None):
    """One-sided stable variable with E exp(-lam S) = exp(-lam^beta), 0 < beta < 1.

    Kanter's representation: S = (A(U) / E)^((1-beta)/beta) with U uniform on
    (0, pi), E standard exponential and
    A(u) = (sin(beta u) / sin u)^(1/(1-beta)) * sin((1-beta) u) / sin(beta u).
    """
    u = math.pi * gen.random(size)
    e = gen.standard_exponential(size)
    a = np.power(np.sin(beta * u) / np.sin(u), 1.0 / (1.0 - beta)) * np.sin((1.0 - beta) * u) / np.sin(beta * u)
    return np.power(a / e, (1.0 - beta) / beta)


def subordinator_sample(alpha: float, t: float, rng, size=None):
    """Draw T_t of the alpha/2-stable subordinator (scale t^(2/alpha))."""
    _check_alpha(alpha)
    if not t > 0:
        raise DomainError("t must be positive")
    gen = as_generator(rng)
    return _out(t ** (2.0 / alpha) * positive_stable(alpha / 2.0, gen, size), size)


def hitting_time_sample(a: float, rng, size=None):
    """First passage time of standard Brownian motion above level a: (a / Z)^2."""
    if not a > 0:
        raise DomainError("level a must be positive")
    gen = as_generator(rng)
    z = gen.standard_normal(size)
    return _out((a / z) ** 2, size)


def hitting_time_density(a, s):
    return a / np.sqrt(2 * math.pi * s ** 3) * np.exp(-a * a / (2 * s))


def hitting_time_cdf(a, s):
    return special.erfc(a / np.sqrt(2 * s))


def inverse_gaussian_sample(mean, shape, gen: np.random.Generator, size=None):
    """Inverse Gaussian IG(mean, shape) by the two-root transformation.

    The root chosen is decided by one uniform draw, so there is no loop. The
    smaller root mean (1 + a - sqrt(a (2 + a))), a = mean y / (2 shape), is
    formed as mean / (1 + a + sqrt(a (2 + a))) to avoid cancellation when
    mean / shape is large.
    """
    nu = gen.standard_normal(size)
    a = mean * nu * nu / (2 * shape)
    x = mean / (1 + a + np.sqrt(a * (2 + a)))
    u = gen.random(size)
    return np.where(u <= mean / (mean + x), x, mean * mean / x)


# --------------------------------------------------------------------------
# local time at 0 and endpoint of one-dimensional Brownian motion

@dataclass(frozen=True)
class BoxLaw:
    """Mixed law of (L_s, B_s): an atom on {L = 0} plus a density on y > 0."""

    atom: float
    atom_density: Callable  # z -> density of B_s on {L_s = 0}
    density: Callable  # (y, z) -> joint density for y > 0
    start: float
    time: float

    def total_mass(self) -> float:
        x, s = self.start, self.time
        w = math.sqrt(s)
        if x == 0:
            atom_mass = 0.0
        else:
            lo, hi = (0.0, x + 40 * w) if x > 0 else (x - 40 * w, 0.0)
            atom_mass = integrate.quad(self.atom_density, lo, hi, points=[x], limit=200)[0]
        zmax = abs(x) + 40 * w
        inner = lambda z: integrate.quad(lambda y: self.density(y, z), 0, zmax, limit=200)[0]
        cont = integrate.quad(inner, -zmax, 0, limit=200)[0] + integrate.quad(inner, 0, zmax, limit=200)[0]
        return atom_mass + cont


def local_time_joint(x: float, s: float) -> BoxLaw:
    """Exact joint law of local time at 0 and endpoint, started at x."""
    if not s > 0:
        raise DomainError("s must be positive")
    ax = abs(x)
    atom = float(special.erf(ax / math.sqrt(2 * s)))

    def atom_density(z):
        z = np.asarray(z, dtype=float)
        same_side = (x * z >= 0) & (x != 0)
        val = g1(s, z - x) * (1.0 - np.exp(-2.0 * x * z / s))
        out = np.where(same_side, val, 0.0)
        return float(out) if out.ndim == 0 else out

    def density(y, z):
        w = np.asarray(y) + np.abs(z) + ax
        out = np.where(np.asarray(y) > 0, w / math.sqrt(2 * math.pi * s ** 3) * np.exp(-w * w / (2 * s)), 0.0)
        return float(out) if out.ndim == 0 else out

    return BoxLaw(atom, atom_density, density, float(x), float(s))


def local_time_step(x, s, gen: np.random.Generator):
    """Vectorised exact draw of (L_s, B_s) for start points ``x`` and horizons ``s``.

    The endpoint is drawn from the free Gaussian law; the path reaches 0 with
    probability exp(-2 x z / s) when x z > 0 (and surely otherwise). Given a
    visit, y + |z| + |x| is a Rayleigh variable truncated below at |z| + |x|,
    inverted in closed form.
    """
    x = np.asarray(x, dtype=float)
    s = np.broadcast_to(np.asarray(s, dtype=float), x.shape)
    z = x + np.sqrt(s) * gen.standard_normal(x.shape)
    u_hit = gen.random(x.shape)
    e = gen.standard_exponential(x.shape)
    xz = x * z
    hit = (xz <= 0) | (u_hit < np.exp(-2.0 * np.maximum(xz, 0.0) / s))
    c = np.abs(z) + np.abs(x)
    extra = 2.0 * s * e
    y = extra / (np.sqrt(c * c + extra) + c)
    return np.where(hit, y, 0.0), z


def local_time_joint_sample(x: float, s: float, rng, size=None):
    """Exact draw(s) of (local time at 0, endpoint) over [0, s] from x."""
    if not s > 0:
        raise DomainError("s must be positive")
    gen = as_generator(rng)
    shape = () if size is None else size
    y, z = local_time_step(np.full(shape, float(x)), s, gen)
    if size is None:
        return float(y), float(z)
    return y, z


def local_time_weighted_density(kappa, s, x, z):
    """z -> E_x[exp(kappa L_s); B_s in dz] / dz.

    Equals g1(s, z - x) + (kappa/2) exp(kappa^2 s/2 - kappa c) Erfc(c/sqrt(2s) - kappa sqrt(s/2))
    with c = |z| + |x|; the product with Erfc is formed through erfcx when the
    argument is positive.
    """
    z = np.asarray(z, dtype=float)
    c = np.abs(z) + abs(x)
    w = c / math.sqrt(2 * s) - kappa * math.sqrt(s / 2)
    pos = w > 0
    wp = np.where(pos, w, 0.0)
    wn = np.where(pos, 0.0, w)
    tail = np.where(pos,
                    np.exp(-c * c / (2 * s)) * special.erfcx(wp),
                    np.exp(kappa * kappa * s / 2 - kappa * c) * special.erfc(wn))
    return g1(s, z - x) + 0.5 * kappa * tail


def local_time_exp_box(kappa: float, s: float, x: float) -> float:
    """E_x[exp(kappa L_s); |B_s| < 1] for |x| < 1."""
    if not abs(x) < 1:
        raise DomainError("requires |x| < 1")
    if not s > 0 or kappa < 0:
        raise DomainError("requires s > 0 and kappa >= 0")
    pts = sorted({-1.0, 0.0, float(x), 1.0})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b > a:
            total += integrate.quad(lambda z: float(local_time_weighted_density(kappa, s, x, z)), a, b,
                                    epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    return total


def local_time_exp_box_lower(kappa: float, s: float) -> float:
    """kappa exp(kappa^2 s/2 - 2 kappa) Erfc(sqrt(2/s)), a lower bound for local_time_exp_box."""
    return kappa * math.exp(kappa * kappa * s / 2 - 2 * kappa) * math.erfc(math.sqrt(2 / s))


# --------------------------------------------------------------------------
# last zero and meander endpoint

def last_zero_sample(t: float, rng, size=None):
    """Last zero before t (arcsine law): t sin^2(pi U / 2)."""
    if not t > 0:
        raise DomainError("t must be positive")
    gen = as_generator(rng)
    return _out(t * np.sin(0.5 * math.pi * gen.random(size)) ** 2, size)


def last_zero_cdf(t, v):
    return 2 / math.pi * np.arcsin(np.sqrt(np.clip(v / t, 0, 1)))


def meander_endpoint_sample(dur: float, rng, size=None):
    """Endpoint of a Brownian meander of the given duration (Rayleigh law)."""
    if not dur > 0:
        raise DomainError("duration must be positive")
    gen = as_generator(rng)
    return _out(np.sqrt(2.0 * dur * gen.standard_exponential(size)), size)


def meander_endpoint_density(dur, y):
    return np.where(np.asarray(y) > 0, y / dur * np.exp(-np.square(y) / (2 * dur)), 0.0)


def meander_endpoint_cdf(dur, y):
    return 1 - np.exp(-np.square(np.maximum(y, 0)) / (2 * dur))


# --------------------------------------------------------------------------
# Hartman-Watson kernel and Bessel transition densities

_GL_HI = leggauss(40)
_GL_LO = leggauss(28)
_HW_SHIFT_BELOW = 0.5
_HW_SHIFT = 1.5
_LOG_TINY = math.log(1e-16)


def _gl_sum(f, edges, rule):
    """Composite Gauss-Legendre, one panel per consecutive pair of edges."""
    nodes, weights = rule
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    x = a + half * (nodes + 1.0)
    return np.sum(weights * f(x), axis=1) * half[:, 0]


def hartman_watson_theta(rho: float, z: float, tol: float | None = None) -> tuple[float, float]:
    """Oscillatory integral theta_rho(z); returns (value, estimated absolute error).

    For z >= 0.5 the y-integral is taken directly, split at the zeros of
    sin(pi y / z) and summed with fsum. Below that the cancellation grows like
    exp(pi^2 / 2z), so the contour is moved to y = u + 1.5i: the vertical leg
    contributes only to the real part, and the imaginary part on the shifted
    line cancels at the much smaller scale exp((pi - 1.5)^2 / 2z).
    """
    if not (rho > 0 and z > 0):
        raise DomainError("rho and z must be positive")
    pref = rho / math.sqrt(2 * math.pi ** 3 * z)
    if z >= _HW_SHIFT_BELOW:
        y_cut = math.acosh(max(1.0, -_LOG_TINY / rho))
        y_cut = min(y_cut, math.sqrt(math.pi ** 2 + 2 * z * (-_LOG_TINY + 40)))

        def f(y):
            return np.exp((math.pi ** 2 - y * y) / (2 * z) - rho * np.cosh(y)) * np.sinh(y) * np.sin(math.pi * y / z)

        n_half = max(1, math.ceil(y_cut / z))
        edges = np.linspace(0.0, n_half * z, n_half + 1)
        if n_half == 1:
            edges = np.linspace(0.0, y_cut, 9)
    else:
        h = _HW_SHIFT
        w = math.pi - h
        ch = math.cos(h)

        def log_mag(u):
            return (w * w - u * u) / (2 * z) - rho * ch * math.cosh(u) + u

        u_cut = 1.0
        while log_mag(u_cut) > w * w / (2 * z) - 80 and u_cut < 60:
            u_cut += 0.5

        def f(u):
            y = u + 1j * h
            return (np.exp(-(y - 1j * math.pi) ** 2 / (2 * z) - rho * np.cosh(y)) * np.sinh(y)).imag

        period = math.pi * z / w
        n_half = max(1, math.ceil(u_cut / period))
        edges = np.linspace(0.0, n_half * period, n_half + 1)
    hi = _gl_sum(f, edges, _GL_HI)
    lo = _gl_sum(f, edges, _GL_LO)
    value = pref * math.fsum(hi)
    # rounding scales with the size of the cancelling panels, not with the result
    err = pref * (float(np.sum(np.abs(hi - lo))) + 4 * np.finfo(float).eps * float(np.sum(np.abs(hi))))
    if tol is not None and err > tol:
        raise NumericError("Hartman-Watson quadrature missed the requested tolerance",
                           rho=rho, z=z, achieved=err, tol=tol)
    return value, err


def hw_large_z_limit(rho: float, z_start: float = 25.0, rtol: float = 1e-4, z_max: float = 1e6):
    """sqrt(2 pi z^3) theta_rho(z) at a z large enough for the sequence to settle.

    Doubles z until successive values differ by less than ``rtol``; returns
    (z, scaled value).
    """
    z = z_start
    prev = math.sqrt(2 * math.pi * z ** 3) * hartman_watson_theta(rho, z)[0]
    while z < z_max:
        z *= 2
        cur = math.sqrt(2 * math.pi * z ** 3) * hartman_watson_theta(rho, z)[0]
        if abs(cur - prev) <= rtol * abs(cur):
            return z, cur
        prev = cur
    raise NumericError("large-z limit did not settle", rho=rho, z=z, last=prev)


def _bessel_mu(delta):
    if not delta >= 2:
        raise DomainError(f"Bessel dimension must be >= 2, got {delta}")
    return delta / 2 - 1


def hw_joint_density(delta: float, r: float, t: float, z: float, xi: float) -> float:
    """Joint density of (int_0^t ds / R_s^2, R_t) for a delta-dimensional Bessel process from r."""
    mu = _bessel_mu(delta)
    theta, _ = hartman_watson_theta(r * xi / t, z)
    return (1 / t) * (xi / r) ** mu * xi * math.exp(-0.5 * mu * mu * z - (r * r + xi * xi) / (2 * t)) * theta


def hw_z_marginal(delta: float, r: float, t: float, xi: float) -> float:
    """Integral of hw_joint_density over z in (0, inf)."""
    mu = _bessel_mu(delta)
    rho = r * xi / t
    pref = (1 / t) * (xi / r) ** mu * xi * math.exp(-(r * r + xi * xi) / (2 * t))

    def g(z):
        return math.exp(-0.5 * mu * mu * z) * hartman_watson_theta(rho, z)[0]

    # walk down from z = 1 until the density is negligible
    peak = max(abs(g(z)) for z in (0.25, 0.5, 1.0, 2.0))
    z_lo = 0.25
    while True:
        val, err = hartman_watson_theta(rho, z_lo)
        if abs(val) + err < 1e-10 * peak:
            break
        if err > 1e-8 * peak:
            raise NumericError("cannot resolve the small-z tail of the Hartman-Watson density",
                               z=z_lo, err=err, peak=peak)
        z_lo *= 0.8
    if mu > 0:
        z_hi = 2 * (40 + math.log(max(peak, 1e-300) + 1)) / (mu * mu)
        tail = 0.0
    else:
        z_hi = 1e4
        tail = float(special.kv(0, rho)) * 2 / math.sqrt(2 * math.pi * z_hi)
    cuts = [z_lo]
    while cuts[-1] < z_hi:
        cuts.append(min(z_hi, cuts[-1] * 2))
    total = math.fsum(integrate.quad(g, a, b, epsabs=0, epsrel=1e-10, limit=200)[0]
                      for a, b in zip(cuts[:-1], cuts[1:]))
    return pref * (total + tail)


def bessel_transition_density(delta: float, r: float, t: float, xi: float) -> float:
    """(xi/t)(xi/r)^mu exp(-(r^2+xi^2)/2t) I_mu(r xi / t), mu = delta/2 - 1."""
    mu = _bessel_mu(delta)
    return (xi / t) * (xi / r) ** mu * math.exp(-(r - xi) ** 2 / (2 * t)) * float(special.ive(mu, r * xi / t))


def _q2(t, r, rho):
    """Two-dimensional Bessel transition density, vectorised in rho."""
    return (rho / t) * np.exp(-(r - rho) ** 2 / (2 * t)) * special.ive(0, r * rho / t)


def _log_pieces(f, lo, hi, n=12):
    """Integral of f over (lo, hi) in the variable log(rho)."""
    edges = np.geomspace(lo, hi, n + 1)
    return math.fsum(integrate.quad(lambda u: f(math.exp(u)) * math.exp(u), math.log(a), math.log(b),
                                    epsabs=0, epsrel=1e-11, limit=200)[0]
                     for a, b in zip(edges[:-1], edges[1:]))


def divtrans_truncated(s: float, t: float, r: float, y: float, eps: float) -> float:
    """int_eps^inf rho^-2 q_s(r,rho) q_{t-s}(rho,y) / q_t(r,y) d rho for the 2-d Bessel process."""
    if not 0 < s < t:
        raise DomainError("requires 0 < s < t")
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    denom = float(_q2(t, r, y))
    f = lambda rho: float(_q2(s, r, rho) * _q2(t - s, rho, y)) / (rho * rho * denom)
    hi = max(r, y) + 14 * math.sqrt(t)
    return _log_pieces(f, eps, hi, n=16)


def divtrans_slope(s: float, t: float, r: float, y: float) -> float:
    """Limit of rho times the divtrans integrand as rho -> 0 (the log-divergence rate)."""
    denom = float(_q2(t, r, y))
    return (1 / s) * math.exp(-r * r / (2 * s)) * (y / (t - s)) * math.exp(-y * y / (2 * (t - s))) / denom


def cauchy_kernel(t, x, y):
    return t / (math.pi * (t * t + np.square(np.asarray(y) - x)))


def condfr_truncated(s: float, t: float, x: float, y: float, eps: float) -> float:
    """int_{eps<|z|<1} |z|^-1 p_s(x,z) p_{t-s}(z,y) dz / p_t(x,y), one-dimensional Cauchy kernel."""
    if not 0 < s < t:
        raise DomainError("requires 0 < s < t")
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    denom = float(cauchy_kernel(t, x, y))
    total = 0.0
    for sign in (1.0, -1.0):
        f = lambda z: float(cauchy_kernel(s, x, sign * z) * cauchy_kernel(t - s, sign * z, y)) / (z * denom)
        total += _log_pieces(f, eps, 1.0, n=12)
    return total


def condfr_slope(s: float, t: float, x: float, y: float) -> float:
    return 2 * float(cauchy_kernel(s, x, 0.0) * cauchy_kernel(t - s, 0.0, y)) / float(cauchy_kernel(t, x, y))


def log_slope_fit(func, eps_list=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6)) -> tuple[float, np.ndarray]:
    """Least-squares slope of func(eps) against log(1/eps); returns (slope, values)."""
    eps = np.asarray(eps_list, dtype=float)
    vals = np.array([func(e) for e in eps])
    slope = np.polyfit(np.log(1 / eps), vals, 1)[0]
    return float(slope), vals
