"""Monte Carlo Feynman-Kac estimators with capped singular potentials.

Every estimator is built on a kernel ``(n, generator) -> weights`` with one
row per cap level, so cap sweeps reuse identical paths (common random
numbers) and per-path weights are monotone in the cap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

from .confinement import confine_prob
from .errors import DomainError, NumericError
from .estimate import MCEstimate, run_batches
from .laws import g1, local_time_step, local_time_weighted_density, positive_stable
from .model import ExperimentGeometry, InitialDatum, PathGrid, PotentialSpec
from .specfun import bessel_j_zero, sphere_area


def _point(x, N):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size == 1 and N > 1:
        # a bare radius: place the point on the first axis
        x = np.concatenate([x, np.zeros(N - 1)])
    if x.shape != (N,):
        raise DomainError(f"start point must have {N} coordinates")
    return x


def _caps(pot: PotentialSpec, caps):
    if caps is None:
        pot.require_bounded()
        return [pot.cap]
    return list(caps)


def _r2(x):
    return np.einsum("ij,ij->i", x, x)


def _bulk_kernel(N, pot, caps, u0, t, x, n_steps, bridge):
    dt = t / n_steps

    def kernel(n, gen):
        pos = np.tile(x, (n, 1))
        acc = np.zeros((len(caps), n))
        v_prev = [pot.value_r2(_r2(pos), c) for c in caps]
        for _ in range(n_steps):
            new = pos + math.sqrt(dt) * gen.standard_normal((n, N))
            r2_new = _r2(new)
            if bridge:
                mid = 0.5 * (pos + new) + 0.5 * math.sqrt(dt) * gen.standard_normal((n, N))
                r2_mid = _r2(mid)
            for i, c in enumerate(caps):
                v_new = pot.value_r2(r2_new, c)
                if bridge:
                    acc[i] += dt / 6 * (v_prev[i] + 4 * pot.value_r2(r2_mid, c) + v_new)
                else:
                    acc[i] += 0.5 * dt * (v_prev[i] + v_new)
                v_prev[i] = v_new
            pos = new
        return u0(pos) * np.exp(acc)

    return kernel


def fk_fullspace(N: int, pot: PotentialSpec, u0: InitialDatum, t: float, x, grid: PathGrid, rng,
                 *, workers: int = 1, caps=None):
    """E_x[u0(B_t) exp(int_0^t V_m(B_s) ds)].

    Potential integrated by the trapezoid rule on the grid, or by Simpson's
    rule with an exact Brownian-bridge midpoint when ``bridge_correction``.
    Returns one MCEstimate, or a list when ``caps`` is given.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    x = _point(x, N)
    cl = _caps(pot, caps)
    out = run_batches(_bulk_kernel(N, pot, cl, u0, t, x, grid.n_steps, grid.bridge_correction),
                      grid.n_paths, rng, workers=workers)
    return out if caps is not None else out[0]


def stable_increment(N, alpha, dt, gen, n):
    """Increment W(2 dT) of the subordinated motion over a clock step dt."""
    dT = dt ** (2.0 / alpha) * positive_stable(alpha / 2.0, gen, n)
    return np.sqrt(2.0 * dT)[:, None] * gen.standard_normal((n, N))


def _stable_kernel(N, alpha, pot, caps, u0, t, x, n_steps):
    dt = t / n_steps

    def kernel(n, gen):
        pos = np.tile(x, (n, 1))
        acc = np.zeros((len(caps), n))
        for _ in range(n_steps):
            r2 = _r2(pos)
            for i, c in enumerate(caps):
                acc[i] += dt * pot.value_r2(r2, c)
            pos = pos + stable_increment(N, alpha, dt, gen, n)
        return u0(pos) * np.exp(acc)

    return kernel


def fk_stable(N: int, alpha: float, pot: PotentialSpec, u0: InitialDatum, t: float, x, grid: PathGrid, rng,
              *, workers: int = 1, caps=None):
    """E_x[u0(X_t) exp(int V_m(X_s) ds)] for X = x + W(2 T^alpha), left-endpoint potential sums."""
    if not 0 < alpha < 2:
        raise DomainError("alpha must lie in (0, 2)")
    x = _point(x, N)
    cl = _caps(pot, caps)
    out = run_batches(_stable_kernel(N, alpha, pot, cl, u0, t, x, grid.n_steps),
                      grid.n_paths, rng, workers=workers)
    return out if caps is not None else out[0]


def stable_endpoint_sample(N, alpha, t, x, rng_gen, size):
    """Draws of X_t = x + W(2 T_t) in one step."""
    x = _point(x, N)
    return x + stable_increment(N, alpha, t, rng_gen, size)


def _halfspace_kernel(N, pot, caps, u0, t, x, n_steps):
    dt = t / n_steps
    lat0, vert0 = x[:-1], x[-1]

    def kernel(n, gen):
        lat = np.tile(lat0, (n, 1))
        vert = np.full(n, vert0)
        acc = np.zeros((len(caps), n))
        for _ in range(n_steps):
            dl, z = local_time_step(vert, dt, gen)
            r2 = _r2(lat)
            for i, c in enumerate(caps):
                acc[i] += pot.value_r2(r2, c) * dl
            lat = lat + math.sqrt(dt) * gen.standard_normal(lat.shape)
            vert = np.abs(z)
        pts = np.concatenate([lat, vert[:, None]], axis=1)
        return u0(pts) * np.exp(acc)

    return kernel


def fk_halfspace(N: int, pot: PotentialSpec, u0: InitialDatum, t: float, x, grid: PathGrid, rng,
                 *, workers: int = 1, caps=None):
    """E_x[u0(B'_t, |B^N_t|) exp(int V_m(B'_s, 0) dL^N_s)].

    Each step draws (local-time increment, new vertical position) exactly;
    the boundary potential is frozen at the lateral position of the step start.
    """
    if N < 2:
        raise DomainError("half-space setting needs N >= 2")
    x = _point(x, N)
    if x[-1] < 0:
        raise DomainError("start point must satisfy x_N >= 0")
    cl = _caps(pot, caps)
    out = run_batches(_halfspace_kernel(N, pot, cl, u0, t, x, grid.n_steps),
                      grid.n_paths, rng, workers=workers)
    return out if caps is not None else out[0]


def hardy_coefficient(N):
    return 0.5 * ((N - 2) / 2) ** 2


_NEAR_ORIGIN = 16.0
_FINE_STEPS = 64


def _bridge_integral(a, b, dt, gen, rate, depth=2):
    """Trapezoid integral of rate over an exactly sampled Brownian bridge from a to b.

    Sub-steps that again pass within a few sub-step lengths of the origin are
    refined recursively, ``depth`` times at most.
    """
    n, d = a.shape
    m = _FINE_STEPS
    h = dt / m
    w = np.cumsum(math.sqrt(h) * gen.standard_normal((n, m, d)), axis=1)
    frac = np.arange(1, m + 1)[None, :, None] / m
    path = a[:, None, :] + w - frac * w[:, -1:, :] + frac * (b - a)[:, None, :]
    path = np.concatenate([a[:, None, :], path], axis=1)
    r2 = np.einsum("ijk,ijk->ij", path, path)
    v = rate(r2)
    out = 0.5 * h * np.sum(v[:, 1:] + v[:, :-1], axis=1)
    if depth > 0:
        near = np.minimum(r2[:, 1:], r2[:, :-1]) < _NEAR_ORIGIN * h
        if np.any(near):
            i, j = np.nonzero(near)
            fine = _bridge_integral(path[i, j], path[i, j + 1], h, gen, rate, depth - 1)
            np.add.at(out, i, fine - 0.5 * h * (v[i, j] + v[i, j + 1]))
    return out


def fk_radial_bessel(N: int, c: float, cap: float, f: InitialDatum, t: float, r0: float, grid: PathGrid, rng,
                     *, workers: int = 1):
    """Both sides of the h-transform identity between |B| in R^N and the 2-d Bessel process.

    lhs = E_x[f(|B_t|) exp(int min(cap, c/|B_s|^2) ds)], |x| = r0.
    rhs = E^(2)_r0[f(R_t) (R_t/r0)^(N/2-1) exp(int (min(cap, c/R_s^2) - C_N/R_s^2) ds)].

    The -C_N/R^2 term is not capped, so on the right-hand side steps passing
    close to the origin are integrated over a finely sampled Brownian bridge.
    """
    if N < 3:
        raise DomainError("needs N >= 3")
    if not r0 > 0:
        raise DomainError("the identity needs a start point away from the origin (r0 > 0)")
    if not f.is_radial:
        raise DomainError("f must be radial")
    pot = PotentialSpec(c, 2.0, cap)
    lhs = fk_fullspace(N, pot, f, t, r0, grid, rng.substream(0), workers=workers)

    mu = N / 2 - 1
    cn = hardy_coefficient(N)
    dt = t / grid.n_steps
    bridge = grid.bridge_correction
    start = np.array([r0, 0.0])

    def rate(r2):
        with np.errstate(divide="ignore"):
            return pot.value_r2(r2) - cn / r2

    def kernel(n, gen):
        pos = np.tile(start, (n, 1))
        acc = np.zeros(n)
        v_prev = rate(_r2(pos))
        for _ in range(grid.n_steps):
            new = pos + math.sqrt(dt) * gen.standard_normal((n, 2))
            v_new = rate(_r2(new))
            if bridge:
                mid = 0.5 * (pos + new) + 0.5 * math.sqrt(dt) * gen.standard_normal((n, 2))
                acc += dt / 6 * (v_prev + 4 * rate(_r2(mid)) + v_new)
                near = np.minimum(_r2(pos), _r2(new)) < _NEAR_ORIGIN * dt
                if np.any(near):
                    idx = np.nonzero(near)[0]
                    fine = _bridge_integral(pos[idx], new[idx], dt, gen, rate)
                    acc[idx] += fine - dt / 6 * (v_prev[idx] + 4 * rate(_r2(mid[idx])) + v_new[idx])
            else:
                acc += 0.5 * dt * (v_prev + v_new)
            v_prev = v_new
            pos = new
        R = np.sqrt(_r2(pos))
        return f.radial(R) * (R / r0) ** mu * np.exp(acc)

    rhs = run_batches(kernel, grid.n_paths, rng.substream(1), workers=workers)[0]
    return lhs, rhs


# --------------------------------------------------------------------------
# semi-analytic event probes

def _sphere_avg_gauss(N, s, rad, x):
    """Average over |u| = 1 of g_N(s, rad u - x), vectorised in rad."""
    rad = np.asarray(rad, dtype=float)
    ax = float(np.linalg.norm(x))
    base = np.exp(-(rad - ax) ** 2 / (2 * s)) / (2 * math.pi * s) ** (N / 2)
    z = rad * ax / s
    if ax == 0:
        return np.exp(-rad * rad / (2 * s)) / (2 * math.pi * s) ** (N / 2)
    nu = N / 2 - 1
    # Gamma(N/2) (z/2)^(-nu) I_nu(z) e^{-z}; N = 1 gives cosh(z) e^{-z}
    with np.errstate(divide="ignore", invalid="ignore"):
        avg = special.gamma(N / 2) * np.power(z / 2, -nu) * special.ive(nu, z)
    avg = np.where(z < 1e-8, np.exp(-z), avg)
    return base * avg


def disc_mass(N, s, center, radius, start=None):
    """P_start(B_s in disc) via the noncentral chi-square law."""
    c = np.zeros(N)
    k = min(N, len(center))
    c[:k] = np.asarray(center, dtype=float)[:k]
    if start is not None:
        c = c - np.asarray(start, dtype=float)
    lam = float(c @ c) / s
    return float(stats.ncx2.cdf(radius * radius / s, N, lam)) if lam > 0 else float(stats.chi2.cdf(radius * radius / s, N))


def event_probability(N: int, geo: ExperimentGeometry, t: float, x, n: int) -> float:
    """P_x(max over [a t, (1-a) t] of |B| < 1/n, B_t in D), product form.

    The final factor P_z(B_{a t} in D) for |z| < 1/n is replaced by its value
    at z = 0, which moves only the n-independent prefactor.
    """
    x = _point(x, N)
    at, gt = geo.a * t, geo.gamma * t
    T = n * n * gt
    area = sphere_area(N)

    def integrand(rho):
        return area * rho ** (N - 1) * float(_sphere_avg_gauss(N, at, rho / n, x)) * confine_prob(N, rho, T).value

    val, err = integrate.quad(integrand, 0, 1, epsabs=0, epsrel=1e-10, limit=200)
    if not math.isfinite(val) or err > 1e-6 * abs(val):
        raise NumericError("radial quadrature for the event probability failed", n=n, value=val, err=err)
    return (1.0 / n) ** N * val * disc_mass(N, at, geo.disc_center, geo.disc_radius)


@dataclass(frozen=True)
class RateFit:
    rate: float
    target: float
    n_list: tuple
    probabilities: tuple

    @property
    def rel_error(self):
        return abs(self.rate - self.target) / self.target

    def to_dict(self):
        return {"rate": self.rate, "target": self.target, "rel_error": self.rel_error,
                "n_list": list(self.n_list), "probabilities": list(self.probabilities)}


def event_rate_probe(N: int, geo: ExperimentGeometry, t: float, x, n_list) -> RateFit:
    """Fit s in log P_x(A_n) + N log n = const - s n^2 gamma t."""
    n_list = tuple(int(n) for n in n_list)
    if len(n_list) < 3:
        raise DomainError("need at least three n values")
    probs = [event_probability(N, geo, t, x, n) for n in n_list]
    n_arr = np.array(n_list, dtype=float)
    yv = np.log(probs) + N * np.log(n_arr)
    slope = np.polyfit(n_arr ** 2 * geo.gamma * t, yv, 1)[0]
    target = 0.5 * bessel_j_zero((N - 2) / 2, 1) ** 2
    return RateFit(float(-slope), target, n_list, tuple(probs))


def _panels(a, b, breaks, per_unit, rule=np.polynomial.legendre.leggauss(24)):
    pts = sorted({a, b, *[p for p in breaks if a < p < b]})
    xs, ws = [], []
    nodes, weights = rule
    for lo, hi in zip(pts[:-1], pts[1:]):
        k = max(1, int(math.ceil((hi - lo) * per_unit)))
        edges = np.linspace(lo, hi, k + 1)
        half = 0.5 * np.diff(edges)[:, None]
        xs.append((edges[:-1, None] + half * (nodes + 1)).ravel())
        ws.append((half * weights).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def interval_hit_prob(s, z, interval):
    """P_z(|B_s| in (l, r))."""
    lo, hi = interval
    sd = math.sqrt(s)
    z = np.asarray(z, dtype=float)
    return (special.ndtr((hi - z) / sd) - special.ndtr((lo - z) / sd)
            + special.ndtr((-lo - z) / sd) - special.ndtr((-hi - z) / sd))


@dataclass(frozen=True)
class BoundaryProbe:
    value: float
    bound: float
    c1: float
    c2: float

    @property
    def holds(self):
        return self.value >= self.bound

    def to_dict(self):
        return {"value": self.value, "bound": self.bound, "c1": self.c1, "c2": self.c2, "holds": self.holds}


def boundary_In_probe(nu_val: float, t: float, x_N: float, geo: ExperimentGeometry) -> BoundaryProbe:
    """Exact I = E_{x_N}[exp(nu (L_{(1-a)t} - L_{at})); |B_t| in J] against its lower bound.

    I is computed by composing the Gaussian kernel on [0, a t], the
    exp(nu L)-weighted kernel on [a t, (1-a) t] and P(|B_{a t}| in J) at the end.
    """
    if not t > 0 or nu_val < 0:
        raise DomainError("needs t > 0 and nu >= 0")
    at, gt = geo.a * t, geo.gamma * t
    J = geo.interval
    w1 = math.sqrt(at)
    xs, wx = _panels(x_N - 12 * w1, x_N + 12 * w1, [0.0, x_N], 8 / w1)
    span = 12 * math.sqrt(t) + abs(x_N) + J[1] + nu_val * gt
    zs, wz = _panels(-span, span, [0.0, -J[0], J[0], -J[1], J[1]], 8 / min(1.0, math.sqrt(gt)))
    hz = interval_hit_prob(at, zs, J)
    inner = np.array([np.sum(wz * local_time_weighted_density(nu_val, gt, xv, zs) * hz) for xv in xs])
    value = float(np.sum(wx * g1(at, xs - x_N) * inner))

    zz = np.linspace(0.0, 1.0, 2001)
    c1 = float(np.min(interval_hit_prob(at, zz, J)))
    mass = float(special.ndtr((1 - x_N) / w1) - special.ndtr((-1 - x_N) / w1))
    c2 = math.erfc(math.sqrt(2 / gt)) * mass
    bound = c1 * c2 * nu_val * math.exp(0.5 * nu_val ** 2 * gt - 2 * nu_val)
    return BoundaryProbe(value, bound, c1, c2)


# --------------------------------------------------------------------------
# cap sweeps

@dataclass
class SweepRow:
    c: float
    caps: list
    means: list
    std_errs: list
    ratios: list
    increments: list
    increment_errs: list
    verdict: str
    monotone: bool

    def to_dict(self):
        return dict(self.__dict__)


def _verdict(means, inc, inc_se, plateau):
    last_ratio = means[-1] / means[-2]
    if last_ratio < plateau:
        return "plateau"
    if all(d > 3 * s for d, s in zip(inc[-2:], inc_se[-2:])):
        return "growing"
    return "inconclusive"


def threshold_sweep(setting: str, N: int, c_list, m_list, t: float, x, grid: PathGrid, rng, *,
                    beta: float | None = None, alpha: float = 1.0, u0: InitialDatum | None = None,
                    plateau: float = 1.05, workers: int = 1) -> list[SweepRow]:
    """u_m over an increasing cap list, with the same paths for every cap.

    Verdicts: "plateau" when the last ratio u_{m_K}/u_{m_{K-1}} is below the
    cutoff, "growing" when the last two increments are each above three of
    their own standard errors, otherwise "inconclusive". These are trends
    only; no finite run decides divergence.
    """
    m_list = [float(m) for m in m_list]
    if len(m_list) < 2 or any(b <= a for a, b in zip(m_list[:-1], m_list[1:])):
        raise DomainError("m_list must be increasing with at least two entries")
    x = _point(x, N)
    k = len(m_list)
    rows = []
    for j, c in enumerate(c_list):
        if setting == "fullspace":
            pot = PotentialSpec(c, 2.0 if beta is None else beta)
            datum = u0 or InitialDatum("constant_one")
            base = _bulk_kernel(N, pot, m_list, datum, t, x, grid.n_steps, grid.bridge_correction)
        elif setting == "stable":
            pot = PotentialSpec(c, alpha if beta is None else beta)
            datum = u0 or InitialDatum("constant_one")
            base = _stable_kernel(N, alpha, pot, m_list, datum, t, x, grid.n_steps)
        elif setting == "halfspace":
            pot = PotentialSpec(c, 1.0 if beta is None else beta, flavor="boundary")
            datum = u0 or InitialDatum("constant_one")
            base = _halfspace_kernel(N, pot, m_list, datum, t, x, grid.n_steps)
        else:
            raise DomainError(f"unknown setting {setting!r}")

        mono = [True]

        def kernel(n, gen, base=base):
            w = base(n, gen)
            d = np.diff(w, axis=0)
            if np.any(d < 0):
                mono[0] = False
            return np.concatenate([w, d], axis=0)

        est = run_batches(kernel, grid.n_paths, rng.substream(j), workers=workers)
        u, inc = est[:k], est[k:]
        means = [e.mean for e in u]
        ratios = [b / a for a, b in zip(means[:-1], means[1:])]
        inc_m = [e.mean for e in inc]
        inc_se = [e.std_err for e in inc]
        rows.append(SweepRow(float(c), m_list, means, [e.std_err for e in u], ratios, inc_m, inc_se,
                             _verdict(means, inc_m, inc_se, plateau), mono[0]))
    return rows
