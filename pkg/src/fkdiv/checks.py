"""Statistical checks of the samplers and kernels, shared by the CLI and the tests."""
from __future__ import annotations

import math

import numpy as np
from scipy import special, stats

from . import laws
from .estimate import MCEstimate, run_batches
from .halfspace_stable import (bessel_k_laplace, cauchy_cf, decomp_second_term_check, phi_kernel,
                               prelat_identity_check, relativistic_cf)
from .model import InitialDatum, PathGrid, PotentialSpec
from .rng import RngStream


def z_check(est: MCEstimate, target: float, k: float = 3.0, **info) -> dict:
    z = (est.mean - target) / est.std_err if est.std_err > 0 else (0.0 if est.mean == target else math.inf)
    return {**info, "estimate": est.mean, "std_err": est.std_err, "target": target, "z": z, "passed": abs(z) < k}


def _mc(kernel, n, rng, workers=1):
    return run_batches(kernel, n, rng, batch_size=100_000, workers=workers)[0]


def subordinator_laplace_check(alpha, t, lam, n, rng, workers=1):
    est = _mc(lambda k, g: np.exp(-lam * t ** (2 / alpha) * laws.positive_stable(alpha / 2, g, k)), n, rng, workers)
    return z_check(est, laws.subordinator_laplace(alpha, t, lam), name="subordinator", alpha=alpha, t=t, lam=lam)


def hitting_laplace_check(a, lam, n, rng, workers=1):
    est = _mc(lambda k, g: np.exp(-lam * (a / g.standard_normal(k)) ** 2), n, rng, workers)
    return z_check(est, math.exp(-a * math.sqrt(2 * lam)), name="hitting_time", a=a, lam=lam)


def _cf_kernel(d, xi_norm, draw_clock):
    xi = np.zeros(d)
    xi[0] = xi_norm

    def kernel(k, g):
        tau = draw_clock(k, g)
        w = np.sqrt(tau)[:, None] * g.standard_normal((k, d))
        return np.cos(w @ xi)

    return kernel


def cauchy_cf_check(d, a, xi, n, rng, workers=1):
    """E cos(xi . W(tau_a)) against exp(-a |xi|) (the sine part vanishes by symmetry)."""
    est = _mc(_cf_kernel(d, xi, lambda k, g: (a / g.standard_normal(k)) ** 2), n, rng, workers)
    return z_check(est, cauchy_cf(a, xi), name="cauchy_cf", d=d, a=a, xi=xi)


def relativistic_cf_check(d, m, t, xi, n, rng, workers=1):
    est = _mc(_cf_kernel(d, xi, lambda k, g: laws.inverse_gaussian_sample(t / m, t * t, g, k)), n, rng, workers)
    return z_check(est, relativistic_cf(m, t, xi), name="relativistic_cf", d=d, m=m, t=t, xi=xi)


def relativistic_laplace_check(m, t, lam, n, rng, workers=1):
    est = _mc(lambda k, g: np.exp(-lam * laws.inverse_gaussian_sample(t / m, t * t, g, k)), n, rng, workers)
    return z_check(est, math.exp(-t * (math.sqrt(2 * lam + m * m) - m)), name="relativistic_laplace", m=m, t=t, lam=lam)


def transform_suite(seed: int = 2024, n: int = 1_000_000, workers: int = 1) -> list[dict]:
    root = RngStream(seed, stream_id=5)
    out = []
    for i, alpha in enumerate((0.5, 1.0, 1.5)):
        out.append(subordinator_laplace_check(alpha, 1.0, 1.0, n, root.substream(i), workers))
    out.append(hitting_laplace_check(1.0, 1.0, n, root.substream(10), workers))
    for i, xi in enumerate((0.5, 1.0, 2.0)):
        out.append(cauchy_cf_check(2, 1.0, xi, n, root.substream(20 + i), workers))
    for i, xi in enumerate((0.5, 1.0, 2.0)):
        out.append(relativistic_cf_check(2, 1.0, 1.0, xi, n, root.substream(30 + i), workers))
    return out


# --------------------------------------------------------------------------
# Kolmogorov-Smirnov checks of the samplers

def _ks(sample, cdf, name, **info):
    res = stats.kstest(sample, cdf)
    return {"name": name, **info, "statistic": float(res.statistic), "p_value": float(res.pvalue),
            "passed": bool(res.pvalue > 0.01)}


def _subordinator_alpha1_cdf(t):
    # alpha = 1: T_t has Laplace transform exp(-t sqrt(lam)), the first passage law at level t/sqrt(2)
    a = t / math.sqrt(2)
    return lambda s: laws.hitting_time_cdf(a, np.maximum(s, 1e-300))


LAW_NAMES = ("subordinator", "hitting_time", "local_time", "last_zero", "meander", "relativistic_clock")


def law_check(name: str, seed: int = 7, n: int = 100_000) -> dict:
    rng = RngStream(seed, stream_id=9)
    if name == "subordinator":
        x = laws.subordinator_sample(1.0, 1.3, rng, size=n)
        return _ks(x, _subordinator_alpha1_cdf(1.3), name, alpha=1.0, t=1.3)
    if name == "hitting_time":
        x = laws.hitting_time_sample(0.7, rng, size=n)
        return _ks(x, lambda s: laws.hitting_time_cdf(0.7, s), name, a=0.7)
    if name == "local_time":
        _, z = laws.local_time_joint_sample(0.3, 1.0, rng, size=n)
        return _ks(z, stats.norm(0.3, 1.0).cdf, name, x=0.3, s=1.0, marginal="endpoint")
    if name == "last_zero":
        x = laws.last_zero_sample(2.0, rng, size=n)
        return _ks(x, lambda v: laws.last_zero_cdf(2.0, v), name, t=2.0)
    if name == "meander":
        x = laws.meander_endpoint_sample(0.8, rng, size=n)
        return _ks(x, lambda y: laws.meander_endpoint_cdf(0.8, y), name, dur=0.8)
    if name == "relativistic_clock":
        m, t = 1.5, 0.8
        x = laws.inverse_gaussian_sample(t / m, t * t, rng.generator(), n)
        return _ks(x, stats.invgauss(mu=(t / m) / (t * t), scale=t * t).cdf, name, m=m, t=t)
    raise ValueError(f"unknown law {name!r}; choose from {LAW_NAMES}")


def levy_smoke_check(seed: int = 11, n: int = 100_000, t: float = 1.0) -> dict:
    """Running maximum from 0 versus the local time at 0 (same law, two-sample KS)."""
    from .halfspace_stable import running_max_sample
    mx, _ = running_max_sample(t, RngStream(seed, 1), size=n)
    lt, _ = laws.local_time_joint_sample(0.0, t, RngStream(seed, 2), size=n)
    res = stats.ks_2samp(mx, lt)
    return {"name": "levy", "statistic": float(res.statistic), "p_value": float(res.pvalue),
            "passed": bool(res.pvalue > 0.01)}


# --------------------------------------------------------------------------
# appendix checks

APPENDIX_NAMES = ("cauchy", "relativistic", "prelat", "decomp", "phi")

PRELAT_DATUM = InitialDatum("gaussian_bump", center=(0.0, 0.5), radius=0.5)
PRELAT_POTENTIAL = PotentialSpec(0.5, 1.0, None, "boundary", shift=1.0)


def prelat_checks(seed: int = 31, n_paths: int = 100_000, n_steps: int = 128, workers: int = 1) -> list[dict]:
    grid = PathGrid(1.0, n_steps=n_steps, n_paths=n_paths)
    rng = RngStream(seed, stream_id=12)
    out = []
    for i, (label, pot, budget) in enumerate((("V=0", PotentialSpec(0.0, flavor="boundary"), None),
                                              ("bounded", PRELAT_POTENTIAL, 0.05))):
        r = prelat_identity_check(1.0, [0.0], pot, PRELAT_DATUM, grid, rng.substream(i), workers=workers,
                                  rel_budget=budget)
        out.append({"case": label, **r.to_dict()})
    return out


def appendix_check(name: str, seed: int = 17, workers: int = 1) -> dict:
    rng = RngStream(seed, stream_id=13)
    if name == "cauchy":
        items = [cauchy_cf_check(2, 1.0, xi, 1_000_000, rng.substream(i), workers) for i, xi in enumerate((0.5, 1.0, 2.0))]
    elif name == "relativistic":
        items = [relativistic_cf_check(2, 1.0, 1.0, xi, 1_000_000, rng.substream(i), workers)
                 for i, xi in enumerate((0.5, 1.0, 2.0))]
    elif name == "prelat":
        items = prelat_checks(seed, workers=workers)
    elif name == "decomp":
        datum = InitialDatum("gaussian_bump", center=(0.0, 0.0, 1.0), radius=0.5)
        r = decomp_second_term_check(0.5, [0.0, 0.0, 1.0], datum, 400_000, rng, workers=workers)
        items = [r.to_dict()]
    elif name == "phi":
        items = []
        for N in (1, 2, 3, 4):
            q, c = bessel_k_laplace(N, 1.3, 0.7)
            items.append({"N": N, "quadrature": q, "closed_form": c, "passed": abs(q - c) <= 1e-8 * abs(c)})
        y = np.linspace(0.1, 5, 50)
        closed = 2 * (2 * math.pi * y) ** -0.5 * np.sqrt(math.pi / (2 * y)) * np.exp(-y)
        items.append({"N": 1, "max_rel_err_vs_closed": float(np.max(np.abs(phi_kernel(1, y) / closed - 1))),
                      "passed": bool(np.allclose(phi_kernel(1, y), closed, rtol=1e-12))})
    else:
        raise ValueError(f"unknown appendix check {name!r}; choose from {APPENDIX_NAMES}")
    return {"name": name, "items": items, "passed": all(i["passed"] for i in items)}
