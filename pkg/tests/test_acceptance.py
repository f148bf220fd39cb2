"""Acceptance criteria, one test per criterion (test_cNN_*).

Each Monte Carlo criterion has a runner returning its emitted means, so the
determinism criterion can replay every run with the same seeds.
"""
import math
import time

import numpy as np
import pytest
from scipy import special

from fkdiv import checks, confinement, fk_mc, laws, thresholds
from fkdiv.model import ExperimentGeometry, InitialDatum, PathGrid, PotentialSpec
from fkdiv.pde_oracle import mc_vs_pde_check
from fkdiv.rng import RngStream
from fkdiv.specfun import ball_volume, bessel_j_zero, bessel_j_zeros, sphere_area

pytestmark = pytest.mark.slow

SEED = 20240601
GAUSS = InitialDatum("gaussian_bump", radius=0.5)
_MEANS = {}


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


# --------------------------------------------------------------------------
# runners for the Monte Carlo criteria

def run_confine(workers=1):
    out = []
    for i, (N, rho) in enumerate((n, r) for n in (1, 3) for r in (0.0, 0.5)):
        est = confinement.confine_prob_mc(N, rho, 0.5, 100_000, RngStream(SEED, 4).substream(i), n_steps=500,
                                          workers=workers)
        out.append((N, rho, est, confinement.confine_prob(N, rho, 0.5).value))
    return out


def run_transforms(workers=1):
    return checks.transform_suite(seed=SEED, n=1_000_000, workers=workers)


def run_fk_pde(workers=1):
    return mc_vs_pde_check(3, PotentialSpec(0.3, 2.0, 8.0), GAUSS, 0.5, [1.0, 0.0, 0.0],
                           PathGrid(0.5, n_steps=100, n_paths=200_000), RngStream(SEED, 7), workers=workers)


BESSEL_GRID = ((3, 0.1, 0.5), (3, 0.125, 0.5), (4, 0.5, 0.5), (4, 0.2, 1.0), (5, 0.3, 0.25), (5, 1.125, 0.5))


def run_bessel(workers=1):
    out = []
    for i, (N, c, t) in enumerate(BESSEL_GRID):
        lhs, rhs = fk_mc.fk_radial_bessel(N, c, 10.0, GAUSS, t, 1.0, PathGrid(t, n_steps=100, n_paths=100_000),
                                          RngStream(SEED, 8).substream(i), workers=workers)
        out.append(((N, c, t), lhs, rhs))
    return out


def run_sweep(workers=1):
    return fk_mc.threshold_sweep("fullspace", 3, [1.0, 0.02], [4, 8, 16, 32], 0.5, [0.5, 0.0, 0.0],
                                 PathGrid(0.5, n_steps=128, n_paths=100_000), RngStream(SEED, 11), workers=workers)


def run_prelat(workers=1):
    return checks.prelat_checks(seed=SEED, n_paths=100_000, n_steps=128, workers=workers)


def means_of(name, result):
    if name == "confine":
        return [r[2].mean for r in result]
    if name == "transforms":
        return [r["estimate"] for r in result]
    if name == "fk_pde":
        return [result.mc.mean]
    if name == "bessel":
        return [v for _, lhs, rhs in result for v in (lhs.mean, rhs.mean)]
    if name == "sweep":
        return [m for row in result for m in row.means]
    if name == "prelat":
        return [v for r in result for v in (r["lhs"]["mean"], r["rhs"]["mean"])]
    raise KeyError(name)


RUNNERS = {"confine": run_confine, "transforms": run_transforms, "fk_pde": run_fk_pde, "bessel": run_bessel,
           "sweep": run_sweep, "prelat": run_prelat}


# --------------------------------------------------------------------------

def test_c01_bessel_zeros(report):
    with Timer() as tm:
        k = np.arange(1, 21)
        err_half = np.max(np.abs(bessel_j_zeros(0.5, 20) - k * math.pi))
        err_mhalf = np.max(np.abs(bessel_j_zeros(-0.5, 20) - (k - 0.5) * math.pi))
        j01 = bessel_j_zero(0.0, 1)
    report(f"max err mu=1/2: {err_half:.1e}, mu=-1/2: {err_mhalf:.1e}, j01={j01!r}, {tm.elapsed:.2f}s")
    assert err_half < 1e-10 and err_mhalf < 1e-10
    assert abs(j01 - 2.404825557695773) < 1e-9
    assert tm.elapsed < 1.0


def test_c02_confined_mass_lower_bound(report):
    with Timer() as tm:
        margins = {}
        for N in range(1, 6):
            for T in (0.05, 0.1, 0.25, 0.5, 1, 2, 3):
                margins[(N, T)] = confinement.confined_mass(N, T).value - confinement.keylem_bound(N, T)
        rates = {N: -(2 / 10) * math.log(confinement.confined_mass(N, 10).value) for N in range(1, 6)}
    worst = min(margins, key=margins.get)
    report(f"min margin {margins[worst]:.3e} at (N,T)={worst}, {tm.elapsed:.2f}s")
    rel = {}
    for N, r in rates.items():
        j2 = bessel_j_zero((N - 2) / 2, 1) ** 2
        rel[N] = abs(r - j2) / j2
        report(f"N={N}: -(2/T) log mass = {r:.5f}, j^2 = {j2:.5f}, rel diff {rel[N]:.4f}")
    assert all(m >= 0 for m in margins.values())
    assert tm.elapsed < 10.0
    assert all(v < 0.01 for v in rel.values()), f"rate outside 1%: {rel}"


def test_c03_rayleigh_identity(report):
    with Timer() as tm:
        errs = {}
        for mu in (-0.5, 0.0, 0.5, 1.5):
            j = bessel_j_zeros(mu, 2000)
            total = math.fsum(1 / j ** 2) + confinement.rayleigh_tail(mu, 2000)
            errs[mu] = abs(total - 1 / (4 * (mu + 1)))
            # T -> 0: 2 |S^{N-1}| sum j^-2 = |B^N| with N = 2 mu + 2
            N = int(2 * mu + 2)
            if N >= 1:
                assert 2 * sphere_area(N) * total == pytest.approx(ball_volume(N), abs=1e-5)
    report(f"residuals {', '.join(f'{m}: {e:.1e}' for m, e in errs.items())}, {tm.elapsed:.2f}s")
    assert all(e < 1e-6 for e in errs.values())
    assert tm.elapsed < 5.0


def test_c04_series_vs_mc(report):
    with Timer() as tm:
        res = run_confine()
    _MEANS["confine"] = means_of("confine", res)
    for N, rho, est, exact in res:
        report(f"N={N} rho={rho}: series {exact:.5f}, mc {est.mean:.5f} +- {est.std_err:.5f}, "
               f"z={(est.mean - exact) / est.std_err:+.2f}")
    assert all(abs(est.mean - exact) < 3 * est.std_err for _, _, est, exact in res)
    assert tm.elapsed < 60.0


def test_c05_transform_suite(report):
    with Timer() as tm:
        res = run_transforms()
    _MEANS["transforms"] = means_of("transforms", res)
    report(f"max |z| = {max(abs(r['z']) for r in res):.2f} over {len(res)} checks, {tm.elapsed:.1f}s")
    assert len(res) == 10
    assert all(abs(r["z"]) < 3 for r in res), [(r["name"], r["z"]) for r in res]
    assert tm.elapsed < 30.0


def test_c06_hartman_watson(report):
    with Timer() as tm:
        marg = laws.hw_z_marginal(3, 1, 1, 1)
        dens = laws.bessel_transition_density(3, 1, 1, 1)
        z, lim = laws.hw_large_z_limit(1.0)
    k0 = float(special.k0(1.0))
    report(f"marginal {marg:.14f} vs density {dens:.14f}; z={z:g}: {lim:.6f} vs K0(1)={k0:.6f}, {tm.elapsed:.1f}s")
    assert abs(marg - dens) <= 1e-6 * abs(dens)
    assert abs(lim - k0) <= 0.02 * k0
    assert tm.elapsed < 60.0


def test_c07_fk_vs_pde(report):
    with Timer() as tm:
        res = run_fk_pde()
    _MEANS["fk_pde"] = means_of("fk_pde", res)
    d = res.to_dict()
    report(f"pde {d['pde']:.6f}, mc {res.mc.mean:.6f} +- {res.mc.std_err:.6f}, z={d['z']:+.2f}, {tm.elapsed:.1f}s")
    assert res.passed
    assert tm.elapsed < 120.0


def test_c08_bessel_identity(report):
    with Timer() as tm:
        res = run_bessel()
    _MEANS["bessel"] = means_of("bessel", res)
    assert any(abs(c - thresholds.hardy_constant(N)) < 1e-15 for N, c, _ in BESSEL_GRID)
    zs = []
    for (N, c, t), lhs, rhs in res:
        z = (lhs.mean - rhs.mean) / math.hypot(lhs.std_err, rhs.std_err)
        zs.append(z)
        report(f"(N,c,t)=({N},{c},{t}): lhs {lhs.mean:.5f} rhs {rhs.mean:.5f} z={z:+.2f}")
    report(f"{tm.elapsed:.1f}s")
    assert all(abs(z) < 3 for z in zs)
    assert tm.elapsed < 180.0


def test_c09_event_rate(report):
    with Timer() as tm:
        fits = [fk_mc.event_rate_probe(N, ExperimentGeometry(), 1.0, [0.0] * N, range(2, 9)) for N in (1, 2, 3)]
    for N, f in zip((1, 2, 3), fits):
        report(f"N={N}: rate {f.rate:.5f}, target {f.target:.5f}, rel err {f.rel_error:.4f}")
    assert all(f.rel_error < 0.10 for f in fits)
    assert tm.elapsed < 30.0


BOUNDARY_GRID = ((0.5, 1.0, 0.5), (1.0, 1.0, 0.5), (2.0, 1.0, 0.5), (1.0, 2.0, 0.2), (3.0, 1.0, 0.0), (1.0, 0.5, 0.8))


def test_c10_boundary_bound(report):
    with Timer() as tm:
        probes = [fk_mc.boundary_In_probe(nu, t, xn, ExperimentGeometry()) for nu, t, xn in BOUNDARY_GRID]
    for p_, pr in zip(BOUNDARY_GRID, probes):
        report(f"(nu,t,x_N)={p_}: value {pr.value:.4e} >= bound {pr.bound:.4e}: {pr.holds}")
    assert all(pr.holds for pr in probes)
    assert tm.elapsed < 10.0


def test_c11_threshold_trends(report):
    with Timer() as tm:
        rows = run_sweep()
    _MEANS["sweep"] = means_of("sweep", rows)
    for r in rows:
        report(f"c={r.c}: ratios {', '.join(f'{q:.4f}' for q in r.ratios)}, verdict {r.verdict}, "
               f"pathwise monotone {r.monotone}")
    high, low = rows
    assert high.monotone and low.monotone
    assert high.verdict == "growing"
    assert low.verdict == "plateau"
    assert tm.elapsed < 300.0


def test_c12_prelat_identity(report):
    with Timer() as tm:
        res = run_prelat()
    _MEANS["prelat"] = means_of("prelat", res)
    for r in res:
        report(f"{r['case']}: lhs {r['lhs']['mean']:.5f} rhs {r['rhs']['mean']:.5f} z={r['z']:+.2f} "
               f"rel {r['rel_diff']:.4f}")
    assert all(r["passed"] for r in res)
    assert res[1]["rel_diff"] <= 0.05
    assert tm.elapsed < 300.0


def test_c13_determinism(report):
    worst = 0.0
    for name, runner in RUNNERS.items():
        first = _MEANS.get(name) or means_of(name, runner())
        again = means_of(name, runner())
        threaded = means_of(name, runner(workers=3))
        assert again == first, f"{name}: repeat run differs"
        diff = max(abs(a - b) for a, b in zip(first, threaded))
        worst = max(worst, diff)
        assert diff <= 1e-12, f"{name}: workers changed the means by {diff}"
    report(f"{len(RUNNERS)} runs bit-identical on replay; max |1 vs 3 workers| = {worst:.1e}")
