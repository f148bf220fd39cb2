"""Radial Crank-Nicolson solver for du/dt = (1/2) Laplacian u + V_m u, used as a non-MC oracle."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, NumericError
from .fk_mc import fk_fullspace
from .model import InitialDatum, PathGrid, PotentialSpec


@dataclass(frozen=True)
class RadialField:
    r_max: float
    n_r: int
    values: np.ndarray

    @property
    def r(self):
        return np.linspace(0.0, self.r_max, self.n_r)

    def __call__(self, r):
        out = np.interp(r, self.r, self.values)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class RadialGrid:
    r_max: float | None = None
    n_r: int = 1601
    n_t: int = 400


def _default_rmax(u0: InitialDatum, t):
    support = 3 * u0.radius if u0.kind == "gaussian_bump" else u0.radius
    return 8 * math.sqrt(t) + support


def radial_heat_solve(N: int, pot: PotentialSpec, u0: InitialDatum, t: float,
                      grid: RadialGrid = RadialGrid()) -> RadialField:
    """Crank-Nicolson in time, central differences in r.

    u_r(0) = 0 through a ghost node (the operator at r = 0 becomes N/2 u_rr);
    u = 0 at r_max.
    """
    if N < 2:
        raise DomainError("radial solver needs N >= 2")
    pot.require_bounded()
    if not u0.is_radial:
        raise DomainError("initial datum must be radial")
    if not t > 0:
        raise DomainError("t must be positive")
    r_max = grid.r_max or _default_rmax(u0, t)
    n = grid.n_r
    r = np.linspace(0.0, r_max, n)
    h = r[1]
    dt = t / grid.n_t
    v = pot.value_r2(r * r)
    if not np.all(np.isfinite(v)):
        raise NumericError("potential not finite on the grid", r_max=r_max)

    # operator rows for interior unknowns i = 0 .. n-2; u[n-1] = 0
    m = n - 1
    lower = np.zeros(m)
    diag = np.zeros(m)
    upper = np.zeros(m)
    ri = r[1:m]
    diag[:] = -1.0 / h ** 2 + v[:m]
    lower[1:] = 0.5 / h ** 2 - 0.25 * (N - 1) / (ri * h)
    upper[1:] = 0.5 / h ** 2 + 0.25 * (N - 1) / (ri * h)
    diag[0] = -N / h ** 2 + v[0]
    upper[0] = N / h ** 2

    ab = np.zeros((3, m))
    ab[0, 1:] = -0.5 * dt * upper[:-1]
    ab[1] = 1 - 0.5 * dt * diag
    ab[2, :-1] = -0.5 * dt * lower[1:]

    u = np.asarray(u0.radial(r), dtype=float)[:m].copy()
    for _ in range(grid.n_t):
        rhs = (1 + 0.5 * dt * diag) * u
        rhs[1:] += 0.5 * dt * lower[1:] * u[:-1]
        rhs[:-1] += 0.5 * dt * upper[:-1] * u[1:]
        u = solve_banded((1, 1), ab, rhs, check_finite=False)
        if not np.all(np.isfinite(u)):
            raise NumericError("tridiagonal solve produced non-finite values", r_max=r_max, dt=dt)
    values = np.append(u, 0.0)
    edge = values[int(0.95 * n):]
    if np.max(np.abs(edge)) > 1e-6 * max(np.max(np.abs(values)), 1e-300):
        warnings.warn("solution mass near r_max exceeds 1e-6; enlarge r_max", RuntimeWarning, stacklevel=2)
    return RadialField(r_max, n, values)


def gaussian_heat_exact(N, u0: InitialDatum, t, r):
    """Free radial solution for a Gaussian bump centred at the origin."""
    w2 = u0.radius ** 2
    return u0.amplitude * (w2 / (w2 + t)) ** (N / 2) * np.exp(-np.square(r) / (2 * (w2 + t)))


@dataclass(frozen=True)
class CrossCheck:
    mc: object
    pde: float
    passed: bool

    def to_dict(self):
        return {"mc": self.mc.to_dict(), "pde": self.pde, "passed": self.passed,
                "z": (self.mc.mean - self.pde) / self.mc.std_err if self.mc.std_err > 0 else 0.0}


def mc_vs_pde_check(N: int, pot: PotentialSpec, u0: InitialDatum, t: float, x, grid: PathGrid, rng,
                    *, pde_grid: RadialGrid = RadialGrid(), workers: int = 1) -> CrossCheck:
    """Pass when |mc - pde| < max(3 se, 0.02 |pde|)."""
    r0 = float(np.linalg.norm(np.atleast_1d(x)))
    pde = radial_heat_solve(N, pot, u0, t, pde_grid)(r0)
    mc = fk_fullspace(N, pot, u0, t, x, grid, rng, workers=workers)
    ok = abs(mc.mean - pde) < max(3 * mc.std_err, 0.02 * abs(pde))
    return CrossCheck(mc, pde, bool(ok))
