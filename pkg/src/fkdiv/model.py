"""Parameter records shared by the Monte Carlo estimators and the PDE oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError

FLAVORS = ("bulk", "boundary")
DATUM_KINDS = ("gaussian_bump", "box_indicator", "constant_one")


@dataclass(frozen=True)
class PotentialSpec:
    """V(r) = c (shift + r)^(-beta), evaluated as min(cap, V) when a cap is set.

    ``shift > 0`` gives a bounded profile such as c / (1 + |x'|); with the
    default ``shift = 0`` the profile is the singular power law.
    """

    c: float
    beta: float = 2.0
    cap: Optional[float] = None
    flavor: str = "bulk"
    shift: float = 0.0

    def __post_init__(self):
        if self.c < 0 or self.beta < 0 or self.shift < 0:
            raise DomainError("c, beta and shift must be nonnegative")
        if self.cap is not None and not self.cap >= 0:
            raise DomainError("cap must be nonnegative")
        if self.flavor not in FLAVORS:
            raise DomainError(f"flavor must be one of {FLAVORS}")

    @property
    def bounded(self) -> bool:
        return self.cap is not None or self.c == 0 or self.beta == 0 or self.shift > 0

    def require_bounded(self):
        if not self.bounded:
            raise DomainError("uncapped singular potential: the estimator needs the truncation "
                              "V_m = min(m, V) with a finite cap m")

    def with_cap(self, cap) -> PotentialSpec:
        return PotentialSpec(self.c, self.beta, cap, self.flavor, self.shift)

    def value_r2(self, r2, cap=None):
        """Potential as a function of the squared distance (vectorised)."""
        cap = self.cap if cap is None else cap
        r2 = np.asarray(r2, dtype=float)
        if self.c == 0:
            v = np.zeros_like(r2)
        elif self.beta == 0:
            v = np.full_like(r2, self.c)
        else:
            with np.errstate(divide="ignore"):
                base = np.sqrt(r2) + self.shift if self.shift else np.power(r2, 0.5)
                v = self.c * np.power(base, -self.beta)
        return v if cap is None else np.minimum(cap, v)

    def __call__(self, r):
        return self.value_r2(np.square(r))


@dataclass(frozen=True)
class InitialDatum:
    """Nonnegative initial datum.

    gaussian_bump: amplitude * exp(-|y - center|^2 / (2 radius^2)).
    box_indicator: amplitude on {|y - center| < radius}; with ``interval`` set,
        the ball is taken in the first N-1 coordinates and the last coordinate
        must lie in the interval.
    constant_one: amplitude everywhere.
    """

    kind: str
    center: tuple = ()
    radius: float = 1.0
    interval: Optional[tuple] = None
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in DATUM_KINDS:
            raise DomainError(f"kind must be one of {DATUM_KINDS}")
        if not self.amplitude > 0 or not self.radius > 0:
            raise DomainError("amplitude and radius must be positive (datum not identically zero)")
        if self.interval is not None:
            lo, hi = self.interval
            if not lo < hi:
                raise DomainError("interval must satisfy l < r")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    def center_vec(self, dim):
        c = np.zeros(dim)
        k = min(dim, len(self.center))
        c[:k] = self.center[:k]
        return c

    def __call__(self, y):
        """Evaluate at points whose last axis holds the coordinates."""
        y = np.asarray(y, dtype=float)
        dim = y.shape[-1]
        if self.kind == "constant_one":
            return np.full(y.shape[:-1], self.amplitude)
        c = self.center_vec(dim)
        if self.kind == "gaussian_bump":
            d2 = np.sum((y - c) ** 2, axis=-1)
            return self.amplitude * np.exp(-d2 / (2 * self.radius ** 2))
        if self.interval is None:
            d2 = np.sum((y - c) ** 2, axis=-1)
            return self.amplitude * (d2 < self.radius ** 2)
        lat = y[..., :-1] - c[:-1]
        inside = np.sum(lat * lat, axis=-1) < self.radius ** 2
        lo, hi = self.interval
        return self.amplitude * (inside & (y[..., -1] > lo) & (y[..., -1] < hi))

    @property
    def is_radial(self) -> bool:
        return self.kind == "constant_one" or (self.interval is None and not any(self.center))

    def radial(self, r):
        """Profile in |y| for a datum centred at the origin."""
        if not self.is_radial:
            raise DomainError("datum is not radial about the origin")
        r = np.asarray(r, dtype=float)
        if self.kind == "constant_one":
            return np.full(r.shape, self.amplitude)
        if self.kind == "gaussian_bump":
            return self.amplitude * np.exp(-r * r / (2 * self.radius ** 2))
        return self.amplitude * (r < self.radius)


@dataclass(frozen=True)
class ExperimentGeometry:
    """Splitting fraction a, the disc D and the interval J used by the event probes."""

    a: float = 0.25
    disc_center: tuple = ()
    disc_radius: float = 0.5
    interval: tuple = (0.2, 1.0)

    def __post_init__(self):
        if not 0 < self.a < 0.5:
            raise DomainError("a must lie in (0, 1/2)")
        if not self.disc_radius > 0:
            raise DomainError("disc radius must be positive")
        lo, hi = self.interval
        if not 0 < lo < hi:
            raise DomainError("interval must satisfy 0 < l < r")

    @property
    def gamma(self) -> float:
        return 1.0 - 2.0 * self.a


@dataclass(frozen=True)
class PathGrid:
    t_end: float
    dt: Optional[float] = None
    n_paths: int = 10_000
    bridge_correction: bool = True
    n_steps: int = field(default=0)

    def __post_init__(self):
        if not self.t_end > 0:
            raise DomainError("t_end must be positive")
        if self.n_paths < 1:
            raise DomainError("n_paths must be >= 1")
        if self.n_steps:
            steps = int(self.n_steps)
        elif self.dt is not None:
            if not 0 < self.dt <= self.t_end:
                raise DomainError("need 0 < dt <= t_end")
            steps = max(1, int(math.ceil(self.t_end / self.dt - 1e-9)))
        else:
            steps = 256
        object.__setattr__(self, "n_steps", steps)
        object.__setattr__(self, "dt", self.t_end / steps)
