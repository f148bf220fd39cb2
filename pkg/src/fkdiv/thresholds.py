"""Hardy, fractional Hardy and Kato constants against the Bessel-zero thresholds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import DomainError
from .specfun import bessel_j_zero, j1_bracket


def hardy_constant(N: int) -> float:
    """C_N = (1/2) ((N-2)/2)^2."""
    if int(N) != N or N < 3:
        raise DomainError("Hardy constant needs an integer N >= 3")
    return 0.5 * ((N - 2) / 2) ** 2


def frac_hardy_constant(N: int, alpha: float) -> float:
    """C_{N,alpha} = 2^alpha Gamma((N+alpha)/4)^2 / Gamma((N-alpha)/4)^2."""
    if not 0 < alpha <= 2:
        raise DomainError("alpha must lie in (0, 2]")
    if not N > alpha:
        raise DomainError("fractional Hardy constant needs N > alpha")
    # lgamma keeps large N finite
    return 2 ** alpha * math.exp(2 * (math.lgamma((N + alpha) / 4) - math.lgamma((N - alpha) / 4)))


def kato_constant(N: int) -> float:
    """C*_N = 2 Gamma(N/4)^2 / Gamma((N-2)/4)^2."""
    if int(N) != N or N < 3:
        raise DomainError("Kato constant needs an integer N >= 3")
    return 2 * math.exp(2 * (math.lgamma(N / 4) - math.lgamma((N - 2) / 4)))


def cond_bm(N: int) -> float:
    """(1/2) j_{(N-2)/2,1}^2, the whole-space threshold."""
    if int(N) != N or N < 1:
        raise DomainError("needs a positive integer N")
    return 0.5 * bessel_j_zero((N - 2) / 2, 1) ** 2


def cond_stable(N: int, alpha: float) -> float:
    """j_{(N-2)/2,1}^alpha, the alpha-stable threshold."""
    if not 0 < alpha < 2:
        raise DomainError("alpha must lie in (0, 2)")
    if not N > alpha:
        raise DomainError("stable threshold needs N > alpha")
    return bessel_j_zero((N - 2) / 2, 1) ** alpha


def cond_boundary(N: int) -> float:
    """j_{(N-3)/2,1}, the boundary-potential threshold."""
    if int(N) != N or N < 3:
        raise DomainError("boundary threshold needs N >= 3")
    return bessel_j_zero((N - 3) / 2, 1)


def condition_constants(N: int, alpha: Optional[float] = None):
    """(cond_bm, cond_stable, cond_boundary); entries whose constraint fails are None."""
    bm = cond_bm(N)
    st = cond_stable(N, alpha) if alpha is not None and N > alpha else None
    bd = cond_boundary(N) if N >= 3 else None
    return bm, st, bd


def j1_bounds(mu: float) -> tuple[float, float]:
    """Lower and upper bounds on j_{mu,1}; checks that they bracket the computed zero."""
    lo, hi = j1_bracket(mu)
    j = bessel_j_zero(mu, 1)
    if not lo <= j <= hi:
        raise AssertionError(f"j1 bounds fail to bracket the zero at mu={mu}: {lo} <= {j} <= {hi}")
    return lo, hi


@dataclass
class ConstantReport:
    N: int
    alpha: Optional[float]
    hardy: Optional[float]
    frac_hardy: Optional[float]
    kato: Optional[float]
    cond_bm: float
    cond_stable: Optional[float]
    cond_boundary: Optional[float]
    ratios: dict = field(default_factory=dict)

    def row(self):
        return [self.N, self.hardy, self.frac_hardy, self.kato, self.cond_bm, self.cond_stable,
                self.cond_boundary, self.alpha]


def constant_report(N: int, alpha: Optional[float] = None) -> ConstantReport:
    bm, st, bd = condition_constants(N, alpha)
    hardy = hardy_constant(N) if N >= 3 else None
    frac = frac_hardy_constant(N, alpha) if alpha is not None and N > alpha else None
    kato = kato_constant(N) if N >= 3 else None
    ratios = {}
    if hardy:
        ratios["bm/hardy"] = bm / hardy
    if frac and st:
        ratios["stable/frac_hardy"] = st / frac
    if kato and bd:
        ratios["boundary/kato"] = bd / kato
    return ConstantReport(N, alpha, hardy, frac, kato, bm, st, bd, ratios)


def asymptotic_report(N_list, alphas=(0.5, 1.0, 1.5)) -> dict:
    """Threshold-to-constant ratios per N, plus whether each sequence decreases monotonically."""
    table = {}
    for N in N_list:
        rec = {}
        if N >= 3:
            rec["bm/hardy"] = cond_bm(N) / hardy_constant(N)
            rec["boundary/kato"] = cond_boundary(N) / kato_constant(N)
        for a in alphas:
            if N > a:
                rec[f"stable/frac_hardy[alpha={a}]"] = cond_stable(N, a) / frac_hardy_constant(N, a)
        table[int(N)] = rec
    keys = sorted({k for rec in table.values() for k in rec})
    monotone = {}
    for k in keys:
        seq = [table[N][k] for N in sorted(table) if k in table[N]]
        monotone[k] = all(b <= a for a, b in zip(seq[:-1], seq[1:]))
    return {"ratios": table, "monotone_decreasing": monotone}
