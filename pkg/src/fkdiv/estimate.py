"""Monte Carlo estimates with a mergeable streaming variance."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream

DEFAULT_BATCH = 20_000


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_err: float
    n: int
    seed: dict = field(default_factory=dict, compare=False)
    m2: float = field(default=0.0, repr=False)

    @classmethod
    def from_samples(cls, samples, seed: dict | None = None) -> MCEstimate:
        x = np.asarray(samples, dtype=float).ravel()
        if x.size == 0:
            raise ValueError("no samples")
        mean = float(np.mean(x))
        m2 = float(np.sum((x - mean) ** 2))
        return cls._build(mean, m2, x.size, seed or {})

    @classmethod
    def _build(cls, mean, m2, n, seed):
        se = math.sqrt(m2 / (n - 1) / n) if n > 1 else math.inf
        return cls(mean=mean, std_err=se, n=n, seed=seed, m2=m2)

    def merge(self, other: MCEstimate) -> MCEstimate:
        # Chan et al. pairwise update
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return MCEstimate._build(mean, m2, n, self.seed)

    def scaled(self, factor: float) -> MCEstimate:
        return MCEstimate._build(self.mean * factor, self.m2 * factor * factor, self.n, self.seed)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_err": self.std_err, "n": self.n, "seed": self.seed}

    def agrees_with(self, value: float, k: float = 3.0, other_se: float = 0.0) -> bool:
        return abs(self.mean - value) <= k * math.hypot(self.std_err, other_se)


def combine(estimates) -> MCEstimate:
    """Left fold of ``merge`` in the given (batch) order."""
    it = iter(estimates)
    acc = next(it)
    for e in it:
        acc = acc.merge(e)
    return acc


def batch_sizes(n_paths: int, batch_size: int = DEFAULT_BATCH) -> list[int]:
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    full, rest = divmod(n_paths, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def run_batches(kernel, n_paths: int, rng: RngStream, *, batch_size: int = DEFAULT_BATCH,
                workers: int = 1) -> list[MCEstimate]:
    """Evaluate ``kernel(n, generator)`` over a fixed batch partition.

    ``kernel`` returns per-path values of shape ``(n,)`` or ``(k, n)``; the
    result is one merged estimate per row. Batch ``i`` always draws from
    ``rng.substream(i)`` and merging happens in batch order, so the output is
    independent of ``workers``.
    """
    sizes = batch_sizes(n_paths, batch_size)

    def one(i):
        values = np.asarray(kernel(sizes[i], rng.substream(i).generator()), dtype=float)
        rows = values.reshape(-1, values.shape[-1])
        return [MCEstimate.from_samples(r, rng.provenance()) for r in rows]

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_batch = list(pool.map(one, range(len(sizes))))
    else:
        per_batch = [one(i) for i in range(len(sizes))]
    return [combine(col) for col in zip(*per_batch)]
