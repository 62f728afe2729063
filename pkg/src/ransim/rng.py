"""Seeded, labelled random streams.

Every source of randomness in the simulator draws from a stream obtained via
``seeded_rng(seed, label)``. Distinct labels ("traffic", "failure", "qos", ...)
give independent streams that are reproducible across runs and processes:
seeding ``random.Random`` with a string hashes the bytes with SHA-512, which
does not depend on ``PYTHONHASHSEED``.
"""

from __future__ import annotations

import random


class SeededRng:
    """A deterministic random stream with an auditable draw counter.

    ``draws`` counts public draw calls, so tests can assert that the number of
    samples consumed matches the number of samples handed out.
    """

    def __init__(self, seed: int, label: str):
        self.seed = seed
        self.label = label
        self._rng = random.Random(f"{seed}/{label}")
        self.draws = 0

    def random(self) -> float:
        self.draws += 1
        return self._rng.random()

    def uniform(self, lo: float, hi: float) -> float:
        self.draws += 1
        return self._rng.uniform(lo, hi)

    def choice(self, seq):
        self.draws += 1
        return self._rng.choice(seq)

    def binomial(self, n: int, p: float) -> int:
        """Number of successes in n Bernoulli(p) trials via inverse CDF.

        Uses a single underlying uniform, so the stream advances by exactly
        one draw regardless of n.
        """
        self.draws += 1
        if n <= 0 or p <= 0.0:
            return 0
        if p >= 1.0:
            return n
        u = self._rng.random()
        # Walk the CDF upward; expected work is O(n*p).
        q = 1.0 - p
        ratio = p / q
        pmf = q ** n
        cdf = pmf
        k = 0
        while cdf < u and k < n:
            pmf *= (n - k) / (k + 1) * ratio
            cdf += pmf
            k += 1
        return k


def seeded_rng(seed: int, label: str) -> SeededRng:
    """Return an independent deterministic stream for (seed, label)."""
    return SeededRng(seed, label)
