from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import norm


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion, clamped to [0, 1]."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    z = norm.ppf(0.5 + confidence / 2.0)
    n = float(trials)
    phat = successes / n
    denom = 1.0 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class EstimateWithCI:
    successes: int
    trials: int
    estimate: float
    ci_lo: float
    ci_hi: float
    confidence: float = 0.95

    @classmethod
    def from_counts(cls, successes: int, trials: int, confidence: float = 0.95) -> "EstimateWithCI":
        lo, hi = wilson_interval(successes, trials, confidence)
        est = successes / trials
        # floating error in the score formula can put the centre a hair outside
        lo, hi = min(lo, est), max(hi, est)
        return cls(int(successes), int(trials), est, lo, hi, confidence)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_hi - self.ci_lo)

    def contains(self, value: float, widths: float = 1.0) -> bool:
        """True if ``value`` lies within ``widths`` half-widths of the estimate."""
        return abs(value - self.estimate) <= widths * self.half_width


@dataclass(frozen=True)
class MeanWithCI:
    mean: float
    trials: int
    ci_lo: float
    ci_hi: float
    std: float
    confidence: float = 0.95

    @classmethod
    def from_samples(cls, values, confidence: float = 0.95) -> "MeanWithCI":
        vals = [float(v) for v in values]
        n = len(vals)
        if n < 1:
            raise ValueError("need at least one sample")
        mean = math.fsum(vals) / n
        var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1) if n > 1 else 0.0
        sd = math.sqrt(var)
        z = norm.ppf(0.5 + confidence / 2.0)
        half = z * sd / math.sqrt(n)
        return cls(mean, n, mean - half, mean + half, sd, confidence)


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)
