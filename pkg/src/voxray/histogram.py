"""Grey-level statistics: histogram, Otsu threshold, global sigma.

The Otsu scan runs in exact rational arithmetic so the returned threshold
never depends on floating-point summation order: for each candidate T the
weighted intra-class variance is

    N * sigma_w^2(T) = (a0*n0 - b0^2)/n0 + (a1*n1 - b1^2)/n1

with n, b, a the count, intensity sum and squared-intensity sum of class 0
(levels <= T) and class 1 (levels > T); an empty class contributes 0.  Ties
resolve to the smallest T, which keeps the most data above the cut.
"""

from __future__ import annotations

from dataclasses import dataclass


import numpy as np

from .volume import Volume

LEVELS = 256


class HistogramError(Exception):
    pass


@dataclass(frozen=True)
class HistogramModel:
    """256-bin histogram with the statistics the filters need."""

    counts: np.ndarray  # (256,) int64
    total: int
    probabilities: np.ndarray  # (256,) float64, sums to 1
    global_sigma: float  # population std of all voxel intensities
    otsu_threshold: int

    def class_stats(self, t: int | None = None) -> dict:
        """Weights, means and variances of the two classes split at t."""
        t = self.otsu_threshold if t is None else int(t)
        stats = {"threshold": t, "classes": []}
        idx = np.arange(LEVELS, dtype=np.float64)
        for name, sel in (("background", idx <= t), ("data", idx > t)):
            c = self.counts[sel].astype(np.float64)
            n = float(c.sum())
            if n > 0:
                mu = float((c * idx[sel]).sum() / n)
                var = float((c * (idx[sel] - mu) ** 2).sum() / n)
            else:
                mu = var = 0.0
            stats["classes"].append(
                {"name": name, "weight": n / self.total, "count": int(n), "mean": mu, "variance": var}
            )
        return stats


def otsu(counts) -> int:
    """Threshold minimizing the weighted intra-class variance; exact scan.

    The candidate objective is kept as an exact integer fraction
    (numerator, denominator) and candidates are compared by
    cross-multiplication, so no floating-point rounding can perturb the
    argmin or its tie-break.
    """
    counts = [int(c) for c in counts]
    if len(counts) != LEVELS:
        raise HistogramError(f"expected {LEVELS} bins, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise HistogramError("histogram counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise HistogramError("histogram is empty (all bins zero)")
    b_all = sum(i * c for i, c in enumerate(counts))
    a_all = sum(i * i * c for i, c in enumerate(counts))

    best_t = 0
    best_num = best_den = None
    n0 = b0 = a0 = 0
    for t in range(LEVELS):
        c = counts[t]
        n0 += c
        b0 += t * c
        a0 += t * t * c
        n1 = total - n0
        b1 = b_all - b0
        a1 = a_all - a0
        # total * sigma_w^2(t) = (a0*n0 - b0^2)/n0 + (a1*n1 - b1^2)/n1,
        # an empty class contributing nothing
        if n0 and n1:
            num = (a0 * n0 - b0 * b0) * n1 + (a1 * n1 - b1 * b1) * n0
            den = n0 * n1
        elif n0:
            num, den = a0 * n0 - b0 * b0, n0
        else:
            num, den = a1 * n1 - b1 * b1, n1
        if best_num is None or num * best_den < best_num * den:
            best_num, best_den = num, den
            best_t = t
    return best_t


def global_stddev(volume: Volume) -> float:
    """Population standard deviation of all voxel intensities."""
    return _sigma_from_counts(np.bincount(volume.data.reshape(-1), minlength=LEVELS))


def _sigma_from_counts(counts: np.ndarray) -> float:
    c = counts.astype(np.float64)
    n = c.sum()
    if n == 0:
        raise HistogramError("empty volume")
    idx = np.arange(LEVELS, dtype=np.float64)
    mu = (c * idx).sum() / n
    return float(np.sqrt((c * (idx - mu) ** 2).sum() / n))


def build_histogram(volume: Volume) -> HistogramModel:
    counts = np.bincount(volume.data.reshape(-1), minlength=LEVELS).astype(np.int64)
    total = int(counts.sum())
    if total == 0:
        raise HistogramError("empty volume")
    counts.flags.writeable = False
    probabilities = counts / total
    probabilities.flags.writeable = False
    return HistogramModel(
        counts=counts,
        total=total,
        probabilities=probabilities,
        global_sigma=_sigma_from_counts(counts),
        otsu_threshold=otsu(counts),
    )
