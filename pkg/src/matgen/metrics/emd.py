"""One-dimensional Earth Mover's Distance via the cumulative-sum closed form."""

from __future__ import annotations

import numpy as np


def emd_1d(hist_a, hist_b, bin_width: float = 1.0) -> float:
    """EMD between two normalized histograms on a shared uniform binning:
    the sum of absolute cumulative differences times the bin width."""
    a = np.asarray(hist_a, dtype=np.float64)
    b = np.asarray(hist_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"histograms must share one bin axis, got {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty histograms")
    for name, h in (("first", a), ("second", b)):
        total = h.sum()
        if not np.isclose(total, 1.0, atol=1e-6):
            raise ValueError(f"{name} histogram is not normalized (sum {total})")
        if (h < -1e-12).any():
            raise ValueError(f"{name} histogram has negative mass")
    return float(np.abs(np.cumsum(a - b)).sum() * bin_width)


def normalize_counts(counts: dict[int, float], max_bin: int) -> np.ndarray:
    """Counter over non-negative integers -> normalized dense histogram."""
    hist = np.zeros(max_bin + 1, dtype=np.float64)
    for k, v in counts.items():
        hist[k] += v
    total = hist.sum()
    if total <= 0:
        raise ValueError("cannot normalize an empty counter")
    return hist / total
