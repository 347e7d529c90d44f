#!/usr/bin/env python3
"""How well do the four metrics track channel reciprocity?

Simulates three location scenarios, computes Pearson correlation,
Jeffrey's divergence, Wasserstein distance, and the time-lagged
cross-correlation on raw and preprocessed magnitude series, and prints a
comparison table.  Correlation should rise (and the lag estimate should
find the injected shift) as conditions improve, while the two
distribution distances mostly track location, not preprocessing.
"""

import numpy as np

from csirecip import (
    DivergenceConfig,
    fft_reconstruct,
    gen_pair,
    golay_filter,
    jeffrey_divergence,
    pair_traces,
    pearson,
    preset,
    wasserstein_1d,
    xcorr_lag,
)

SUBCARRIER = 6

print(f"{'scenario':<12} {'series':<8} {'pearson':>8} {'jeffrey':>8} "
      f"{'wasser':>8} {'lag':>4} {'peak':>6}")
print("-" * 60)

for name in ("los-short", "nlos-short", "nlos-long"):
    cfg = preset(name, duration_s=600.0, seed=42)
    ap, sta, truth = gen_pair(cfg)
    a, b = pair_traces(ap, sta, SUBCARRIER, gap_policy="drop_both")

    variants = {
        "raw": (a.values, b.values),
        "golay": (golay_filter(a.values), golay_filter(b.values)),
        "fft": (fft_reconstruct(a.values), fft_reconstruct(b.values)),
    }
    for label, (x, y) in variants.items():
        est = xcorr_lag(x, y, 50)
        print(f"{name:<12} {label:<8} "
              f"{pearson(x, y):8.3f} "
              f"{jeffrey_divergence(x, y, DivergenceConfig()):8.3f} "
              f"{wasserstein_1d(x, y):8.3f} "
              f"{est.lag:4d} {est.peak_corr:6.3f}")
    print(f"{'':12} (injected lag: {truth['lag']})")
    print()

print("Preprocessing lifts the correlation; the lag estimate recovers the")
print("injected shift even when the zero-lag correlation is poor.")
