"""How neighborhood weighting changes what thresholding keeps
==============================================================

Plain greedy thresholding ranks coefficients by magnitude alone.  Weighted
thresholding ranks them by a local magnitude average, so a small coefficient
inside a strong neighborhood can outrank a large isolated one.  The kept
values are always the original coefficients.
"""

import numpy as np

from wthresh import (
    WeightStencil2D,
    apply_weight_2d,
    greedy_mterm,
    stencil_preset,
    weighted_mterm,
)

# one time-frequency row: a coherent ridge (9, _, 9) with a gap, then an
# isolated spike of 7
row = np.array([[5.0, 9.0, 0.0, 9.0, 5.0, 0.0, 7.0, 0.0]], dtype=complex)
band = WeightStencil2D({(0, -1): 1.0, (0, 0): 1.0, (0, 1): 1.0})

print("coefficients:    ", np.abs(row[0]))
print("weighted values: ", apply_weight_2d(row, band)[0])

for m in (1, 3, 5):
    greedy = sorted(greedy_mterm(row, m).indices.tolist())
    weighted = sorted(weighted_mterm(row, band, m).indices.tolist())
    print(f"m = {m}: greedy keeps {greedy}, weighted keeps {weighted}")

print()
print("with m = 1 the weighted rule keeps the gap cell (coefficient 0!)")
print("because its neighbors dominate; the isolated 7 is discarded.")

# the named presets weight the channel direction, the frame direction, or both
rng = np.random.default_rng(1)
grid = np.where(rng.random((6, 8)) < 0.2, 3.0, 0.1) * np.exp(
    2j * np.pi * rng.random((6, 8)))
for name in ("identity", "weight1", "weight2", "weight3", "extreme-horizontal"):
    kept = weighted_mterm(grid, stencil_preset(name), 6)
    channels, frames = kept.cells()
    print(f"{name:>18}: keeps cells {sorted(zip(channels.tolist(), frames.tolist()))}")
