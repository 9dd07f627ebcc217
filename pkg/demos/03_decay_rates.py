"""Tail error decay of weighted thresholding
=============================================

Plant coefficient magnitudes |c_k| = k^(-1/tau) and measure the l2 norm of
everything a weighted m-term selection discards.  The log-log slope of that
curve should approach -(1/tau - 1/2) regardless of the (banded) stencil; the
stencil can only displace the ordering by a bounded amount.

Writes decay_rates.png with the measured curves and reference slopes.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from wthresh import (
    WeightStencil1D,
    fit_rate,
    stencil_preset,
    tail_error_curve,
)

K = 2**16
CHANNELS = 64
P = 2.0
m_list = sorted(set(int(round(32 * (2048 / 32) ** (i / 24))) for i in range(25)))

fig, axes = plt.subplots(1, 3, figsize=(13, 4), sharey=False)
for ax, tau in zip(axes, (0.4, 0.5, 0.8)):
    alpha = 1.0 / tau - 1.0 / P
    vals = np.arange(1, K + 1, dtype=float) ** (-1.0 / tau)
    grid = vals.reshape((CHANNELS, K // CHANNELS), order="C").astype(complex)
    for label, stencil, data in [
        ("greedy (identity)", stencil_preset("identity"), grid),
        ("weight2", stencil_preset("weight2"), grid),
        ("1-D all-ones band", WeightStencil1D([1, 1, 1, 1, 1]), vals.astype(complex)),
    ]:
        curve = tail_error_curve(data, stencil, m_list, P, P)
        fit = fit_rate(curve, (32, 2048), m_values=m_list)
        ax.loglog(m_list, curve, marker=".", label=f"{label}: slope {fit.slope:.3f}")
        print(f"tau = {tau}: {label:20s} slope {fit.slope:+.4f} "
              f"(theory {-alpha:+.4f})")
    ref = curve[0] * (np.asarray(m_list) / m_list[0]) ** (-alpha)
    ax.loglog(m_list, ref, "k--", lw=1, label=f"m^(-{alpha:.2f}) reference")
    ax.set_title(f"tau = {tau}")
    ax.set_xlabel("kept terms m")
    ax.legend(fontsize=7)
axes[0].set_ylabel("l2 norm of discarded coefficients")
fig.tight_layout()
fig.savefig("decay_rates.png", dpi=120)
print("wrote decay_rates.png")
