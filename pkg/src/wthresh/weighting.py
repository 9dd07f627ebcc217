"""Banded neighborhood weighting of coefficient magnitudes.

A 1-D stencil is a symmetric band of nonnegative weights applied as a
Toeplitz operator to the magnitude sequence; a 2-D stencil is a finite map
from (channel, frame) offsets to weights applied per grid cell.  Both use
zero padding outside the data.  The weighted magnitudes induce a
deterministic non-increasing ordering used for thresholding.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ParameterError
from .lorentz import lorentz_norm

__all__ = [
    "WeightStencil1D",
    "WeightStencil2D",
    "WeightedOrdering",
    "stencil_preset",
    "STENCIL_PRESETS",
    "apply_weight_1d",
    "apply_weight_2d",
    "weighted_ordering",
    "tail_ordering_bound",
]


@dataclass(frozen=True, eq=False)
class WeightStencil1D:
    """Band of 2*bandwidth + 1 nonnegative weights, center weight positive."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size % 2 == 0 or w.size == 0:
            raise ParameterError("1-D stencil needs an odd number of weights")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ParameterError("stencil weights must be finite and nonnegative")
        if w[w.size // 2] <= 0:
            raise ParameterError("center weight must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def bandwidth(self):
        return self.weights.size // 2

    @property
    def center(self):
        return float(self.weights[self.bandwidth])


@dataclass(frozen=True, eq=False)
class WeightStencil2D:
    """Finite map from (d_channel, d_frame) offsets to nonnegative weights."""

    taps: dict = field(default_factory=dict)

    def __post_init__(self):
        taps = {}
        for key, value in dict(self.taps).items():
            dm, dn = key
            w = float(value)
            if not np.isfinite(w) or w < 0:
                raise ParameterError(f"tap weight at {key} must be finite and nonnegative")
            taps[(int(dm), int(dn))] = w
        if taps.get((0, 0), 0.0) <= 0:
            raise ParameterError("tap at offset (0, 0) must be present and positive")
        object.__setattr__(self, "taps", taps)


class WeightedOrdering(NamedTuple):
    """Non-increasing ordering of weighted magnitudes (rank -> flat index)."""

    permutation: np.ndarray
    weighted_values: np.ndarray


# named stencils accepted by the experiment harness
STENCIL_PRESETS = {
    "identity": {(0, 0): 1.0},
    "weight1": {(0, 0): 1.0, (-1, 0): 0.5, (1, 0): 0.5},
    "weight2": {(0, 0): 1.0, (0, -1): 0.5, (0, 1): 0.5},
    "weight3": {(0, 0): 1.0, (0, -1): 0.25, (-1, 0): 0.25, (0, 1): 0.25, (1, 0): 0.25},
    "extreme-horizontal": {(0, dn): 1.0 for dn in range(-2, 3)},
    "wgl-horizontal": {(0, 0): 1.0, (0, 1): 0.5, (0, 2): 0.25},
}


def stencil_preset(name):
    """Look up a named 2-D stencil preset."""
    try:
        return WeightStencil2D(dict(STENCIL_PRESETS[name]))
    except KeyError:
        raise ParameterError(
            f"unknown stencil preset {name!r}; choose from {sorted(STENCIL_PRESETS)}"
        ) from None


def apply_weight_1d(entries, stencil):
    """Weighted magnitudes out[k] = sum_l lam[l] * |c[k+l]| over the band, zero padded."""
    if not isinstance(stencil, WeightStencil1D):
        stencil = WeightStencil1D(np.asarray(stencil))
    mags = np.abs(np.asarray(entries)).astype(float, copy=False).ravel()
    if not np.all(np.isfinite(mags)):
        raise ParameterError("sequence entries must be finite")
    if mags.size == 0:
        return mags
    bw = stencil.bandwidth
    full = np.convolve(mags, stencil.weights[::-1], mode="full")
    return full[bw : bw + mags.size]


def _tap_sum(values, taps):
    """Accumulate shifted copies of a nonnegative 2-D array according to taps."""
    rows, cols = values.shape
    out = np.zeros_like(values)
    for (dm, dn), w in taps.items():
        if w == 0.0:
            continue
        r0, r1 = max(0, -dm), min(rows, rows - dm)
        c0, c1 = max(0, -dn), min(cols, cols - dn)
        if r0 < r1 and c0 < c1:
            out[r0:r1, c0:c1] += w * values[r0 + dm : r1 + dm, c0 + dn : c1 + dn]
    return out


def apply_weight_2d(grid, stencil):
    """Per-cell weighted magnitude sum over the stencil taps, zero padded."""
    if not isinstance(stencil, WeightStencil2D):
        stencil = WeightStencil2D(stencil)
    data = np.asarray(getattr(grid, "data", grid))
    if data.ndim != 2:
        raise ParameterError(f"expected a 2-D grid, got shape {data.shape}")
    mags = np.abs(data).astype(float, copy=False)
    if not np.all(np.isfinite(mags)):
        raise ParameterError("grid entries must be finite")
    return _tap_sum(mags, stencil.taps)


def weighted_ordering(weighted):
    """Stable non-increasing ordering of weighted values.

    2-D input is flattened frame-major (all channels of a frame before the
    next frame), so the flat index of cell (m, n) on an M x N grid is
    ``n * M + m``.  Ties break toward the smaller flat index.
    """
    values = np.asarray(weighted, dtype=float)
    flat = values.ravel(order="F") if values.ndim == 2 else values.ravel()
    perm = np.argsort(-flat, kind="stable")
    return WeightedOrdering(permutation=perm, weighted_values=flat[perm])


def tail_ordering_bound(entries, stencil, m, tau, q):
    """Compare the weighted-ordering tail against the shifted plain tail.

    For a non-increasing magnitude sequence, returns ``(lhs, rhs, bound)``
    where ``lhs`` is the Lorentz norm of the entries ranked past ``m`` by the
    weighted ordering, ``rhs`` the Lorentz norm of the plain tail starting
    ``bandwidth`` places earlier, and ``bound = (lam_max / lam_0) *
    (2 * bandwidth + 1)``.  The guaranteed relation is lhs <= bound * rhs for
    every ``m >= bandwidth``.
    """
    if not isinstance(stencil, WeightStencil1D):
        stencil = WeightStencil1D(np.asarray(stencil))
    c = np.asarray(entries).ravel()
    mags = np.abs(c)
    if np.any(np.diff(mags) > 0):
        raise ParameterError("entries must have non-increasing magnitudes")
    bw = stencil.bandwidth
    if m < bw:
        raise ParameterError(f"m must be at least the bandwidth ({bw}), got {m}")
    m = int(m)
    perm, _ = weighted_ordering(apply_weight_1d(c, stencil))
    lhs = lorentz_norm(c[perm[m:]], tau, q)
    rhs = lorentz_norm(c[max(m - bw, 0):], tau, q)
    bound = float(np.max(stencil.weights)) / stencil.center * (2 * bw + 1)
    return lhs, rhs, bound
