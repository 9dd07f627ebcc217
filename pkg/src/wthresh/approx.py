"""Sparse approximation of coefficient grids and the associated error curves.

Three algorithms operate on a Gabor coefficient grid:

* greedy thresholding: keep the m largest-magnitude coefficients;
* weighted thresholding: rank cells by a neighborhood-weighted magnitude,
  keep the top m cells with their *original* coefficient values;
* windowed group lasso: iterative shrinkage against a neighborhood energy
  statistic.

Thresholding never modifies a retained value and never re-projects onto the
kept atoms.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import FitError, ParameterError, SearchError
from .gabor import CoefficientGrid, canonical_dual, dgt, idgt
from .lorentz import lorentz_norm
from .weighting import (
    WeightStencil1D,
    WeightStencil2D,
    _tap_sum,
    apply_weight_1d,
    apply_weight_2d,
    stencil_preset,
    weighted_ordering,
)

__all__ = [
    "Approximant",
    "WGLConfig",
    "RateFit",
    "greedy_mterm",
    "weighted_mterm",
    "constructive_approx",
    "wgl_denoise",
    "wgl_match_sparsity",
    "tail_error_curve",
    "error_curve",
    "fit_rate",
    "rms",
]

_RECORD_DTYPE = np.dtype([("m", "<u4"), ("n", "<u4"), ("re", "<f8"), ("im", "<f8")])


@dataclass(frozen=True, eq=False)
class Approximant:
    """Kept cells of a coefficient grid, in rank order.

    ``indices`` are flat frame-major indices (cell (m, n) of an M x N grid is
    ``n * M + m``); ``values`` are the untouched source coefficients.
    """

    shape: tuple
    indices: np.ndarray
    values: np.ndarray
    source: Optional[CoefficientGrid] = None

    def __len__(self):
        return int(self.indices.size)

    def cells(self):
        """(channel, frame) index arrays of the kept cells, rank order."""
        M = self.shape[0]
        return self.indices % M, self.indices // M

    def to_grid(self):
        """Dense complex grid with zeros everywhere but the kept cells."""
        flat = np.zeros(self.shape[0] * self.shape[1], dtype=complex)
        flat[self.indices] = self.values
        return flat.reshape(self.shape, order="F")

    def serialize(self):
        """u32 count, then (u32 channel, u32 frame, f64 re, f64 im) per rank."""
        m_idx, n_idx = self.cells()
        records = np.empty(len(self), dtype=_RECORD_DTYPE)
        records["m"], records["n"] = m_idx, n_idx
        records["re"], records["im"] = self.values.real, self.values.imag
        return np.uint32(len(self)).tobytes() + records.tobytes()

    @classmethod
    def deserialize(cls, payload, shape):
        count = int(np.frombuffer(payload[:4], dtype="<u4")[0])
        records = np.frombuffer(payload[4:], dtype=_RECORD_DTYPE, count=count)
        indices = records["n"].astype(np.int64) * shape[0] + records["m"]
        return cls(shape=tuple(shape), indices=indices,
                   values=records["re"] + 1j * records["im"])


def _as_grid_data(grid):
    data = np.asarray(getattr(grid, "data", grid))
    if data.ndim != 2:
        raise ParameterError(f"expected a 2-D coefficient grid, got shape {data.shape}")
    return data


def weighted_mterm(grid, stencil, m):
    """Keep the m cells with the largest neighborhood-weighted magnitudes."""
    data = _as_grid_data(grid)
    total = data.size
    if m < 0 or m > total or int(m) != m:
        raise ParameterError(f"m must lie in [0, {total}], got {m!r}")
    weighted = apply_weight_2d(data, stencil)
    perm, _ = weighted_ordering(weighted)
    kept = perm[: int(m)]
    values = data.ravel(order="F")[kept]
    source = grid if isinstance(grid, CoefficientGrid) else None
    return Approximant(shape=data.shape, indices=kept, values=values, source=source)


def greedy_mterm(grid, m):
    """Keep the m largest-magnitude coefficients (identity-weighted thresholding)."""
    return weighted_mterm(grid, stencil_preset("identity"), m)


def constructive_approx(signal, system, stencil, m):
    """Weighted m-term approximation of a signal through its canonical coefficients.

    Analysis uses the canonical dual window, selection uses the stencil,
    synthesis uses the system window.  Returns ``(approx_signal, approximant)``.
    """
    grid = dgt(signal, system, analysis_window=canonical_dual(system))
    approximant = weighted_mterm(grid, stencil, m)
    sparse = CoefficientGrid(data=approximant.to_grid(), system=system)
    return idgt(sparse, system.window), approximant


@dataclass(frozen=True, eq=False)
class WGLConfig:
    """Windowed-group-lasso settings.

    ``step`` is accepted and validated for interface stability but the
    shrinkage rule below does not use it.
    """

    neighborhood: WeightStencil2D
    threshold: float
    iterations: int = 20
    step: float = 1.0

    def __post_init__(self):
        if not isinstance(self.neighborhood, WeightStencil2D):
            object.__setattr__(self, "neighborhood", WeightStencil2D(self.neighborhood))
        if self.threshold < 0 or not np.isfinite(self.threshold):
            raise ParameterError(f"threshold must be finite and >= 0, got {self.threshold!r}")
        if self.iterations < 1 or int(self.iterations) != self.iterations:
            raise ParameterError(f"iterations must be a positive integer, got {self.iterations!r}")
        if self.step <= 0 or not np.isfinite(self.step):
            raise ParameterError(f"step must be finite and positive, got {self.step!r}")


def _neighborhood_energy(data, taps):
    """
    Per-cell statistic s = sqrt(sum of tap weight times squared magnitude),
    zero padded outside the grid.
    """
    energy = _tap_sum((data.real**2 + data.imag**2), taps)
    return np.sqrt(energy)


def wgl_denoise(grid, config):
    """Iterative windowed-group-lasso shrinkage of a coefficient grid.

    Each iteration rescales every cell by ``max(0, 1 - threshold / s)`` where
    ``s`` is the neighborhood energy statistic (cells with ``s = 0`` go to
    zero).  Magnitudes never increase.
    """
    if not isinstance(config, WGLConfig):
        raise ParameterError("config must be a WGLConfig")
    data = _as_grid_data(grid).astype(complex)
    lam = float(config.threshold)
    for _ in range(int(config.iterations)):
        s = _neighborhood_energy(data, config.neighborhood.taps)
        with np.errstate(divide="ignore", invalid="ignore"):
            shrink = np.where(s > 0.0, np.maximum(0.0, 1.0 - lam / s), 0.0)
        data = data * shrink
    if isinstance(grid, CoefficientGrid):
        return CoefficientGrid(data=data, system=grid.system)
    return data


def wgl_match_sparsity(grid, config_base, target_nonzeros, max_steps=64):
    """Bisect the shrinkage threshold until the output nonzero count hits a target.

    The count is monotone non-increasing in the threshold; the search starts
    from the quantile of the one-pass neighborhood statistic matching the
    target fraction and accepts a count within max(1, 1%) of
    ``target_nonzeros``.  Returns ``(denoised_grid, threshold)``; raises
    :class:`SearchError` with the best bracket when no acceptable threshold
    is found within ``max_steps`` evaluations.
    """
    data = _as_grid_data(grid)
    total = data.size
    if target_nonzeros <= 0 or target_nonzeros > total:
        raise ParameterError(
            f"target_nonzeros must lie in [1, {total}], got {target_nonzeros!r}"
        )
    target = int(target_nonzeros)
    tol = max(1, int(round(0.01 * target)))

    def run(threshold):
        cfg = WGLConfig(
            neighborhood=config_base.neighborhood,
            threshold=threshold,
            iterations=config_base.iterations,
            step=config_base.step,
        )
        out = wgl_denoise(grid, cfg)
        return out, int(np.count_nonzero(_as_grid_data(out)))

    out, count = run(0.0)
    if abs(count - target) <= tol:
        return out, 0.0
    if count < target:
        raise SearchError(
            f"target {target} exceeds attainable nonzeros {count} at threshold 0"
        )

    stats = _neighborhood_energy(data.astype(complex), config_base.neighborhood.taps)
    ceiling = float(stats.max()) + 1.0
    guess = float(np.quantile(stats, 1.0 - target / total))
    if guess <= 0.0:
        guess = float(stats[stats > 0.0].min())
    lo, lo_count = 0.0, count
    hi, hi_count = None, 0
    best = (count - target, 0.0, out)
    th = min(guess, ceiling)
    steps = 0
    while steps < max_steps:
        steps += 1
        out, count = run(th)
        if abs(count - target) <= tol:
            return out, th
        if abs(count - target) < best[0]:
            best = (abs(count - target), th, out)
        if count > target:
            lo, lo_count = th, count
        else:
            hi, hi_count = th, count
        if hi is None:
            th = min(2.0 * th, ceiling)  # still below the target: expand upward
        else:
            th = 0.5 * (lo + hi)
    raise SearchError(
        f"no threshold within +-{tol} of {target} nonzeros after {max_steps} steps; "
        f"best bracket [{lo:.6g}, {hi if hi is not None else ceiling:.6g}] "
        f"with counts [{lo_count}, {hi_count}]"
    )


def tail_error_curve(values, stencil, m_list, tau, q):
    """Coefficient-domain tail errors of weighted thresholding.

    For each m in ``m_list`` (ascending), the Lorentz norm of the
    coefficients ranked past m by the weighted ordering.  1-D stencils apply
    to ``values`` as a flat sequence; 2-D stencils require a 2-D grid.
    """
    m_list = [int(m) for m in m_list]
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ParameterError("m_list must be strictly ascending")
    data = np.asarray(getattr(values, "data", values))
    if isinstance(stencil, WeightStencil1D):
        flat = data.ravel(order="F") if data.ndim == 2 else data.ravel()
        weighted = apply_weight_1d(flat, stencil)
    else:
        weighted = apply_weight_2d(data, stencil)
        flat = data.ravel(order="F")
    if m_list and (m_list[0] < 0 or m_list[-1] > flat.size):
        raise ParameterError(f"m values must lie in [0, {flat.size}]")
    perm, _ = weighted_ordering(weighted)
    ranked = flat[perm]
    return np.array([lorentz_norm(ranked[m:], tau, q) for m in m_list])


def error_curve(signal, system, stencil, m_list, norm="sample-l2", tau=None, q=None):
    """Approximation error at each m, either in the sample or coefficient domain.

    ``norm="sample-l2"`` measures ``||f - f_m||_2`` through analysis,
    selection and synthesis; ``norm="coeff-lorentz"`` measures the Lorentz
    (tau, q) norm of the discarded canonical coefficients.
    """
    m_list = [int(m) for m in m_list]
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ParameterError("m_list must be strictly ascending")
    grid = dgt(signal, system, analysis_window=canonical_dual(system))
    if norm == "coeff-lorentz":
        if tau is None or q is None:
            raise ParameterError("coeff-lorentz norm requires tau and q")
        return tail_error_curve(grid, stencil, m_list, tau, q)
    if norm != "sample-l2":
        raise ParameterError(f"unknown norm {norm!r}")
    f = np.asarray(signal)
    errors = []
    for m in m_list:
        approximant = weighted_mterm(grid, stencil, m)
        recon = idgt(CoefficientGrid(data=approximant.to_grid(), system=system),
                     system.window)
        errors.append(float(np.linalg.norm(f - recon)))
    return np.array(errors)


class RateFit(NamedTuple):
    slope: float
    intercept: float
    m_range: tuple
    residual: float


def fit_rate(curve, m_range, m_values=None):
    """Least-squares line through (log m, log error) over ``m_range``.

    ``curve`` entry i corresponds to m = i + 1 unless explicit ``m_values``
    are given.  The decay exponent is ``-slope``.  Requires at least five
    strictly positive points in range.
    """
    values = np.asarray(curve, dtype=float).ravel()
    if m_values is None:
        m_values = np.arange(1, values.size + 1)
    else:
        m_values = np.asarray(m_values, dtype=float).ravel()
        if m_values.size != values.size:
            raise ParameterError("m_values and curve lengths differ")
    lo, hi = m_range
    mask = (m_values >= lo) & (m_values <= hi) & (values > 0.0)
    if np.count_nonzero(mask) < 5:
        raise FitError(
            f"need at least 5 positive curve points in m range [{lo}, {hi}], "
            f"found {int(np.count_nonzero(mask))}"
        )
    x, y = np.log(m_values[mask]), np.log(values[mask])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return RateFit(slope=float(slope), intercept=float(intercept),
                   m_range=(int(lo), int(hi)), residual=residual)


def rms(reference, reconstruction):
    """Relative l2 error ``||ref - rec||_2 / ||ref||_2``."""
    ref = np.asarray(reference)
    rec = np.asarray(reconstruction)
    if ref.shape != rec.shape:
        raise ParameterError(f"length mismatch: {ref.shape} vs {rec.shape}")
    denom = np.linalg.norm(ref)
    if denom == 0.0:
        raise ParameterError("reference signal must not be identically zero")
    return float(np.linalg.norm(ref - rec) / denom)
