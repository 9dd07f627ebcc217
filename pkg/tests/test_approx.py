import itertools
import math

import numpy as np
import pytest

from wthresh import (
    Approximant,
    CoefficientGrid,
    FitError,
    GaborSystem,
    ParameterError,
    SearchError,
    WGLConfig,
    WeightStencil1D,
    WeightStencil2D,
    canonical_coefficients,
    constructive_approx,
    error_curve,
    fit_rate,
    greedy_mterm,
    hann_window,
    idgt,
    lorentz_norm,
    rms,
    stencil_preset,
    tail_error_curve,
    weighted_mterm,
    wgl_denoise,
    wgl_match_sparsity,
)
from wthresh.approx import _neighborhood_energy

INF = math.inf


def toy_system(M=8, N=8):
    return GaborSystem(window=hann_window(M), hop=M // 2, channels=M,
                       signal_length=(M // 2) * N)


def toy_grid(M=8, N=8, seed=0):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))
    return CoefficientGrid(data=data, system=toy_system(M, N))


# ---------------------------------------------------------------------------
# thresholding


def test_greedy_empty_and_full():
    grid = toy_grid()
    assert len(greedy_mterm(grid, 0)) == 0
    full = greedy_mterm(grid, grid.data.size)
    rec_full = idgt(CoefficientGrid(data=full.to_grid(), system=grid.system))
    rec_all = idgt(grid)
    assert np.abs(rec_full - rec_all).max() <= 1e-12 * np.abs(rec_all).max()
    with pytest.raises(ParameterError):
        greedy_mterm(grid, grid.data.size + 1)
    with pytest.raises(ParameterError):
        greedy_mterm(grid, -1)


def test_greedy_selection_with_ties():
    grid = np.array([[1.0, 5.0, 1.0, 0.0]], dtype=complex)
    kept = greedy_mterm(grid, 2)
    assert kept.indices.tolist() == [1, 0]
    assert kept.values.tolist() == [5.0, 1.0]


def test_weighted_equals_greedy_for_identity():
    grid = toy_grid(seed=5)
    for m in (0, 1, 7, 23, grid.data.size):
        a = greedy_mterm(grid, m)
        b = weighted_mterm(grid, stencil_preset("identity"), m)
        assert np.array_equal(a.indices, b.indices)


def test_weighted_mterm_weight2_row():
    row = np.array([[1.0, 5.0, 1.0, 0.0]], dtype=complex)
    weighted = np.array([[3.5, 6.0, 3.5, 0.5]])
    from wthresh import apply_weight_2d
    assert np.array_equal(apply_weight_2d(row, stencil_preset("weight2")), weighted)
    kept = weighted_mterm(row, stencil_preset("weight2"), 2)
    assert sorted(kept.indices.tolist()) == [0, 1]


def test_weighted_mterm_wide_horizontal_band():
    # all-ones band of half width 2 along the row; direct evaluation of the
    # weighted values decides the winner
    row = np.array([[0.0, 3.0, 3.0, 3.0, 0.0, 4.0, 0.0]], dtype=complex)
    stencil = WeightStencil2D({(0, dn): 1.0 for dn in range(-2, 3)})
    from wthresh import apply_weight_2d
    assert np.array_equal(
        apply_weight_2d(row, stencil),
        np.array([[6.0, 9.0, 9.0, 13.0, 10.0, 7.0, 4.0]]),
    )
    kept = weighted_mterm(row, stencil, 1)
    assert kept.indices.tolist() == [3]
    assert kept.values.tolist() == [3.0 + 0.0j]


def test_weighted_mterm_keeps_structured_zero():
    # a zero coefficient inside a strong neighborhood outranks a larger
    # isolated coefficient
    row = np.array([[5.0, 9.0, 0.0, 9.0, 5.0, 0.0, 7.0, 0.0]], dtype=complex)
    stencil = WeightStencil2D({(0, -1): 1.0, (0, 0): 1.0, (0, 1): 1.0})
    kept = weighted_mterm(row, stencil, 1)
    assert kept.indices.tolist() == [2]
    assert kept.values.tolist() == [0.0 + 0.0j]


def test_approximant_round_trip():
    grid = toy_grid(seed=6)
    ap = greedy_mterm(grid, 10)
    blob = ap.serialize()
    assert len(blob) == 4 + 24 * 10
    back = Approximant.deserialize(blob, ap.shape)
    assert np.array_equal(back.indices, ap.indices)
    assert np.array_equal(back.values, ap.values)
    dense = ap.to_grid()
    flat = grid.data.ravel(order="F")
    assert np.array_equal(dense.ravel(order="F")[ap.indices], flat[ap.indices])


# ---------------------------------------------------------------------------
# constructive approximation


def test_constructive_full_and_empty():
    system = toy_system(16, 16)
    rng = np.random.default_rng(1)
    f = rng.standard_normal(system.signal_length)
    total = system.channels * system.frames
    rec, ap = constructive_approx(f, system, stencil_preset("identity"), total)
    assert rms(f, rec.real) <= 1e-10
    rec0, ap0 = constructive_approx(f, system, stencil_preset("weight2"), 0)
    assert not np.any(rec0) and len(ap0) == 0


def test_constructive_sinusoid_concentration():
    # bin-aligned sinusoid under the unit-norm Hann system: the canonical
    # coefficients occupy three channels per conjugate rail, so 6 per frame
    system = GaborSystem(window=hann_window(1024), hop=256, channels=1024,
                         signal_length=2**15)
    N = system.frames
    f = np.cos(2 * np.pi * 37 * np.arange(system.signal_length) / 1024)
    grid = canonical_coefficients(f, system)
    mags = np.abs(grid.data)
    significant = int((mags > 1e-8 * mags.max()).sum())
    assert significant == 6 * N
    rec, _ = constructive_approx(f, system, stencil_preset("identity"), 6 * N)
    assert rms(f, rec.real) <= 0.05


# ---------------------------------------------------------------------------
# windowed group lasso


def test_wgl_threshold_zero_is_identity():
    grid = toy_grid(seed=7)
    cfg = WGLConfig(neighborhood=stencil_preset("wgl-horizontal"), threshold=0.0)
    out = wgl_denoise(grid, cfg)
    assert np.array_equal(out.data, grid.data)


def test_wgl_large_threshold_zeroes_grid():
    grid = toy_grid(seed=8)
    smax = float(_neighborhood_energy(grid.data, stencil_preset("wgl-horizontal").taps).max())
    cfg = WGLConfig(neighborhood=stencil_preset("wgl-horizontal"), threshold=smax + 1.0)
    out = wgl_denoise(grid, cfg)
    assert not np.any(out.data)


def test_wgl_singleton_is_soft_threshold():
    grid = toy_grid(seed=9)
    lam = 0.8
    cfg = WGLConfig(neighborhood=WeightStencil2D({(0, 0): 1.0}), threshold=lam,
                    iterations=1)
    out = wgl_denoise(grid, cfg)
    soft = grid.data * np.maximum(0.0, 1.0 - lam / np.abs(grid.data))
    assert np.abs(out.data - soft).max() <= 1e-12


def test_wgl_never_expands_and_count_monotone():
    grid = toy_grid(seed=10)
    cfg0 = WGLConfig(neighborhood=stencil_preset("weight3"), threshold=0.3)
    out = wgl_denoise(grid, cfg0)
    assert np.all(np.abs(out.data) <= np.abs(grid.data) + 1e-15)
    counts = []
    for lam in (0.0, 0.2, 0.5, 1.0, 2.0, 4.0):
        cfg = WGLConfig(neighborhood=stencil_preset("weight3"), threshold=lam)
        counts.append(int(np.count_nonzero(wgl_denoise(grid, cfg).data)))
    assert counts == sorted(counts, reverse=True)


def test_wgl_config_validation():
    nb = stencil_preset("identity")
    with pytest.raises(ParameterError):
        WGLConfig(neighborhood=nb, threshold=-1.0)
    with pytest.raises(ParameterError):
        WGLConfig(neighborhood=nb, threshold=0.0, iterations=0)
    with pytest.raises(ParameterError):
        WGLConfig(neighborhood=nb, threshold=0.0, step=0.0)


def test_wgl_match_sparsity():
    rng = np.random.default_rng(11)
    system = GaborSystem(window=hann_window(32), hop=8, channels=32,
                         signal_length=256)
    grid = CoefficientGrid(
        data=rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32)),
        system=system)
    base = WGLConfig(neighborhood=stencil_preset("wgl-horizontal"), threshold=0.0)
    out, th = wgl_match_sparsity(grid, base, 103)
    assert abs(int(np.count_nonzero(out.data)) - 103) <= 1
    out_full, th_full = wgl_match_sparsity(grid, base, grid.data.size)
    assert th_full == 0.0
    with pytest.raises(ParameterError):
        wgl_match_sparsity(grid, base, 0)
    with pytest.raises(SearchError):
        # a quarter of the cells are exact zeros: counts above the nonzero
        # count are unattainable
        sparse = grid.data.copy()
        sparse[:16, :16] = 0.0
        wgl_match_sparsity(CoefficientGrid(data=sparse, system=system), base,
                           grid.data.size)


# ---------------------------------------------------------------------------
# curves, rates, rms


def test_error_curve_full_budget_and_monotone():
    system = toy_system(16, 16)
    rng = np.random.default_rng(12)
    f = rng.standard_normal(system.signal_length)
    total = system.channels * system.frames
    errs = error_curve(f, system, stencil_preset("identity"), [total])
    assert errs[0] <= 1e-10 * np.linalg.norm(f)
    m_list = [1, 2, 4, 8, 16, 32, 64, 128]
    curve = error_curve(f, system, stencil_preset("identity"), m_list,
                        norm="coeff-lorentz", tau=2.0, q=2.0)
    assert np.all(np.diff(curve) <= 1e-12 * curve[0])
    with pytest.raises(ParameterError):
        error_curve(f, system, stencil_preset("identity"), [4, 2])


def test_error_curve_planted_power_law():
    # tail l2 of |c_k| = k^-2 behaves like m^-1.5 (tail sum ~ m^-3 / 3)
    K = 4096
    vals = np.arange(1, K + 1, dtype=float) ** -2.0
    grid = vals.reshape((64, 64), order="C").astype(complex)
    m_list = [8, 16, 32, 64, 128, 256, 512, 1024]
    curve = tail_error_curve(grid, stencil_preset("identity"), m_list, 2.0, 2.0)
    fit = fit_rate(curve, (8, 1024), m_values=m_list)
    assert fit.slope == pytest.approx(-1.5, abs=0.05)


def test_fit_rate_exact_power_law_and_constant():
    m = np.arange(1, 200)
    fit = fit_rate(m.astype(float) ** -1.5, (1, 199))
    assert fit.slope == pytest.approx(-1.5, abs=1e-9)
    assert fit.residual <= 1e-12
    flat = fit_rate(np.full(100, 2.5), (1, 100))
    assert flat.slope == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(FitError):
        fit_rate(np.array([1.0, 0.5, 0.0, 0.0, 0.0, 0.0]), (1, 6))


def test_fit_rate_planted_sequence():
    K = 2**14
    tau, p = 0.5, 2.0
    vals = np.arange(1, K + 1, dtype=float) ** (-1.0 / tau)
    m_list = sorted(set(int(round(32 * (2048 / 32) ** (i / 16))) for i in range(17)))
    curve = tail_error_curve(vals.astype(complex), WeightStencil1D([1.0]),
                             m_list, p, p)
    fit = fit_rate(curve, (32, 2048), m_values=m_list)
    assert fit.slope == pytest.approx(-(1.0 / tau - 1.0 / p), abs=0.15)


def test_rms():
    assert rms([3.0, 4.0], [3.0, 4.0]) == 0.0
    assert rms([3.0, 4.0], [0.0, 0.0]) == 1.0
    assert rms([3.0, 4.0], [0.0, 4.0]) == pytest.approx(0.6)
    with pytest.raises(ParameterError):
        rms([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ParameterError):
        rms([1.0], [1.0, 2.0])


def test_greedy_minimizes_discarded_tail_norm():
    rng = np.random.default_rng(13)
    system = GaborSystem(window=hann_window(3), hop=1, channels=3, signal_length=3)
    for trial in range(3):
        data = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        grid = CoefficientGrid(data=data, system=system)
        flat = data.ravel(order="F")
        K = flat.size
        for tau, q in ((1.0, 1.0), (0.5, INF), (2.0, 1.0)):
            for m in range(K + 1):
                kept = greedy_mterm(grid, m)
                discarded = np.delete(flat, kept.indices)
                greedy_norm = lorentz_norm(discarded, tau, q)
                best = min(
                    lorentz_norm(np.delete(flat, list(subset)), tau, q)
                    for subset in itertools.combinations(range(K), m)
                )
                assert greedy_norm <= best * (1 + 1e-12)
