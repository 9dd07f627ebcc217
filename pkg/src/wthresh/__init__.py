"""Sparse time-frequency approximation by weighted coefficient thresholding.

The toolkit covers Lorentz sequence norms and tail error curves, banded
neighborhood weighting of coefficient magnitudes, discrete Gabor analysis
and synthesis with the painless canonical dual window, greedy/weighted
m-term thresholding, a windowed-group-lasso baseline, and a desk-scale
denoising comparison harness.
"""

from .approx import (
    Approximant,
    RateFit,
    WGLConfig,
    constructive_approx,
    error_curve,
    fit_rate,
    greedy_mterm,
    rms,
    tail_error_curve,
    weighted_mterm,
    wgl_denoise,
    wgl_match_sparsity,
)
from .errors import FitError, FormatError, FrameError, ParameterError, SearchError
from .gabor import (
    CoefficientGrid,
    GaborSystem,
    canonical_coefficients,
    canonical_dual,
    dgt,
    dump_grid,
    frame_bounds,
    frame_diagonal,
    hann_window,
    idgt,
    load_grid,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    add_awgn,
    export_spectrogram,
    load_wav,
    melody10,
    pad_to_lattice,
    read_pgm,
    run_experiment,
    save_wav,
    synth_harmonic,
)
from .lorentz import (
    approx_space_norm,
    lorentz_norm,
    rearrange,
    sigma_curve,
    tail_norm,
)
from .weighting import (
    STENCIL_PRESETS,
    WeightStencil1D,
    WeightStencil2D,
    WeightedOrdering,
    apply_weight_1d,
    apply_weight_2d,
    stencil_preset,
    tail_ordering_bound,
    weighted_ordering,
)

__version__ = "0.1.0"
