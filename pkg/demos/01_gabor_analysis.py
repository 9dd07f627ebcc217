"""Gabor analysis round trip
============================

Build the reference transform (1024 channels, hop 256, unit-norm Hann window
of length 1024), look at its frame bounds, and confirm that analysis with the
canonical dual window followed by synthesis with the original window
reproduces the signal.  Also writes a spectrogram of the synthetic melody.
"""

import numpy as np

from wthresh import (
    GaborSystem,
    canonical_coefficients,
    canonical_dual,
    export_spectrogram,
    frame_bounds,
    hann_window,
    idgt,
    melody10,
    rms,
    synth_harmonic,
)

L = 2**17
RATE = 44100

system = GaborSystem(window=hann_window(1024), hop=256, channels=1024,
                     signal_length=L)
A, B = frame_bounds(system)
print(f"frame bounds: A = {A:.12f}, B = {B:.12f}  (B/A = {B / A:.2e})")
print(f"redundancy:   {system.redundancy:g} "
      f"({system.channels * system.frames} coefficients for {L} samples)")

dual = canonical_dual(system)
print(f"dual window peak ratio g~/g = {np.max(dual / np.where(system.window, system.window, 1)):.6f}")

# the lattice is tight here, so the dual is just a rescaled Hann window
rng = np.random.default_rng(0)
f = rng.standard_normal(L)
grid = canonical_coefficients(f, system)
rec = idgt(grid, system.window)
print(f"reconstruction error on noise: {rms(f, rec.real):.3e}")

melody = synth_harmonic(melody10(L, RATE), L, RATE)
grid = canonical_coefficients(melody, system)
export_spectrogram(grid, "melody_spectrogram.pgm")
print("wrote melody_spectrogram.pgm "
      f"({grid.shape[0]} rows x {grid.shape[1]} columns, top row = Nyquist)")
