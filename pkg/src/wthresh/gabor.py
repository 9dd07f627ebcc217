"""Discrete Gabor analysis and synthesis on a regular lattice (painless case).

Conventions, fixed so coefficient dumps are reproducible bit-exactly:

* circular (periodic) signal indexing; the signal length L must be a
  multiple of both the hop and the channel count (harmonic code pads
  signals to a multiple of lcm(hop, channels));
* time-invariant phase: the atom at channel m, frame n is
  ``g[(l - n*hop) % L] * exp(2j*pi*m*(l - n*hop)/channels)``, so a single
  unit coefficient synthesizes exactly that atom;
* the painless regime ``channels >= len(window) >= hop`` keeps the frame
  operator diagonal, making the canonical dual window a pointwise quotient.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, FrameError, ParameterError

__all__ = [
    "GaborSystem",
    "CoefficientGrid",
    "hann_window",
    "frame_diagonal",
    "canonical_dual",
    "frame_bounds",
    "dgt",
    "canonical_coefficients",
    "idgt",
    "dump_grid",
    "load_grid",
    "GRID_MAGIC",
]

GRID_MAGIC = b"WTHG"


def hann_window(length, normalize=True):
    """Periodic Hann window ``0.5 - 0.5*cos(2*pi*l/length)``, unit l2 norm by default."""
    if length < 2 or int(length) != length:
        raise ParameterError(f"window length must be an integer >= 2, got {length!r}")
    w = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(int(length)) / float(length))
    if normalize:
        w = w / np.linalg.norm(w)
    return w


@dataclass(frozen=True, eq=False)
class GaborSystem:
    """Window samples plus lattice parameters (hop, channels, signal length).

    Windows are kept exactly as given; the standard constructors such as
    :func:`hann_window` already return unit-l2 windows.
    """

    window: np.ndarray
    hop: int
    channels: int
    signal_length: int

    def __post_init__(self):
        w = np.asarray(self.window, dtype=float).ravel()
        a, M, L = int(self.hop), int(self.channels), int(self.signal_length)
        if a < 1 or M < 1 or L < 1:
            raise ParameterError("hop, channels and signal_length must be positive")
        if L % a != 0:
            raise ParameterError(f"signal_length {L} not divisible by hop {a}")
        if L % M != 0:
            # needed for the circular modulation to be well defined
            raise ParameterError(f"signal_length {L} not divisible by channels {M}")
        if w.size == 0 or not np.any(w):
            raise ParameterError("window must not be identically zero")
        if not np.all(np.isfinite(w)):
            raise ParameterError("window samples must be finite")
        if M < w.size or a > w.size:
            raise ParameterError(
                f"painless condition violated: need channels >= window length >= hop, "
                f"got M={M}, len(window)={w.size}, hop={a}"
            )
        object.__setattr__(self, "window", w)
        object.__setattr__(self, "hop", a)
        object.__setattr__(self, "channels", M)
        object.__setattr__(self, "signal_length", L)

    @property
    def frames(self):
        return self.signal_length // self.hop

    @property
    def redundancy(self):
        return self.channels / self.hop


def frame_diagonal(system):
    """Diagonal of the frame operator: ``d[l] = M * sum_n |g[(l - n*hop) % L]|^2``.

    The diagonal is hop-periodic; the full length-L array is returned.
    """
    a, M, L = system.hop, system.channels, system.signal_length
    wsq = np.zeros(L)
    wsq[: system.window.size] = system.window**2
    per_residue = wsq.reshape(L // a, a).sum(axis=0) * M
    return np.tile(per_residue, L // a)


def canonical_dual(system):
    """Canonical dual window ``g / d`` in the painless case (same support as g).

    Raises :class:`FrameError` when some sample position receives no window
    energy, i.e. the system is not a frame.
    """
    d = frame_diagonal(system)
    dead = np.flatnonzero(d[: system.hop] == 0.0)
    if dead.size:
        raise FrameError(
            f"frame condition violated: no window energy at sample index {int(dead[0])} "
            f"(mod hop {system.hop})"
        )
    return system.window / d[: system.window.size]


def frame_bounds(system):
    """Exact painless frame bounds (A, B) from the diagonal of the frame operator."""
    d = frame_diagonal(system)[: system.hop]
    A, B = float(np.min(d)), float(np.max(d))
    if A == 0.0:
        offending = int(np.flatnonzero(d == 0.0)[0])
        raise FrameError(f"lower frame bound is zero (sample index {offending} mod hop)")
    return A, B


@dataclass(frozen=True, eq=False)
class CoefficientGrid:
    """channels x frames complex coefficient array plus the generating system."""

    data: np.ndarray
    system: GaborSystem

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        expected = (self.system.channels, self.system.frames)
        if data.shape != expected:
            raise ParameterError(f"grid shape {data.shape} does not match system {expected}")
        object.__setattr__(self, "data", data)

    @property
    def shape(self):
        return self.data.shape

    @property
    def redundancy(self):
        return self.data.size / self.system.signal_length


def _frame_indices(system):
    """(frames, window length) matrix of circular sample indices per frame."""
    n = np.arange(system.frames)[:, None] * system.hop
    j = np.arange(system.window.size)[None, :]
    return (n + j) % system.signal_length


def dgt(signal, system, analysis_window=None):
    """Discrete Gabor transform of a length-L signal.

    ``analysis_window`` defaults to the system window (frame coefficients);
    pass :func:`canonical_dual` output for canonical coefficients.  Computed
    with one length-M FFT per frame; grid cell (m, n) holds the inner product
    of the signal with the analysis atom at channel m, frame n.
    """
    f = np.asarray(signal)
    if f.ndim != 1 or f.size != system.signal_length:
        raise ParameterError(
            f"signal length {f.size if f.ndim == 1 else f.shape} does not match "
            f"system signal_length {system.signal_length}"
        )
    w = system.window if analysis_window is None else np.asarray(analysis_window).ravel()
    if w.size != system.window.size:
        raise ParameterError("analysis window length does not match the system window")
    idx = _frame_indices(system)
    frames = f[idx] * np.conj(w)[None, :]
    buf = np.zeros((system.frames, system.channels), dtype=complex)
    buf[:, : w.size] = frames
    return CoefficientGrid(data=np.fft.fft(buf, axis=1).T, system=system)


def canonical_coefficients(signal, system):
    """Coefficients against the canonical dual frame (analysis with the dual window)."""
    return dgt(signal, system, analysis_window=canonical_dual(system))


def idgt(grid, synthesis_window=None):
    """Synthesize a signal from a coefficient grid by inverse FFT and overlap-add.

    Returns a complex length-L array; real inputs reconstruct with vanishing
    imaginary part when the grid is conjugate symmetric.
    """
    system = grid.system
    w = system.window if synthesis_window is None else np.asarray(synthesis_window).ravel()
    if w.size != system.window.size:
        raise ParameterError("synthesis window length does not match the system window")
    spectra = np.fft.ifft(grid.data, axis=0) * system.channels
    vals = spectra[: w.size, :].T * w[None, :]
    flat = _frame_indices(system).ravel()
    L = system.signal_length
    out = np.bincount(flat, weights=vals.real.ravel(), minlength=L).astype(complex)
    out += 1j * np.bincount(flat, weights=vals.imag.ravel(), minlength=L)
    return out


def dump_grid(grid, path):
    """Write a coefficient grid to the binary dump format.

    Layout: 16-byte header (magic ``WTHG``, u32 channels, u32 frames,
    u32 flags, little endian) followed by f64 (re, im) pairs in frame-major
    order.
    """
    data = np.asarray(getattr(grid, "data", grid), dtype=complex)
    M, N = data.shape
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC + struct.pack("<III", M, N, 0))
        fh.write(data.ravel(order="F").astype("<c16").tobytes())


def load_grid(path):
    """Read a dump written by :func:`dump_grid`; returns ``(data, flags)``."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != GRID_MAGIC:
            raise FormatError(f"{path}: not a coefficient grid dump")
        M, N, flags = struct.unpack("<III", header[4:])
        payload = fh.read()
    expected = 16 * M * N
    if len(payload) != expected:
        raise FormatError(f"{path}: truncated payload ({len(payload)} of {expected} bytes)")
    data = np.frombuffer(payload, dtype="<c16").reshape((M, N), order="F")
    return data.astype(complex), flags
