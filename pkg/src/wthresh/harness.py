"""Experiment harness: signal I/O, synthetic signals, noise, and the
denoising comparison protocol.

The runner is a pure function of (input bytes, configuration, seed): noise
is drawn from a named counter-seeded generator (PCG64 seeded with
``[seed, stream]``) and rescaled so the realized SNR matches the request
exactly, so repeated runs produce byte-identical reports.
"""

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

from .approx import (
    WGLConfig,
    rms,
    weighted_mterm,
    wgl_denoise,
    wgl_match_sparsity,
)
from .errors import FormatError, ParameterError
from .gabor import (
    CoefficientGrid,
    GaborSystem,
    canonical_dual,
    dgt,
    dump_grid,
    hann_window,
    idgt,
)
from .weighting import WeightStencil2D, stencil_preset

__all__ = [
    "load_wav",
    "save_wav",
    "pad_to_lattice",
    "synth_harmonic",
    "melody10",
    "add_awgn",
    "export_spectrogram",
    "read_pgm",
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
]

RNG_NAME = "PCG64"


# ---------------------------------------------------------------------------
# WAV input/output


def load_wav(path, hop=None, channels=None):
    """Read a WAV file as mono float samples in [-1, 1].

    Accepts 16-bit PCM and 32/64-bit float encodings; multichannel audio is
    averaged to mono.  When ``hop`` and ``channels`` are given, the signal is
    zero padded to a multiple of their least common multiple.  Returns
    ``(samples, sample_rate)``.
    """
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if data.size == 0:
        raise FormatError(f"{path}: empty audio payload")
    if data.dtype == np.int16:
        samples = data.astype(float) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(float)
    else:
        raise FormatError(
            f"{path}: unsupported sample encoding {data.dtype}; "
            "use 16-bit PCM or 32-bit float"
        )
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if hop is not None and channels is not None:
        samples = pad_to_lattice(samples, hop, channels)
    return samples, int(rate)


def save_wav(path, samples, rate):
    """Write float samples as a 32-bit float WAV file."""
    wavfile.write(path, int(rate), np.asarray(samples, dtype=np.float32))


def pad_to_lattice(samples, hop, channels):
    """Zero pad a signal to the next multiple of lcm(hop, channels)."""
    block = math.lcm(int(hop), int(channels))
    x = np.asarray(samples, dtype=float).ravel()
    remainder = x.size % block
    if remainder:
        x = np.concatenate([x, np.zeros(block - remainder)])
    return x


# ---------------------------------------------------------------------------
# Synthetic signals and noise


def synth_harmonic(tones, length, sample_rate):
    """Sum of Hann-enveloped harmonic tones.

    ``tones`` is an iterable of ``(onset_s, duration_s, f0, partials,
    amplitudes)``; ``amplitudes`` may be a scalar (shared by all partials) or
    one value per partial.  Deterministic; raises on partials at or above
    the Nyquist frequency.
    """
    n = int(length)
    out = np.zeros(n)
    t = np.arange(n) / float(sample_rate)
    for onset, duration, f0, partials, amplitudes in tones:
        partials = int(partials)
        amps = np.broadcast_to(np.asarray(amplitudes, dtype=float).ravel(), (partials,)) \
            if np.ndim(amplitudes) == 0 else np.asarray(amplitudes, dtype=float).ravel()
        if amps.size != partials:
            raise ParameterError(
                f"expected {partials} partial amplitudes, got {amps.size}"
            )
        if f0 <= 0 or f0 * partials >= sample_rate / 2.0:
            raise ParameterError(
                f"partial frequency {f0 * partials} Hz reaches Nyquist "
                f"({sample_rate / 2.0} Hz)"
            )
        lo = max(0, int(round(onset * sample_rate)))
        hi = min(n, int(round((onset + duration) * sample_rate)))
        if hi <= lo:
            continue
        local = t[lo:hi] - t[lo]
        envelope = 0.5 - 0.5 * np.cos(2.0 * np.pi * local / (local[-1] if local[-1] else 1.0))
        tone = np.zeros(hi - lo)
        for p in range(1, partials + 1):
            tone += amps[p - 1] * np.sin(2.0 * np.pi * p * f0 * local)
        out[lo:hi] += envelope * tone
    return out


def melody10(length, sample_rate=44100):
    """Ten ascending harmonic tones filling ``length`` samples.

    Each tone carries up to five partials; partials that would reach 90% of
    the Nyquist frequency are dropped, so the spec is valid at any sample
    rate.
    """
    duration = length / float(sample_rate) / 10.0
    amps = (0.45, 0.25, 0.15, 0.1, 0.05)
    tones = []
    for k in range(10):
        f0 = 220.0 * 2.0 ** (3.0 * k / 12.0)
        partials = max(1, min(5, int(0.9 * (sample_rate / 2.0) / f0)))
        tones.append((k * duration, duration, f0, partials, amps[:partials]))
    return tones


def add_awgn(signal, snr_db, seed, stream=0):
    """Add white Gaussian noise rescaled to the requested SNR exactly.

    The noise vector is drawn from ``PCG64`` seeded with ``[seed, stream]``
    and then scaled so ``10*log10(||f||^2 / ||noise||^2) == snr_db`` for the
    realized draw.  Same seed, same bytes.
    """
    x = np.asarray(signal, dtype=float).ravel()
    energy = np.linalg.norm(x)
    if energy == 0.0:
        raise ParameterError("cannot scale noise against an identically zero signal")
    if not np.isfinite(snr_db):
        raise ParameterError(f"snr_db must be finite, got {snr_db!r}")
    rng = np.random.default_rng([int(seed), int(stream)])
    noise = rng.standard_normal(x.size)
    noise *= energy / np.linalg.norm(noise) * 10.0 ** (-snr_db / 20.0)
    return x + noise


# ---------------------------------------------------------------------------
# Spectrogram export


def export_spectrogram(grid, path):
    """Write a coefficient grid as a binary PGM (P5) magnitude image.

    Magnitudes map to dB relative to the grid peak, clipped to [-80, 0] and
    scaled to 0..255.  Rows are reordered so the top row is the Nyquist
    channel; a header comment records the channel and frame counts.  The
    output is bit-exact for a given grid.
    """
    data = np.asarray(getattr(grid, "data", grid))
    M, N = data.shape
    mags = np.abs(data)
    peak = mags.max()
    if peak == 0.0:
        pixels = np.zeros((M, N), dtype=np.uint8)
    else:
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(mags / peak)
        db = np.clip(db, -80.0, 0.0)
        pixels = np.round((db + 80.0) * (255.0 / 80.0)).astype(np.uint8)
    order = (M // 2 - np.arange(M)) % M
    header = f"P5\n# WTHG M={M} N={N}\n{N} {M}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pixels[order, :].tobytes())


def read_pgm(path):
    """Parse a PGM written by :func:`export_spectrogram`.

    Returns ``(channels, frames, pixels)`` with pixels in file row order.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    lines = raw.split(b"\n", 4)
    if len(lines) < 5 or lines[0] != b"P5":
        raise FormatError(f"{path}: not a P5 spectrogram")
    comment = lines[1].decode("ascii")
    if not comment.startswith("# WTHG"):
        raise FormatError(f"{path}: missing grid size comment")
    fields = dict(part.split("=") for part in comment[7:].split())
    M, N = int(fields["M"]), int(fields["N"])
    width, height = (int(v) for v in lines[2].split())
    if (width, height) != (N, M) or lines[3] != b"255":
        raise FormatError(f"{path}: inconsistent header")
    pixels = np.frombuffer(lines[4], dtype=np.uint8, count=M * N).reshape(M, N)
    return M, N, pixels


# ---------------------------------------------------------------------------
# Experiment protocol


@dataclass
class ExperimentConfig:
    """Inputs of one denoising comparison run.

    ``m_budget`` may be an integer coefficient count, a fraction of the total
    coefficient count in (0, 1), or ``"from-wgl"`` to adopt the nonzero count
    of the group-lasso output at ``wgl_threshold``.
    """

    seed: int
    input: object = "melody10"
    sample_rate: int = 44100
    signal_length: int = 2**19
    hop: int = 256
    channels: int = 1024
    window_length: int = 1024
    snr_db: float = 20.0
    algorithms: tuple = ("wgl", "greedy", "weight1", "weight2", "weight3")
    m_budget: object = 0.065
    wgl_threshold: float = 0.01
    wgl_iterations: int = 20
    wgl_neighborhood: object = "wgl-horizontal"

    def wgl_config(self, threshold=None):
        neighborhood = self.wgl_neighborhood
        if isinstance(neighborhood, str):
            neighborhood = stencil_preset(neighborhood)
        elif not isinstance(neighborhood, WeightStencil2D):
            neighborhood = WeightStencil2D(dict(neighborhood))
        return WGLConfig(
            neighborhood=neighborhood,
            threshold=self.wgl_threshold if threshold is None else threshold,
            iterations=self.wgl_iterations,
        )


@dataclass
class ExperimentReport:
    """Per-algorithm results plus the echoed parameters of the run."""

    params: dict
    rows: list
    total_coefficients: int
    budget: int
    noisy_rms: float

    def to_csv(self):
        lines = [f"# {key}={value}" for key, value in self.params.items()]
        lines.append("algorithm,nonzeros,total_coefficients,retained_fraction,rms")
        for row in self.rows:
            lines.append(
                f"{row['algorithm']},{row['nonzeros']},{self.total_coefficients},"
                f"{row['retained_fraction']!r},{row['rms']!r}"
            )
        return "\n".join(lines) + "\n"

    def to_text(self):
        out = io.StringIO()
        out.write("denoising comparison\n")
        for key, value in self.params.items():
            out.write(f"  {key} = {value}\n")
        out.write(f"  noisy rms = {self.noisy_rms:.6g}\n")
        out.write(f"  budget = {self.budget} of {self.total_coefficients} "
                  f"({100.0 * self.budget / self.total_coefficients:.3g}%)\n\n")
        out.write(f"{'algorithm':<20}{'nonzeros':>10}{'retained':>12}{'rms':>14}\n")
        for row in self.rows:
            out.write(
                f"{row['algorithm']:<20}{row['nonzeros']:>10}"
                f"{row['retained_fraction']:>12.5f}{row['rms']:>14.6g}\n"
            )
        return out.getvalue()


def _resolve_signal(config):
    """Clean signal for a run: synthetic melody, explicit tone list, or WAV path."""
    spec = config.input
    if isinstance(spec, str) and spec == "melody10":
        clean = synth_harmonic(
            melody10(config.signal_length, config.sample_rate),
            config.signal_length,
            config.sample_rate,
        )
        return pad_to_lattice(clean, config.hop, config.channels), config.sample_rate
    if isinstance(spec, dict):
        clean = synth_harmonic(spec["tones"], config.signal_length, config.sample_rate)
        return pad_to_lattice(clean, config.hop, config.channels), config.sample_rate
    return load_wav(spec, hop=config.hop, channels=config.channels)


def _resolve_algorithms(entries):
    """Normalize algorithm names to (label, kind, stencil) triples."""
    resolved = []
    for entry in entries:
        if isinstance(entry, dict):
            label = entry.get("name", "custom")
            resolved.append((label, "threshold", WeightStencil2D(
                {(int(dm), int(dn)): float(w) for dm, dn, w in entry["taps"]})))
        elif entry == "wgl":
            resolved.append(("wgl", "wgl", None))
        elif entry == "greedy":
            resolved.append(("greedy", "threshold", stencil_preset("identity")))
        else:
            resolved.append((entry, "threshold", stencil_preset(entry)))
    return resolved


def _resolve_budget(m_budget, total):
    if isinstance(m_budget, str):
        if m_budget == "from-wgl":
            return "from-wgl"
        m_budget = float(m_budget) if "." in m_budget else int(m_budget)
    if isinstance(m_budget, float) and 0.0 < m_budget < 1.0:
        return max(1, int(round(m_budget * total)))
    budget = int(m_budget)
    if budget < 1 or budget > total:
        raise ParameterError(f"m_budget {m_budget!r} outside [1, {total}]")
    return budget


def run_experiment(config, artifacts_dir=None):
    """Run the denoising comparison protocol and return a report.

    A clean signal is corrupted with white Gaussian noise at the configured
    SNR; the group lasso fixes (or is matched to) the coefficient budget; the
    thresholding algorithms keep exactly that many cells of the noisy
    canonical coefficients; every reconstruction is scored by relative RMS
    against the clean signal.  With ``artifacts_dir``, signals (.npy) and
    coefficient grids (.wthg) are dumped for byte-exact recomputation.
    """
    clean, sample_rate = _resolve_signal(config)
    system = GaborSystem(
        window=hann_window(config.window_length),
        hop=config.hop,
        channels=config.channels,
        signal_length=clean.size,
    )
    dual = canonical_dual(system)
    noisy = add_awgn(clean, config.snr_db, config.seed, stream=0)
    noisy_grid = dgt(noisy, system, analysis_window=dual)
    total = noisy_grid.data.size
    noisy_rms = rms(clean, noisy)

    algorithms = _resolve_algorithms(config.algorithms)
    budget_spec = _resolve_budget(config.m_budget, total)
    wgl_grid = None
    wgl_threshold = None
    if budget_spec == "from-wgl":
        wgl_threshold = float(config.wgl_threshold)
        wgl_grid = wgl_denoise(noisy_grid, config.wgl_config())
        budget = int(np.count_nonzero(wgl_grid.data))
        if budget == 0:
            raise ParameterError(
                f"wgl_threshold {wgl_threshold} zeroes the grid; no budget to adopt"
            )
    else:
        budget = budget_spec
        if any(kind == "wgl" for _, kind, _ in algorithms):
            wgl_grid, wgl_threshold = wgl_match_sparsity(
                noisy_grid, config.wgl_config(), budget
            )

    if artifacts_dir is not None:
        import os

        os.makedirs(artifacts_dir, exist_ok=True)
        np.save(f"{artifacts_dir}/clean.npy", clean)
        np.save(f"{artifacts_dir}/noisy.npy", noisy)
        dump_grid(noisy_grid, f"{artifacts_dir}/noisy.wthg")

    rows = []
    for label, kind, stencil in algorithms:
        if kind == "wgl":
            out_grid = wgl_grid
            nonzeros = int(np.count_nonzero(out_grid.data))
        else:
            approximant = weighted_mterm(noisy_grid, stencil, budget)
            out_grid = CoefficientGrid(data=approximant.to_grid(), system=system)
            nonzeros = len(approximant)
        recon = idgt(out_grid, system.window).real
        rows.append({
            "algorithm": label,
            "nonzeros": nonzeros,
            "retained_fraction": nonzeros / total,
            "rms": rms(clean, recon),
        })
        if artifacts_dir is not None:
            dump_grid(out_grid, f"{artifacts_dir}/{label}.wthg")
            np.save(f"{artifacts_dir}/{label}.npy", recon)

    params = {
        "input": config.input if isinstance(config.input, str) else "synth-spec",
        "signal_length": clean.size,
        "sample_rate": sample_rate,
        "hop": config.hop,
        "channels": config.channels,
        "window_length": config.window_length,
        "snr_db": repr(float(config.snr_db)),
        "seed": config.seed,
        "rng": RNG_NAME,
        "m_budget": config.m_budget,
        "budget": budget,
        "wgl_threshold": repr(float(wgl_threshold)) if wgl_threshold is not None else "",
        "wgl_iterations": config.wgl_iterations,
        "noisy_rms": repr(noisy_rms),
    }
    return ExperimentReport(
        params=params,
        rows=rows,
        total_coefficients=total,
        budget=budget,
        noisy_rms=noisy_rms,
    )
