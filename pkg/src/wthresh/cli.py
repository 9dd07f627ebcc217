"""Command line front end.

Subcommands: ``synth``, ``analyze``, ``denoise``, ``curve``, ``rate`` and
``compare``.  Every option can also be supplied through ``--config FILE``
where the file is either JSON or flat ``key = value`` lines; explicit command
line flags win over file values.  Exit codes: 0 success, 2 parameter error,
3 format error, 4 frame error, 5 I/O error.
"""

import argparse
import json
import math
import sys

import numpy as np

from .approx import (
    error_curve,
    fit_rate,
    rms,
    weighted_mterm,
    wgl_denoise,
    wgl_match_sparsity,
)
from .errors import FitError, FormatError, FrameError, ParameterError, SearchError
from .gabor import (
    CoefficientGrid,
    GaborSystem,
    canonical_dual,
    dgt,
    dump_grid,
    hann_window,
    idgt,
)
from .harness import (
    ExperimentConfig,
    export_spectrogram,
    load_wav,
    melody10,
    run_experiment,
    save_wav,
    synth_harmonic,
)
from .weighting import stencil_preset

__all__ = ["main"]


def _load_config_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
        if not isinstance(data, dict):
            raise FormatError(f"{path}: config document must be a JSON object")
        return data
    except json.JSONDecodeError:
        pass
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        raw = raw.strip()
        try:
            values[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            values[key.strip()] = raw
    return values


def _merged(args, defaults):
    """CLI flag > config file > default, per key."""
    file_values = _load_config_file(args.config) if args.config else {}
    merged = {}
    for key, fallback in defaults.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            merged[key] = cli_value
        elif key in file_values:
            merged[key] = file_values[key]
        else:
            merged[key] = fallback
    return merged


def _parse_q(text):
    if isinstance(text, str) and text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _parse_m_list(text):
    if isinstance(text, str):
        return [int(part) for part in text.split(",") if part.strip()]
    return [int(v) for v in text]


def _parse_algorithms(value):
    if isinstance(value, str):
        return tuple(part.strip() for part in value.split(",") if part.strip())
    return tuple(value)


def _tone_spec(spec, length, rate):
    if spec in (None, "melody10"):
        return melody10(length, rate)
    with open(spec, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    tones = data["tones"] if isinstance(data, dict) else data
    return [tuple(tone) for tone in tones]


_SYSTEM_DEFAULTS = {"hop": 256, "channels": 1024, "window_length": 1024}


def _system_for(samples, cfg):
    return GaborSystem(
        window=hann_window(cfg["window_length"]),
        hop=cfg["hop"],
        channels=cfg["channels"],
        signal_length=samples.size,
    )


def _cmd_synth(args):
    cfg = _merged(args, {"spec": "melody10", "length": 2**19, "rate": 44100, "out": None})
    if cfg["out"] is None:
        raise ParameterError("synth requires --out")
    tones = _tone_spec(cfg["spec"], int(cfg["length"]), int(cfg["rate"]))
    samples = synth_harmonic(tones, int(cfg["length"]), int(cfg["rate"]))
    save_wav(cfg["out"], samples, int(cfg["rate"]))
    print(f"wrote {cfg['out']} ({samples.size} samples at {cfg['rate']} Hz)")
    return 0


def _cmd_analyze(args):
    cfg = _merged(args, {"input": None, "dump": None, "spectrogram": None,
                         **_SYSTEM_DEFAULTS})
    if cfg["input"] is None:
        raise ParameterError("analyze requires --input")
    samples, _ = load_wav(cfg["input"], hop=cfg["hop"], channels=cfg["channels"])
    system = _system_for(samples, cfg)
    grid = dgt(samples, system, analysis_window=canonical_dual(system))
    if cfg["dump"]:
        dump_grid(grid, cfg["dump"])
        print(f"wrote {cfg['dump']}")
    if cfg["spectrogram"]:
        export_spectrogram(grid, cfg["spectrogram"])
        print(f"wrote {cfg['spectrogram']}")
    M, N = grid.shape
    print(f"grid {M} channels x {N} frames, redundancy {grid.redundancy:g}")
    return 0


def _cmd_denoise(args):
    cfg = _merged(args, {
        "input": None, "out": None, "report": None, "reference": None,
        "algorithm": "greedy", "budget": None,
        "wgl_threshold": None, "wgl_iterations": 20,
        "wgl_neighborhood": "wgl-horizontal", **_SYSTEM_DEFAULTS,
    })
    if cfg["input"] is None or cfg["out"] is None:
        raise ParameterError("denoise requires --input and --out")
    samples, rate = load_wav(cfg["input"], hop=cfg["hop"], channels=cfg["channels"])
    system = _system_for(samples, cfg)
    grid = dgt(samples, system, analysis_window=canonical_dual(system))
    total = grid.data.size

    algorithm = cfg["algorithm"]
    lines = [f"input = {cfg['input']}", f"algorithm = {algorithm}",
             f"total coefficients = {total}"]
    if algorithm == "wgl":
        base = ExperimentConfig(
            seed=0, wgl_iterations=int(cfg["wgl_iterations"]),
            wgl_neighborhood=cfg["wgl_neighborhood"],
            wgl_threshold=float(cfg["wgl_threshold"] or 0.0),
        )
        if cfg["budget"] is not None:
            budget = _budget_count(cfg["budget"], total)
            out_grid, threshold = wgl_match_sparsity(grid, base.wgl_config(), budget)
            lines.append(f"matched threshold = {threshold!r}")
        elif cfg["wgl_threshold"] is not None:
            out_grid = wgl_denoise(grid, base.wgl_config())
            lines.append(f"threshold = {float(cfg['wgl_threshold'])!r}")
        else:
            raise ParameterError("wgl denoising needs --budget or --wgl-threshold")
        nonzeros = int(np.count_nonzero(out_grid.data))
    else:
        if cfg["budget"] is None:
            raise ParameterError("thresholding requires --budget")
        budget = _budget_count(cfg["budget"], total)
        approximant = weighted_mterm(grid, stencil_preset(algorithm), budget)
        out_grid = CoefficientGrid(data=approximant.to_grid(), system=system)
        nonzeros = len(approximant)
    recon = idgt(out_grid, system.window).real
    save_wav(cfg["out"], recon, rate)
    lines.append(f"nonzeros = {nonzeros}")
    lines.append(f"retained fraction = {nonzeros / total!r}")
    if cfg["reference"]:
        reference, _ = load_wav(cfg["reference"], hop=cfg["hop"], channels=cfg["channels"])
        lines.append(f"rms vs reference = {rms(reference, recon)!r}")
    report = "\n".join(lines) + "\n"
    if cfg["report"]:
        with open(cfg["report"], "w", encoding="utf-8") as fh:
            fh.write(report)
    sys.stdout.write(report)
    return 0


def _budget_count(value, total):
    if isinstance(value, str):
        value = float(value) if "." in value else int(value)
    if isinstance(value, float) and 0.0 < value < 1.0:
        return max(1, int(round(value * total)))
    count = int(value)
    if count < 0 or count > total:
        raise ParameterError(f"budget {value!r} outside [0, {total}]")
    return count


def _cmd_curve(args):
    cfg = _merged(args, {
        "input": None, "out": None, "stencil": "identity", "m_list": None,
        "norm": "sample-l2", "tau": None, "q": "inf", **_SYSTEM_DEFAULTS,
    })
    if cfg["input"] is None or cfg["m_list"] is None:
        raise ParameterError("curve requires --input and --m-list")
    samples, _ = load_wav(cfg["input"], hop=cfg["hop"], channels=cfg["channels"])
    system = _system_for(samples, cfg)
    m_list = _parse_m_list(cfg["m_list"])
    tau = float(cfg["tau"]) if cfg["tau"] is not None else None
    errors = error_curve(samples, system, stencil_preset(cfg["stencil"]), m_list,
                         norm=cfg["norm"], tau=tau, q=_parse_q(cfg["q"]))
    lines = ["m,error"] + [f"{m},{float(e)!r}" for m, e in zip(m_list, errors)]
    text = "\n".join(lines) + "\n"
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_rate(args):
    cfg = _merged(args, {"input": None, "m_min": None, "m_max": None})
    if cfg["input"] is None:
        raise ParameterError("rate requires --input")
    m_values, errors = [], []
    with open(cfg["input"], "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("m,"):
                continue
            m_text, _, err_text = line.partition(",")
            m_values.append(int(m_text))
            errors.append(float(err_text))
    lo = int(cfg["m_min"]) if cfg["m_min"] is not None else (min(m_values) if m_values else 1)
    hi = int(cfg["m_max"]) if cfg["m_max"] is not None else (max(m_values) if m_values else 1)
    fit = fit_rate(errors, (lo, hi), m_values=m_values)
    print(f"slope = {fit.slope!r}")
    print(f"intercept = {fit.intercept!r}")
    print(f"residual = {fit.residual!r}")
    print(f"m_range = {fit.m_range[0]}..{fit.m_range[1]}")
    return 0


def _cmd_compare(args):
    defaults = {
        "input": "melody10", "signal_length": 2**19, "sample_rate": 44100,
        "snr_db": 20.0, "seed": 0,
        "algorithms": "wgl,greedy,weight1,weight2,weight3",
        "m_budget": 0.065, "wgl_threshold": 0.01, "wgl_iterations": 20,
        "wgl_neighborhood": "wgl-horizontal",
        "csv": None, "text": None, "artifacts": None, **_SYSTEM_DEFAULTS,
    }
    cfg = _merged(args, defaults)
    config = ExperimentConfig(
        seed=int(cfg["seed"]),
        input=cfg["input"],
        sample_rate=int(cfg["sample_rate"]),
        signal_length=int(cfg["signal_length"]),
        hop=int(cfg["hop"]),
        channels=int(cfg["channels"]),
        window_length=int(cfg["window_length"]),
        snr_db=float(cfg["snr_db"]),
        algorithms=_parse_algorithms(cfg["algorithms"]),
        m_budget=cfg["m_budget"],
        wgl_threshold=float(cfg["wgl_threshold"]),
        wgl_iterations=int(cfg["wgl_iterations"]),
        wgl_neighborhood=cfg["wgl_neighborhood"],
    )
    report = run_experiment(config, artifacts_dir=cfg["artifacts"])
    if cfg["csv"]:
        with open(cfg["csv"], "w", encoding="utf-8", newline="") as fh:
            fh.write(report.to_csv())
    text = report.to_text()
    if cfg["text"]:
        with open(cfg["text"], "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wthresh",
        description="sparse time-frequency approximation and denoising toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, flags):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON or key=value config file")
        for flag, kwargs in flags.items():
            p.add_argument(flag, **kwargs)
        p.set_defaults(func=func)
        return p

    system_flags = {
        "--hop": {"type": int, "dest": "hop"},
        "--channels": {"type": int, "dest": "channels"},
        "--window-length": {"type": int, "dest": "window_length"},
    }
    add("synth", _cmd_synth, {
        "--spec": {"dest": "spec", "help": "tone list JSON or 'melody10'"},
        "--length": {"type": int, "dest": "length"},
        "--rate": {"type": int, "dest": "rate"},
        "--out": {"dest": "out"},
    })
    add("analyze", _cmd_analyze, {
        "--input": {"dest": "input"},
        "--dump": {"dest": "dump", "help": "coefficient dump path (.wthg)"},
        "--spectrogram": {"dest": "spectrogram", "help": "PGM output path"},
        **system_flags,
    })
    add("denoise", _cmd_denoise, {
        "--input": {"dest": "input"},
        "--out": {"dest": "out"},
        "--report": {"dest": "report"},
        "--reference": {"dest": "reference", "help": "clean WAV for RMS"},
        "--algorithm": {"dest": "algorithm"},
        "--budget": {"dest": "budget", "help": "coefficient count or fraction"},
        "--wgl-threshold": {"type": float, "dest": "wgl_threshold"},
        "--wgl-iterations": {"type": int, "dest": "wgl_iterations"},
        "--wgl-neighborhood": {"dest": "wgl_neighborhood"},
        **system_flags,
    })
    add("curve", _cmd_curve, {
        "--input": {"dest": "input"},
        "--out": {"dest": "out"},
        "--stencil": {"dest": "stencil"},
        "--m-list": {"dest": "m_list", "help": "comma separated m values"},
        "--norm": {"dest": "norm", "choices": ["sample-l2", "coeff-lorentz"]},
        "--tau": {"type": float, "dest": "tau"},
        "--q": {"dest": "q", "help": "positive real or 'inf'"},
        **system_flags,
    })
    add("rate", _cmd_rate, {
        "--input": {"dest": "input", "help": "CSV with m,error columns"},
        "--m-min": {"type": int, "dest": "m_min"},
        "--m-max": {"type": int, "dest": "m_max"},
    })
    add("compare", _cmd_compare, {
        "--input": {"dest": "input", "help": "WAV path or 'melody10'"},
        "--signal-length": {"type": int, "dest": "signal_length"},
        "--sample-rate": {"type": int, "dest": "sample_rate"},
        "--snr-db": {"type": float, "dest": "snr_db"},
        "--seed": {"type": int, "dest": "seed"},
        "--algorithms": {"dest": "algorithms"},
        "--m-budget": {"dest": "m_budget"},
        "--wgl-threshold": {"type": float, "dest": "wgl_threshold"},
        "--wgl-iterations": {"type": int, "dest": "wgl_iterations"},
        "--wgl-neighborhood": {"dest": "wgl_neighborhood"},
        "--csv": {"dest": "csv"},
        "--text": {"dest": "text"},
        "--artifacts": {"dest": "artifacts"},
        **system_flags,
    })
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, FitError, SearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 3
    except FrameError as exc:
        print(f"frame error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
