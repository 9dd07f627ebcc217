import numpy as np
import pytest
from scipy.io import wavfile

from wthresh.cli import main
from wthresh.gabor import load_grid
from wthresh.harness import read_pgm

SMALL = ["--hop", "64", "--channels", "256", "--window-length", "256"]


@pytest.fixture()
def clean_wav(tmp_path):
    path = tmp_path / "clean.wav"
    code = main(["synth", "--length", str(2**14), "--rate", "8000",
                 "--out", str(path)])
    assert code == 0
    return path


def test_synth_and_analyze(tmp_path, clean_wav):
    dump = tmp_path / "grid.wthg"
    pgm = tmp_path / "grid.pgm"
    code = main(["analyze", "--input", str(clean_wav), "--dump", str(dump),
                 "--spectrogram", str(pgm), *SMALL])
    assert code == 0
    data, _ = load_grid(dump)
    assert data.shape == (256, 2**14 // 64)
    M, N, _ = read_pgm(pgm)
    assert (M, N) == data.shape


def test_denoise_with_reference(tmp_path, clean_wav):
    out = tmp_path / "den.wav"
    report = tmp_path / "den.txt"
    code = main(["denoise", "--input", str(clean_wav), "--algorithm", "weight2",
                 "--budget", "0.05", "--out", str(out), "--report", str(report),
                 "--reference", str(clean_wav), *SMALL])
    assert code == 0
    text = report.read_text()
    assert "rms vs reference" in text
    assert out.exists()


def test_curve_then_rate(tmp_path, clean_wav, capsys):
    csv = tmp_path / "curve.csv"
    code = main(["curve", "--input", str(clean_wav), "--stencil", "identity",
                 "--m-list", "16,32,64,128,256,512,1024",
                 "--norm", "coeff-lorentz", "--tau", "2", "--q", "2",
                 "--out", str(csv), *SMALL])
    assert code == 0
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "m,error"
    assert len(lines) == 8
    code = main(["rate", "--input", str(csv), "--m-min", "16", "--m-max", "1024"])
    assert code == 0
    out = capsys.readouterr().out
    assert "slope = " in out


def test_compare_deterministic(tmp_path, clean_wav):
    csvs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        code = main(["compare", "--input", str(clean_wav), "--seed", "5",
                     "--snr-db", "20", "--m-budget", "0.065",
                     "--csv", str(path), *SMALL])
        assert code == 0
        csvs.append(path.read_bytes())
    assert csvs[0] == csvs[1]
    text = csvs[0].decode()
    for name in ("wgl", "greedy", "weight1", "weight2", "weight3"):
        assert f"\n{name}," in text


def test_config_file_and_cli_override(tmp_path, clean_wav, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# comparison defaults\n"
        f"input = {clean_wav}\n"
        "seed = 5\n"
        "snr_db = 20\n"
        "m_budget = 0.1\n"
        "hop = 64\n"
        "channels = 256\n"
        "window_length = 256\n"
        "algorithms = greedy\n"
    )
    out1 = tmp_path / "one.csv"
    assert main(["compare", "--config", str(cfg), "--csv", str(out1)]) == 0
    assert "# m_budget=0.1" in out1.read_text()
    out2 = tmp_path / "two.csv"
    assert main(["compare", "--config", str(cfg), "--m-budget", "0.02",
                 "--csv", str(out2)]) == 0
    assert "# m_budget=0.02" in out2.read_text()


def test_exit_codes(tmp_path, clean_wav):
    # missing input file -> I/O error
    assert main(["analyze", "--input", str(tmp_path / "nope.wav"), *SMALL]) == 5
    # missing budget -> parameter error
    assert main(["denoise", "--input", str(clean_wav), "--algorithm", "greedy",
                 "--out", str(tmp_path / "x.wav"), *SMALL]) == 2
    # bad wav payload -> format error
    bad = tmp_path / "bad.wav"
    bad.write_bytes(b"RIFFnonsense")
    assert main(["analyze", "--input", str(bad), *SMALL]) == 3
    # hop equal to a Hann window length leaves sample 0 uncovered -> frame error
    assert main(["analyze", "--input", str(clean_wav), "--hop", "256",
                 "--channels", "256", "--window-length", "256"]) == 4


def test_unknown_stencil_is_parameter_error(tmp_path, clean_wav):
    assert main(["denoise", "--input", str(clean_wav), "--algorithm", "mystery",
                 "--budget", "10", "--out", str(tmp_path / "x.wav"), *SMALL]) == 2


def test_explicit_tap_list_in_json_config(tmp_path, clean_wav):
    cfg = tmp_path / "taps.json"
    cfg.write_text(
        '{"input": "%s", "seed": 4, "m_budget": 0.05,\n'
        ' "hop": 64, "channels": 256, "window_length": 256,\n'
        ' "algorithms": ["greedy",\n'
        '   {"name": "wide-row", "taps": [[0, 0, 1.0], [0, -1, 0.5], [0, 1, 0.5]]}]}\n'
        % clean_wav
    )
    out = tmp_path / "taps.csv"
    assert main(["compare", "--config", str(cfg), "--csv", str(out)]) == 0
    text = out.read_text()
    assert "\ngreedy," in text and "\nwide-row," in text
