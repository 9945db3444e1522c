import csv
import json

import numpy as np
import pytest

from ftnfde.channel import TapDelayLine
from ftnfde.cli import WEIGHT_HEADER, main
from ftnfde.harness import CSV_HEADER, ExperimentConfig

QUICK = ["--set", "gamma=1.0", "--set", "ebn0_db=[6]", "--set", "n=64", "--set", "min_bits=2000",
         "--set", "max_errors=5"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_ber_writes_csv_and_echoes_config(tmp_path, capsys):
    out = tmp_path / "ber.csv"
    code = main(["ber", "--set", "mode=ber_cp", "--set", "cp_len=10", *QUICK, "--seed", "4", "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 2 and rows[1][0] == "ber_cp"
    echo, stamp = capsys.readouterr().err.strip().splitlines()[-2:]
    cfg = ExperimentConfig.from_dict(json.loads(echo))
    assert cfg.rng_seed == 4 and cfg.cp_len == 10
    assert stamp.startswith("run ")


def test_ber_from_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"mode": "ber_overlap", "p": 8, "q": 8}))
    out = tmp_path / "o.csv"
    assert main(["ber", "--config", str(path), *QUICK, "--out", str(out)]) == 0
    assert len(read_csv(out)) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["ber", "--set", "mode=ber_cp"],
        ["ber", "--set", "mode=ber_overlap", "--set", "gamma=1.5"],
        ["ber", "--set", "mode=ber_overlap", "--set", "bogus=1"],
        ["ber", "--set", "novalue"],
        ["ber", "--config", "/nonexistent/cfg.json"],
        ["weights", "--set", "n=8", "--set", "gamma=0.8"],
    ],
)
def test_config_errors_exit_one(argv, capsys):
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err


def test_bad_json_config_exits_one(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["ber", "--config", str(path)]) == 1


def test_numeric_failure_exits_two(monkeypatch):
    from ftnfde import cli
    from ftnfde.equalizer import SpectralNullError

    def boom(config):
        raise SpectralNullError("spectral null at zero noise")

    monkeypatch.setattr(cli, "dump_weights", boom)
    assert main(["weights"]) == 2


def test_failed_ber_point_exits_two(monkeypatch, tmp_path):
    from ftnfde import harness
    from ftnfde.equalizer import SpectralNullError

    def boom(*a, **k):
        raise SpectralNullError("spectral null at zero noise")

    monkeypatch.setattr(harness, "make_weight", boom)
    out = tmp_path / "o.csv"
    assert main(["ber", "--set", "mode=ber_overlap", *QUICK, "--out", str(out)]) == 2
    assert read_csv(out)[1][6] == "nan"


def test_weights_dump(tmp_path):
    out = tmp_path / "w.csv"
    assert main(["weights", "--set", "gamma=0.8", "--set", "n=64", "--set", "ebn0_db=[3]",
                 "--out", str(out)]) == 0
    rows = read_csv(out)
    assert tuple(rows[0]) == WEIGHT_HEADER
    data = np.array(rows[1:], dtype=float)
    assert data.shape == (64, 8)
    assert np.array_equal(data[:, 0], np.arange(64))
    lam = data[:, 1] + 1j * data[:, 2]
    white = data[:, 4] + 1j * data[:, 5]
    n0 = 10 ** -0.3
    assert np.allclose(white, np.conj(lam) / (np.abs(lam) ** 2 + n0))
    assert np.all(data[:, 3] >= 0)


def test_rmse_per_gamma_files(tmp_path):
    out = tmp_path / "rmse.csv"
    assert main(["rmse", "--set", "gamma=[1.0, 0.8]", "--set", "n=64", "--set", "rmse_blocks=20",
                 "--out", str(out)]) == 0
    one = read_csv(tmp_path / "rmse_gamma1.csv")
    assert one[0] == ["position", "rmse"] and len(one) == 65
    assert max(float(r[1]) for r in one[1:]) < 1e-10
    assert (tmp_path / "rmse_gamma0.8.csv").exists()


def test_channel_json(tmp_path):
    out = tmp_path / "ch.json"
    assert main(["channel", "--set", "channel=rayleigh", "--set", "gamma=0.8", "--seed", "3",
                 "--out", str(out)]) == 0
    ch = TapDelayLine.from_json(out.read_text())
    assert len(ch.delays) == 10
    assert ch.delays[-1] == pytest.approx(16 * 0.8)
    out2 = tmp_path / "ch2.json"
    main(["channel", "--set", "channel=rayleigh", "--set", "gamma=0.8", "--seed", "3", "--out", str(out2)])
    assert out.read_text() == out2.read_text()


def test_selfcheck_passes(capsys):
    assert main(["selfcheck"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 5 and all(line.startswith("PASS") for line in lines)
