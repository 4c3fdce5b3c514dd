import json
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from aniso import cli
from aniso.fry import NumericalError
from aniso.io import (config_hash, format_number, jsonable, parse_window, read_csv, read_pattern,
                      write_json, write_pattern)
from aniso.simulate import regular_archetype
from conftest import random_pattern


def test_format_number_round_trip():
    rng = np.random.default_rng(0)
    for v in np.concatenate([rng.normal(size=200) * 10.0 ** rng.integers(-300, 300, 200),
                             [0.1, 1 / 3, 5e-324, np.pi]]):
        assert float(format_number(v)) == v
    assert format_number(np.int64(7)) == "7"
    assert format_number(float("nan")) == "nan"


def test_pattern_round_trip(tmp_path, small3d):
    f = tmp_path / "p.csv"
    write_pattern(f, small3d)
    q = read_pattern(str(f))
    assert_array_equal(q.points, small3d.points)
    assert q.window == small3d.window


def test_read_errors_name_line_and_field(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("# window: 0,1,0,1\nx,y\n0.1,0.2\n0.3,abc\n")
    with pytest.raises(ValueError, match=r"bad.csv:4: field 'y'"):
        read_pattern(str(f))
    f.write_text("x,y\n0.1,0.2,0.3\n")
    with pytest.raises(ValueError, match=r":2: expected 2 fields"):
        read_pattern(str(f), "0,1,0,1")
    f.write_text("x,y\n0.1,0.2\n")
    with pytest.raises(ValueError, match="no window"):
        read_pattern(str(f))


def test_window_mismatch(tmp_path, small2d):
    f = tmp_path / "p.csv"
    write_pattern(f, small2d)
    assert read_pattern(str(f), "0,1,0,0.8").n == small2d.n
    with pytest.raises(ValueError, match="window mismatch"):
        read_pattern(str(f), "0,1,0,1")


def test_parse_window():
    w = parse_window("0, 2, -1, 1, 0, 3")
    assert_allclose(w.lo, [0, -1, 0])
    assert_allclose(w.hi, [2, 1, 3])
    with pytest.raises(ValueError):
        parse_window("0,1,2")


def test_json_helpers(tmp_path):
    obj = {"a": np.arange(3), "b": np.float32(0.5), "c": [np.inf, np.bool_(False)], 1: None}
    assert jsonable(obj) == {"a": [0, 1, 2], "b": 0.5, "c": [None, False], "1": None}
    write_json(tmp_path / "o.json", obj)
    assert json.loads((tmp_path / "o.json").read_text())["c"] == [None, False]
    assert config_hash({"x": 1, "y": 2}) == config_hash({"y": 2, "x": 1})


def test_thread_count(monkeypatch):
    monkeypatch.setenv("ANISO_THREADS", "3")
    assert cli.thread_count() == 3
    assert cli.thread_count(2) == 2
    monkeypatch.delenv("ANISO_THREADS")
    assert cli.thread_count() == (os.cpu_count() or 1)
    monkeypatch.setenv("ANISO_THREADS", "many")
    with pytest.raises(ValueError):
        cli.thread_count()
    with pytest.raises(ValueError):
        cli.thread_count(0)


def _run(*argv):
    return cli.main([str(a) for a in argv])


def test_simulate_and_pcf(tmp_path):
    pat = tmp_path / "pois.csv"
    assert _run("simulate", "--model", "poisson", "--params", '{"lambda": 400}', "--seed", 3,
                "--out", pat) == 0
    man = json.loads((tmp_path / "pois.manifest.json").read_text())
    assert man["seeds"] == [3] and "wall_clock" not in man
    assert man["outputs"]["pois.csv"] == cli.file_digest(str(pat))
    out = tmp_path / "g.csv"
    assert _run("k2", "--input", pat, "--stat", "pcf", "--rmin", 0.05, "--rmax", 0.25,
                "--out", out) == 0
    header, data, comments = read_csv(out)
    assert header[0] == "r"
    assert abs(np.mean(data[:, 1]) - 1) < 0.15
    assert comments == ["manifest: g.manifest.json"]


def test_manifest_deterministic(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for d in ("a", "b"):
        os.mkdir(d)
        threads = "1" if d == "a" else "2"
        assert _run("simulate", "--archetype", "clustered", "--seed", 2, "--threads", threads,
                    "--out", f"{d}/p.csv") == 0
    assert (tmp_path / "a/p.csv").read_bytes() == (tmp_path / "b/p.csv").read_bytes()
    ma = json.loads((tmp_path / "a/p.manifest.json").read_text())
    mb = json.loads((tmp_path / "b/p.manifest.json").read_text())
    assert ma == mb
    assert _run("simulate", "--archetype", "clustered", "--seed", 2, "--record-time",
                "--out", "a/t.csv") == 0
    assert "wall_clock" in json.loads((tmp_path / "a/t.manifest.json").read_text())


def test_exit_codes(tmp_path, monkeypatch, small2d):
    pat = tmp_path / "p.csv"
    write_pattern(pat, small2d)
    assert _run("nn", "--input", tmp_path / "missing.csv", "--out", tmp_path / "o.csv") == 2
    assert _run("nn", "--input", pat, "--window", "0,1,0,1", "--out", tmp_path / "o.csv") == 2
    assert _run("nosuchcommand") == 2
    assert _run("test", "--method", "wong", "--input", pat, "--report", tmp_path / "r.json") == 2
    assert _run("test", "--method", "replicate", "--input", pat, pat,
                "--report", tmp_path / "r.json") == 2

    def boom(*a, **k):
        raise NumericalError("singular")

    monkeypatch.setattr(cli, "guan_test", boom)
    assert _run("test", "--method", "guan", "--input", pat, "--report", tmp_path / "r.json") == 3


@pytest.mark.parametrize("stat", ["orientation", "directional", "g_global", "g_local"])
def test_nn_command(tmp_path, small2d, stat):
    pat = tmp_path / "p.csv"
    write_pattern(pat, small2d)
    assert _run("nn", "--input", pat, "--stat", stat, "--out", tmp_path / "o.csv") == 0
    _, data, _ = read_csv(tmp_path / "o.csv")
    assert np.all(np.isfinite(data))


def test_spectral_and_wavelet_commands(tmp_path):
    pat = tmp_path / "p.csv"
    write_pattern(pat, random_pattern(200, seed=3))
    assert _run("spectral", "--input", pat, "--pmax", 6, "--smooth", "gaussian:1",
                "--out", tmp_path / "s.csv", "--rtheta", tmp_path / "rt.csv") == 0
    header, _, _ = read_csv(tmp_path / "rt.csv")
    assert header == ["kind", "x", "value", "count", "lower", "upper"]
    assert _run("wavelet", "--input", pat, "--method", "cwt", "--scales", "0.1,0.3",
                "--angle-step", 30, "--resolution", 8, "--out", tmp_path / "w.csv") == 0
    header, data, _ = read_csv(tmp_path / "w.csv")
    assert header == ["scale", "angle", "energy"] and data.shape[0] == 12


def test_fry_ellipse_command(tmp_path):
    pat = tmp_path / "p.csv"
    write_pattern(pat, regular_archetype(2))
    out = tmp_path / "f.json"
    assert _run("fry-ellipse", "--input", pat, "--levels", "3,4,5", "--test", "--out", out) == 0
    d = json.loads(out.read_text())
    assert "test" in d


def test_guan_command_regular(tmp_path):
    pat = tmp_path / "p.csv"
    write_pattern(pat, regular_archetype(1))
    rep = tmp_path / "r.json"
    with pytest.warns(UserWarning):
        assert _run("test", "--method", "guan", "--input", pat, "--report", rep) == 0
    d = json.loads(rep.read_text())
    assert d["name"] == "guan" and d["p_value"] < 0.05
