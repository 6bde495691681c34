import json
import logging
import subprocess
import sys

import numpy as np
import pytest

from stochcut.cli import main
from stochcut.geometry import Rectangle
from stochcut.grid import AccuracyBudget
from stochcut.io import (ConfigError, IoError, MissingValues, NegativeIntensity, ParseError,
                         downsample, export_map, load_budget, load_map, load_model, load_raster,
                         save_raster, synthetic_population, write_ascii_grid)
from stochcut.model import GaussianHotspots, InverseDistanceLink, RasterIntensity, hotspot_model, Hotspot
from stochcut.planner import fsl

HEADER = "ncols {c}\nnrows {r}\nxllcorner 0\nyllcorner 0\ncellsize {s}\nNODATA_value -9999\n"


def write(path, text):
    path.write_text(text)
    return path


def test_load_small_raster(tmp_path):
    f = load_raster(write(tmp_path / "a.asc", HEADER.format(c=2, r=2, s=1) + "1 2\n3 4\n"))
    assert f.total_mass(f.extent) == 10.0
    # first file row is the north edge
    assert f.values(0.5, 1.5) == 1.0 and f.values(1.5, 0.5) == 4.0


def test_nodata_becomes_zero(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        f = load_raster(write(tmp_path / "a.asc", HEADER.format(c=2, r=1, s=1) + "-9999 2\n"))
    assert f.values(0.5, 0.5) == 0.0 and f.values(1.5, 0.5) == 2.0
    assert "no-data" in caplog.text


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError) as err:
        load_raster(write(tmp_path / "a.asc", HEADER.format(c=2, r=2, s=1) + "1 2\n3 x4\n"))
    assert (err.value.line, err.value.column) == (8, 2)
    with pytest.raises(ParseError) as err:
        load_raster(write(tmp_path / "b.asc", "ncols 2\nrows 2\n"))
    assert err.value.line == 2
    with pytest.raises(MissingValues):
        load_raster(write(tmp_path / "c.asc", HEADER.format(c=2, r=2, s=1) + "1 2\n3\n"))
    with pytest.raises(NegativeIntensity):
        load_raster(write(tmp_path / "d.asc", HEADER.format(c=2, r=1, s=1) + "1 -2\n"))
    with pytest.raises(FileNotFoundError):
        load_raster(tmp_path / "missing.asc")


def test_downsample_examples():
    rng = np.random.default_rng(2)
    f = RasterIntensity(rng.random((5, 7)), 1.0)
    assert downsample(f, 1) is f
    d = downsample(RasterIntensity(np.ones((4, 4)), 1.0), 2)
    np.testing.assert_array_equal(d.cells, np.ones((2, 2)))
    assert d.cell_size == 2.0
    big = RasterIntensity(rng.random((60, 60)) * 100, 0.5)
    d = downsample(big, 30)
    assert d.cells.shape == (2, 2)
    assert d.raw_total() == pytest.approx(big.raw_total(), rel=1e-9)
    with pytest.raises(ValueError):
        downsample(big, 0)


def test_downsample_partial_blocks():
    f = RasterIntensity(np.arange(15, dtype=float).reshape(3, 5), 1.0)
    d = downsample(f, 2)
    assert d.cells.shape == (2, 3)
    assert d.cells[0, 2] == np.mean([4, 9])
    assert d.cells[1, 2] == 14.0
    assert d.cells[1, 0] == np.mean([10, 11])


def test_full_size_raster_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    vals = rng.integers(0, 50, (3120, 7080)).astype(float)
    path = tmp_path / "usa.asc"
    with open(path, "w") as fh:
        fh.write(HEADER.format(c=7080, r=3120, s=1))
        np.savetxt(fh, vals, fmt="%d")
    f = load_raster(path)
    assert f.cells.shape == (3120, 7080)
    d = downsample(f, 30)
    assert d.cells.shape == (104, 236)
    assert d.raw_total() == pytest.approx(vals.sum(), rel=1e-9)


def test_raster_save_load_bit_exact(tmp_path):
    f = RasterIntensity(np.random.default_rng(4).random((6, 9)) * 1e3, 0.1, origin=(-3.3, 2.7))
    save_raster(f, tmp_path / "r.asc")
    g = load_raster(tmp_path / "r.asc")
    np.testing.assert_array_equal(g.cells, f.cells)
    assert (g.cell_size, tuple(g.origin)) == (0.1, (-3.3, 2.7))


@pytest.fixture(scope="module")
def small_map():
    m = hotspot_model(Rectangle(0, 4, 0, 3), [Hotspot(1.8, 1.4, 10, 0.5)], link=InverseDistanceLink())
    return fsl(m, 0.9, AccuracyBudget(1.0, c0=1.0), delta=0.2)


def test_export_csv_round_trip(tmp_path, small_map):
    export_map(small_map, tmp_path / "m.csv")
    t = load_map(tmp_path / "m.csv")
    np.testing.assert_array_equal(t.tec, small_map.values.ravel())
    np.testing.assert_array_equal(t.x, small_map.centers.px)
    np.testing.assert_array_equal(t.y, small_map.centers.py)


def test_export_ascii_round_trip(tmp_path, small_map):
    export_map(small_map, tmp_path / "m.asc", "ascii")
    t = load_map(tmp_path / "m.asc")
    assert t.shape == small_map.values.shape
    np.testing.assert_array_equal(t.tec, small_map.values.ravel())
    np.testing.assert_allclose(t.x, small_map.centers.px, rtol=1e-15)
    np.testing.assert_allclose(t.y, small_map.centers.py, rtol=1e-15)


def test_one_point_map_is_two_lines(tmp_path):
    m = hotspot_model(Rectangle(0, 2, 0, 2), [Hotspot(1, 1, 5, 0.5)])
    smap = fsl(m, 0.9, AccuracyBudget(1.0, c0=1.0), delta=0.2)
    assert smap.values.size == 1
    export_map(smap, tmp_path / "one.csv")
    lines = (tmp_path / "one.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[0] == "x,y,tec"


def test_export_to_bad_path(small_map, tmp_path):
    with pytest.raises(IoError):
        export_map(small_map, tmp_path / "no" / "such" / "dir.csv")
    with pytest.raises(ValueError):
        export_map(small_map, tmp_path / "x.bin", "binary")


CONFIG = """
[rec]
xmin = 0
xmax = 6
ymin = 0
ymax = 5

[intensity]
kind = hotspots
hotspot1 = 2.0 2.5 20 0.6
hotspot2 = 4.5 2.0 5 0.5
background = 0.2

[link]
kind = inverse_distance
kappa = 1.0

[capacity]
kind = constant
value = 2.0

[budget]
c0 = 4.0
"""


def test_load_model_and_budget(tmp_path):
    path = write(tmp_path / "m.ini", CONFIG)
    m = load_model(path)
    assert m.rec == Rectangle(0, 6, 0, 5)
    assert isinstance(m.intensity, GaussianHotspots) and len(m.intensity.hotspots) == 2
    assert m.expected_capacity((0, 0), (4, 0)) == 0.5
    b = load_budget(path, 0.5)
    assert (b.additive_eps, b.c0) == (0.5, 4.0)


def test_load_raster_model(tmp_path):
    write_ascii_grid(tmp_path / "pop.asc", np.ones((4, 6)), 0.0, 0.0, 1.0)
    path = write(tmp_path / "m.ini", "[intensity]\nkind = raster\npath = pop.asc\n"
                                     "downsample = 2\nscale = 0.5\n")
    m = load_model(path)
    assert m.rec == Rectangle(0, 6, 0, 4)
    assert m.intensity.cells.shape == (2, 3)
    assert m.expected_nodes() == 12.0


@pytest.mark.parametrize("text", [
    "[rec]\nxmin=0\nxmax=1\nymin=0\nymax=1\n",
    "[intensity]\nkind = homogeneous\nrate = 1\n",
    "[intensity]\nkind = fractal\n[rec]\nxmin=0\nxmax=1\nymin=0\nymax=1\n",
    "[intensity]\nrate = abc\n[rec]\nxmin=0\nxmax=1\nymin=0\nymax=1\n",
    "[intensity]\nrate = 1\n[rec]\nxmin=0\nxmax=1\nymin=0\nymax=1\n[link]\nkind = teleport\n",
    "[intensity]\nrate = 1\n[rec]\nxmin=2\nxmax=1\nymin=0\nymax=1\n",
    "not an ini file",
])
def test_config_errors(tmp_path, text):
    with pytest.raises(ConfigError):
        load_model(write(tmp_path / "bad.ini", text))


def test_missing_raster_is_io_error(tmp_path):
    with pytest.raises(IoError):
        load_model(write(tmp_path / "m.ini", "[intensity]\nkind = raster\npath = nope.asc\n"))


def test_synthetic_population_shape():
    f = synthetic_population()
    assert f.shape == (104, 236) and (f >= 0).all()
    # densest cell sits in the northeast corridor
    row, col = np.unravel_index(np.argmax(f), f.shape)
    assert abs(col - 214) <= 2 and abs(row - 70) <= 2


# ---------------------------------------------------------------------------
# command line


@pytest.fixture
def config(tmp_path):
    return str(write(tmp_path / "m.ini", CONFIG))


def test_cli_edcc(config, capsys):
    assert main(["edcc", "--config", config, "--radius", "1", "--eps", "1",
                 "--cx", "2", "--cy", "2.5", "--delta", "0.25"]) == 0
    out, err = capsys.readouterr()
    res = json.loads(out)
    assert res["total"] == pytest.approx(res["alpha"] + res["beta"] + res["gamma"])
    assert res["delta"] == 0.25
    assert "implies additive eps=2" in err


def test_cli_fsl_and_rcce(config, tmp_path, capsys):
    out_csv = str(tmp_path / "map.csv")
    assert main(["fsl", "--config", config, "--radius", "1", "--eps", "1",
                 "--delta", "0.25", "--out", out_csv]) == 0
    res = json.loads(capsys.readouterr()[0])
    table = load_map(out_csv)
    assert res["tec"] == table.tec.max()
    assert main(["rcce", "--config", config, "--radius", "1", "--eps", "1", "--delta", "0.25"]) == 0
    value = json.loads(capsys.readouterr()[0])["expected_tec"]
    assert value == pytest.approx(table.tec.mean(), rel=1e-12)


def test_cli_rcce_with_psi(config, tmp_path, capsys):
    # uniform psi over Rec_r = [1, 5] x [1, 4]
    write_ascii_grid(tmp_path / "psi.asc", np.full((3, 4), 1 / 12), 1.0, 1.0, 1.0)
    assert main(["rcce", "--config", config, "--radius", "1", "--eps", "1", "--delta", "0.25",
                 "--psi", str(tmp_path / "psi.asc")]) == 0
    dens = json.loads(capsys.readouterr()[0])["expected_tec"]
    assert main(["rcce", "--config", config, "--radius", "1", "--eps", "1", "--delta", "0.25"]) == 0
    uni = json.loads(capsys.readouterr()[0])["expected_tec"]
    assert dens == pytest.approx(uni, rel=1e-12)


def test_cli_sample(config, tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sample", "--config", config, "--radius", "1", "--cx", "2", "--cy", "2.5",
                 "--n", "20", "--seed", "3", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr()[0])
    rows = out.read_text().splitlines()
    assert rows[0] == "sample,alpha,beta,gamma,total" and len(rows) == 21
    totals = [float(r.split(",")[-1]) for r in rows[1:]]
    assert summary["mean"] == pytest.approx(np.mean(totals), rel=1e-12)


def test_cli_exit_codes(config, tmp_path, capsys):
    assert main(["edcc", "--config", str(tmp_path / "none.ini"), "--radius", "1", "--eps", "1",
                 "--cx", "2", "--cy", "2"]) == 4
    bad = write(tmp_path / "bad.ini", "[intensity]\nkind = fractal\n")
    assert main(["edcc", "--config", str(bad), "--radius", "1", "--eps", "1",
                 "--cx", "2", "--cy", "2"]) == 2
    # default calibration constant asks for far too many grid points
    plain = write(tmp_path / "plain.ini", CONFIG.replace("c0 = 4.0", "const = 1.0"))
    assert main(["edcc", "--config", str(plain), "--radius", "1", "--eps", "1",
                 "--cx", "2", "--cy", "2.5"]) == 3
    assert main(["edcc", "--config", config, "--radius", "1", "--eps", "1",
                 "--cx", "0.5", "--cy", "2.5"]) == 2
    assert main(["fsl", "--config", config, "--radius", "1", "--eps", "1", "--delta", "0.25",
                 "--out", str(tmp_path / "no" / "dir.csv")]) == 4
    capsys.readouterr()


def test_console_script(config):
    proc = subprocess.run([sys.executable, "-m", "stochcut.cli", "edcc", "--config", config,
                           "--radius", "1", "--eps", "1", "--cx", "2", "--cy", "2.5",
                           "--delta", "0.3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["delta"] == 0.3
