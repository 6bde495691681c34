"""Raster grids, sensitivity-map export and model config files.

Rasters use the six-line ESRI ASCII grid header::

    ncols 4
    nrows 3
    xllcorner 0.0
    yllcorner 0.0
    cellsize 1.0
    NODATA_value -9999

followed by ``nrows`` lines of values, northernmost row first.
"""
from __future__ import annotations

import configparser
import csv
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Rectangle
from .grid import AccuracyBudget
from .model import (ConstantCapacity, ConstantLink, GaussianHotspots, HomogeneousIntensity,
                    Hotspot, InverseDistanceLink, RasterIntensity, StochasticNetworkModel)

log = logging.getLogger(__name__)

HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")
NODATA = -9999.0


class ParseError(ValueError):
    def __init__(self, msg, path=None, line=None, column=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f":{column}"
            where += ": "
        super().__init__(where + msg)
        self.path, self.line, self.column = path, line, column


class NegativeIntensity(ValueError):
    pass


class MissingValues(ValueError):
    pass


class ConfigError(ValueError):
    pass


class IoError(OSError):
    pass


@dataclass
class RasterFile:
    ncols: int
    nrows: int
    xllcorner: float
    yllcorner: float
    cellsize: float
    nodata: float
    values: np.ndarray  # as stored in the file: row 0 is the northernmost


def read_ascii_grid(path) -> RasterFile:
    path = Path(path)
    with open(path) as fh:
        header = {}
        for lineno in range(1, 7):
            line = fh.readline()
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"expected 'key value' header line, got {line.strip()!r}",
                                 path, lineno, 1)
            key = parts[0].lower()
            if key not in HEADER_KEYS:
                raise ParseError(f"unknown header key {parts[0]!r}", path, lineno, 1)
            try:
                header[key] = float(parts[1])
            except ValueError:
                raise ParseError(f"bad number {parts[1]!r}", path, lineno,
                                 line.index(parts[1]) + 1) from None
        body = fh.read()
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise ParseError(f"missing header keys {missing}", path)
    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    # fast path; on any mismatch rescan token by token to locate the problem
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            vals = np.fromstring(body, dtype=float, sep=" ")
    except (DeprecationWarning, ValueError):
        vals = None
    if vals is None or vals.size != ncols * nrows:
        n = 0
        for lineno, line in enumerate(body.splitlines(), start=7):
            for col, tok in enumerate(line.split(), start=1):
                try:
                    float(tok)
                except ValueError:
                    raise ParseError(f"bad number {tok!r}", path, lineno, col) from None
                n += 1
        raise MissingValues(f"{path}: expected {ncols * nrows} values, found {n}")
    return RasterFile(ncols, nrows, header["xllcorner"], header["yllcorner"],
                      header["cellsize"], header["nodata_value"], vals.reshape(nrows, ncols))


def write_ascii_grid(path, values_north_first, xll, yll, cellsize, nodata=NODATA, fmt=".17g"):
    values = np.asarray(values_north_first, dtype=float)
    nrows, ncols = values.shape
    with open(path, "w") as fh:
        fh.write(f"ncols {ncols}\nnrows {nrows}\nxllcorner {xll!r}\nyllcorner {yll!r}\n"
                 f"cellsize {cellsize!r}\nNODATA_value {nodata:g}\n")
        for row in values:
            fh.write(" ".join(format(v, fmt) for v in row))
            fh.write("\n")


def load_raster(path) -> RasterIntensity:
    """Intensity field from an ASCII grid; no-data cells become zero."""
    rf = read_ascii_grid(path)
    vals = rf.values.copy()
    nodata = np.isclose(vals, rf.nodata, rtol=0, atol=1e-12)
    if nodata.any():
        log.warning("%s: %d no-data cells set to zero intensity", path, int(nodata.sum()))
        vals[nodata] = 0.0
    if (vals < 0).any():
        i, j = np.argwhere(vals < 0)[0]
        raise NegativeIntensity(f"{path}: negative intensity {vals[i, j]} at row {i + 1}, col {j + 1}")
    return RasterIntensity(vals[::-1], rf.cellsize, (rf.xllcorner, rf.yllcorner))


def save_raster(field: RasterIntensity, path, fmt=".17g"):
    write_ascii_grid(path, field.cells[::-1], field.origin.x, field.origin.y,
                     field.cell_size, NODATA, fmt)


def downsample(field: RasterIntensity, block: int) -> RasterIntensity:
    """Block means over ``block`` x ``block`` cells.

    Partial blocks at the north and east edges average the cells present.
    """
    if block < 1:
        raise ValueError("block must be at least 1")
    if block == 1:
        return field
    v = field.cells
    nr, nc = v.shape
    rb, cb = -(-nr // block), -(-nc // block)
    padded = np.zeros((rb * block, cb * block))
    count = np.zeros_like(padded)
    padded[:nr, :nc] = v
    count[:nr, :nc] = 1.0
    sums = padded.reshape(rb, block, cb, block).sum(axis=(1, 3))
    counts = count.reshape(rb, block, cb, block).sum(axis=(1, 3))
    return RasterIntensity(sums / counts, field.cell_size * block, field.origin)


# ---------------------------------------------------------------------------
# sensitivity maps


@dataclass(frozen=True)
class MapTable:
    """Exported map read back: center coordinates and TEC values, row-major."""
    x: np.ndarray
    y: np.ndarray
    tec: np.ndarray
    shape: tuple[int, int] | None = None


def export_map(smap, path, fmt: str = "csv"):
    """Write a sensitivity map as ``csv`` (x,y,tec rows) or ``ascii`` grid."""
    try:
        if fmt == "csv":
            c = smap.centers
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["x", "y", "tec"])
                for x, y, v in zip(c.px, c.py, smap.values.ravel()):
                    w.writerow([format(x, ".17g"), format(y, ".17g"), format(v, ".17g")])
        elif fmt in ("ascii", "rasterAscii", "raster"):
            rec = smap.rec_r
            write_ascii_grid(path, smap.values[::-1], rec.xmin, rec.ymin, smap.delta)
        else:
            raise ValueError(f"unknown map format {fmt!r}")
    except OSError as exc:
        raise IoError(str(exc)) from exc


def load_map(path) -> MapTable:
    """Read a map written by :func:`export_map` (format sniffed from the first line)."""
    with open(path) as fh:
        first = fh.readline().strip()
    if first == "x,y,tec":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        arr = np.array([[float(a) for a in r] for r in rows]).reshape(-1, 3)
        return MapTable(arr[:, 0], arr[:, 1], arr[:, 2])
    rf = read_ascii_grid(path)
    vals = rf.values[::-1]
    xs = rf.xllcorner + (np.arange(rf.ncols) + 0.5) * rf.cellsize
    ys = rf.yllcorner + (np.arange(rf.nrows) + 0.5) * rf.cellsize
    X, Y = np.meshgrid(xs, ys)
    return MapTable(X.ravel(), Y.ravel(), vals.ravel(), vals.shape)


# ---------------------------------------------------------------------------
# model config


def _floats(section, key, n=None):
    raw = section.get(key)
    try:
        vals = [float(t) for t in raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: expected numbers, got {raw!r}") from None
    if n is not None and len(vals) != n:
        raise ConfigError(f"[{section.name}] {key}: expected {n} numbers, got {len(vals)}")
    return vals


def _get_float(section, key, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"[{section.name}] missing key {key!r}")
        return default
    try:
        return section.getfloat(key)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: not a number: {section[key]!r}") from None


def parse_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cp


def load_model(path) -> StochasticNetworkModel:
    """Build a model from a config file.

    Sections ``[intensity]``, ``[link]``, ``[capacity]`` and optional
    ``[rec]``, ``[bounds]``; relative raster paths resolve against the
    config file's directory.
    """
    path = Path(path)
    cp = parse_config(path)
    if "intensity" not in cp:
        raise ConfigError(f"{path}: missing [intensity] section")
    sec = cp["intensity"]
    kind = sec.get("kind", "homogeneous")
    if kind == "homogeneous":
        intensity = HomogeneousIntensity(_get_float(sec, "rate"))
    elif kind == "hotspots":
        spots = []
        for key in sorted(k for k in sec if k.startswith("hotspot")):
            x, y, mass, sigma = _floats(sec, key, 4)
            spots.append(Hotspot(x, y, mass, sigma))
        if not spots:
            raise ConfigError(f"{path}: [intensity] kind=hotspots needs hotspotN = x y mass sigma")
        intensity = GaussianHotspots(tuple(spots), _get_float(sec, "background", 0.0))
    elif kind == "raster":
        if "path" not in sec:
            raise ConfigError(f"{path}: [intensity] kind=raster needs path")
        rpath = Path(sec["path"])
        if not rpath.is_absolute():
            rpath = path.parent / rpath
        if not rpath.exists():
            raise IoError(f"raster file {rpath} does not exist")
        intensity = load_raster(rpath)
        block = int(_get_float(sec, "downsample", 1.0))
        if block < 1:
            raise ConfigError(f"{path}: downsample block must be >= 1")
        intensity = downsample(intensity, block)
        scale = _get_float(sec, "scale", 1.0)
        if scale != 1.0:
            intensity = RasterIntensity(intensity.cells * scale, intensity.cell_size, intensity.origin)
    else:
        raise ConfigError(f"{path}: unknown intensity kind {kind!r}")

    if "rec" in cp:
        s = cp["rec"]
        try:
            rec = Rectangle(_get_float(s, "xmin"), _get_float(s, "xmax"),
                            _get_float(s, "ymin"), _get_float(s, "ymax"))
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    elif isinstance(intensity, RasterIntensity):
        rec = intensity.extent
    else:
        raise ConfigError(f"{path}: missing [rec] section")

    link = ConstantLink()
    if "link" in cp:
        s = cp["link"]
        lk = s.get("kind", "constant")
        if lk == "constant":
            link = ConstantLink(_get_float(s, "probability", 1.0))
        elif lk in ("inverse_distance", "inverse-distance"):
            link = InverseDistanceLink(_get_float(s, "kappa", 1.0), _get_float(s, "floor", 1e-12))
        else:
            raise ConfigError(f"{path}: unknown link kind {lk!r}")

    capacity = ConstantCapacity()
    if "capacity" in cp:
        s = cp["capacity"]
        ck = s.get("kind", "constant")
        if ck != "constant":
            raise ConfigError(f"{path}: only constant capacity can be given in a config file")
        capacity = ConstantCapacity(_get_float(s, "value", 1.0))

    m = t = None
    if "bounds" in cp:
        s = cp["bounds"]
        if "m" in s:
            m = _get_float(s, "m")
        if "t" in s:
            t = _get_float(s, "t")
    try:
        return StochasticNetworkModel(rec, intensity, link, capacity, m, t)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_budget(path, eps: float) -> AccuracyBudget:
    """Accuracy budget with ``eps`` and optional ``[budget]`` overrides from the config."""
    cp = parse_config(path)
    kw = {}
    if "budget" in cp:
        s = cp["budget"]
        if "c0" in s:
            kw["c0"] = _get_float(s, "c0")
        if "mode" in s:
            kw["mode"] = s["mode"]
        if "multiplicative_eps" in s:
            kw["multiplicative_eps"] = _get_float(s, "multiplicative_eps")
        if "const" in s:
            kw["const"] = _get_float(s, "const")
    try:
        return AccuracyBudget(eps, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def synthetic_population(nrows: int = 104, ncols: int = 236, seed: int = 7) -> np.ndarray:
    """Population-like density raster (south row first) with a dominant northeast corridor.

    A handful of Gaussian metro areas of very different weight on a thin
    rural background, plus a zero-density "ocean" margin on the east and
    west.  Geometry is in cell units of the grid.
    """
    rng = np.random.default_rng(seed)
    sx, sy = ncols / 236.0, nrows / 104.0
    y, x = np.mgrid[0:nrows, 0:ncols] + 0.5
    # (x, y, peak, sigma) in full-resolution cell units
    metros = [
        (214, 70, 900.0, 3.0),   # dense northeast corridor core
        (206, 64, 350.0, 3.5),
        (220, 76, 300.0, 3.0),
        (198, 58, 200.0, 3.5),
        (22, 45, 300.0, 4.0),    # west coast south
        (16, 66, 120.0, 3.5),    # west coast middle
        (14, 96, 110.0, 3.0),    # northwest
        (150, 72, 220.0, 3.5),   # great lakes
        (120, 22, 120.0, 4.0),   # south central
        (182, 18, 90.0, 4.0),    # southeast
    ]
    f = np.full((nrows, ncols), 2.0) * (1 + 0.3 * rng.random((nrows, ncols)))
    for mx, my, peak, sig in metros:
        f += peak * np.exp(-(((x - mx * sx) / (sig * sx)) ** 2 + ((y - my * sy) / (sig * sy)) ** 2) / 2)
    coast_w = x < 6 * sx + 4 * sx * np.sin(y / (9 * sy))
    coast_e = x > ncols - 6 * sx - 5 * sx * np.cos(y / (11 * sy))
    f[coast_w | coast_e] = 0.0
    return f


__all__ = [
    "ConfigError", "IoError", "MapTable", "MissingValues", "NegativeIntensity", "ParseError",
    "RasterFile", "downsample", "export_map", "load_budget", "load_map", "load_model",
    "load_raster", "read_ascii_grid", "save_raster", "synthetic_population", "write_ascii_grid",
]
