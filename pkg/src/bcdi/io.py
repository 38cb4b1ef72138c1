"""Binary pattern file format and run-configuration parsing.

Pattern files ("BCDI" format, version 1) hold one float64 row-major grid
with a 24-byte little-endian header:

    magic  4s   b"BCDI"
    version u16  1
    flags   u16  0
    width   u32
    height  u32
    domain  u8   0 = pattern, 1 = object, 2 = autocorrelation
    reserved 7 bytes

Run configs are INI documents with sections [spectrum], [phantom],
[solver], [retrieval], [io]; unknown sections or keys are hard errors.
"""

import configparser
import struct

import numpy as np

from .retrieval import RetrievalConfig
from .solver import SolverConfig
from .spectrum import Spectrum, continuous_spectrum, harmonics_spectrum

MAGIC = b"BCDI"
VERSION = 1
_HEADER = struct.Struct("<4sHHIIB7x")

DOMAIN_PATTERN = 0
DOMAIN_OBJECT = 1
DOMAIN_AUTOCORRELATION = 2


class ConfigError(ValueError):
    """Invalid or unknown configuration content (CLI exit code 2)."""


class FormatError(IOError):
    """Malformed or unsupported pattern file (CLI exit code 3)."""


def write_pattern(path, grid, domain=DOMAIN_PATTERN):
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise ValueError("pattern files hold 2-D grids")
    height, width = grid.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, 0, width, height, domain))
        fh.write(grid.astype("<f8").tobytes())


def read_pattern(path):
    """Returns (grid, domain). Bit-exact round trip with write_pattern."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        magic, version, _flags, width, height, domain = _HEADER.unpack(header)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise FormatError(f"{path}: unsupported format version {version}")
        payload = fh.read(8 * width * height)
        if len(payload) != 8 * width * height:
            raise FormatError(f"{path}: truncated payload")
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after payload")
    grid = np.frombuffer(payload, dtype="<f8").reshape(height, width).copy()
    return grid, domain


_SCHEMA = {
    "spectrum": {"type", "orders", "weights", "center", "bandwidth", "points",
                 "ratios", "normalize"},
    "phantom": {"name", "file", "extent", "embed"},
    "solver": {"mode", "alpha", "dt", "friction", "max_iter", "residual_tol",
               "projection", "precondition"},
    "retrieval": {"algorithm", "beta", "iterations", "shrinkwrap_interval",
                  "shrinkwrap_sigma", "sigma_decay", "sigma_min",
                  "shrinkwrap_threshold", "support_threshold", "real_object",
                  "positivity", "restarts"},
    "io": {"input", "reference", "output_dir", "seed"},
}


def _floats(text):
    return [float(t) for t in text.replace(",", " ").split()]


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def load_config(path):
    """Parse and validate a run config; returns a plain nested dict of
    strings (typed accessors below build the actual objects)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise FormatError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    cfg = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        allowed = _SCHEMA[section]
        cfg[section] = {}
        for key, value in parser.items(section):
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            cfg[section][key] = value
    return cfg


def spectrum_from_config(cfg):
    """Build a Spectrum from the [spectrum] section; the three accepted
    forms are harmonics {orders, weights}, continuous {center, bandwidth,
    points}, and an explicit {ratios, weights} table."""
    try:
        sec = dict(cfg["spectrum"])
    except KeyError:
        raise ConfigError("config needs a [spectrum] section")
    kind = sec.pop("type", None)
    normalize = _bool(sec.pop("normalize", "false"))
    try:
        if kind == "harmonics":
            spec = harmonics_spectrum([int(v) for v in _floats(sec.pop("orders"))],
                                      _floats(sec.pop("weights")))
        elif kind == "continuous":
            spec = continuous_spectrum(float(sec.pop("center")),
                                       float(sec.pop("bandwidth")),
                                       int(sec.pop("points")))
        elif kind == "table":
            spec = Spectrum(np.array(_floats(sec.pop("ratios"))),
                            np.array(_floats(sec.pop("weights"))))
        else:
            raise ConfigError(f"spectrum type must be harmonics|continuous|table, got {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"spectrum type {kind!r} is missing key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid spectrum: {exc}") from exc
    if sec:
        raise ConfigError(f"keys {sorted(sec)} do not apply to spectrum type {kind!r}")
    if normalize:
        spec = spec.scaled(1.0 / spec.total_weight)
    return spec


def solver_from_config(cfg):
    sec = cfg.get("solver", {})
    kwargs = {}
    for key, conv in (("mode", str), ("alpha", float), ("dt", float),
                      ("friction", float), ("max_iter", int),
                      ("residual_tol", float)):
        if key in sec:
            kwargs[key] = conv(sec[key])
    for key in ("projection", "precondition"):
        if key in sec:
            kwargs[key] = _bool(sec[key])
    try:
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid solver config: {exc}") from exc


def retrieval_from_config(cfg, seed=0):
    sec = cfg.get("retrieval", {})
    kwargs = {"seed": seed}
    for key, conv in (("algorithm", str), ("beta", float), ("iterations", int),
                      ("shrinkwrap_interval", int), ("shrinkwrap_sigma", float),
                      ("sigma_decay", float), ("sigma_min", float),
                      ("shrinkwrap_threshold", float), ("support_threshold", float)):
        if key in sec:
            kwargs[key] = conv(sec[key])
    for key in ("real_object", "positivity"):
        if key in sec:
            kwargs[key] = _bool(sec[key])
    restarts = int(sec.get("restarts", 8))
    try:
        return RetrievalConfig(**kwargs), restarts
    except ValueError as exc:
        raise ConfigError(f"invalid retrieval config: {exc}") from exc
