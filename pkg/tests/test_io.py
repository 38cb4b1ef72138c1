import struct

import numpy as np
import pytest

from bcdi.io import (DOMAIN_AUTOCORRELATION, DOMAIN_OBJECT, DOMAIN_PATTERN,
                     MAGIC, ConfigError, FormatError, load_config,
                     read_pattern, retrieval_from_config, solver_from_config,
                     spectrum_from_config, write_pattern)


def test_pattern_roundtrip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    grid = rng.standard_normal((13, 7))  # includes negatives, non-square
    grid[0, 0] = 1e-308  # subnormal-adjacent value survives too
    path = tmp_path / "p.bcdi"
    write_pattern(path, grid, DOMAIN_AUTOCORRELATION)
    back, domain = read_pattern(path)
    assert back.dtype == np.float64
    assert np.array_equal(back, grid)
    assert domain == DOMAIN_AUTOCORRELATION


def test_pattern_domains(tmp_path):
    for domain in (DOMAIN_PATTERN, DOMAIN_OBJECT, DOMAIN_AUTOCORRELATION):
        path = tmp_path / f"d{domain}.bcdi"
        write_pattern(path, np.ones((2, 2)), domain)
        assert read_pattern(path)[1] == domain


def test_write_rejects_non_2d(tmp_path):
    with pytest.raises(ValueError):
        write_pattern(tmp_path / "x.bcdi", np.ones(4))


def test_read_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.bcdi"
    write_pattern(path, np.ones((2, 2)))
    raw = bytearray(path.read_bytes())
    raw[:4] = b"JUNK"
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="magic"):
        read_pattern(path)


def test_read_rejects_wrong_version(tmp_path):
    path = tmp_path / "v9.bcdi"
    header = struct.pack("<4sHHIIB7x", MAGIC, 9, 0, 2, 2, 0)
    path.write_bytes(header + bytes(32))
    with pytest.raises(FormatError, match="version"):
        read_pattern(path)


def test_read_rejects_truncation_and_trailing(tmp_path):
    path = tmp_path / "t.bcdi"
    write_pattern(path, np.ones((4, 4)))
    raw = path.read_bytes()
    path.write_bytes(raw[:10])
    with pytest.raises(FormatError, match="header"):
        read_pattern(path)
    path.write_bytes(raw[:-8])
    with pytest.raises(FormatError, match="payload"):
        read_pattern(path)
    path.write_bytes(raw + b"\x00")
    with pytest.raises(FormatError, match="trailing"):
        read_pattern(path)


def write_config(tmp_path, text):
    path = tmp_path / "run.ini"
    path.write_text(text)
    return path


def test_load_config_sections_and_comments(tmp_path):
    path = write_config(tmp_path, """
[spectrum]
type = harmonics      # inline comment
orders = 1 2
weights = 0.5 0.5

[solver]
max_iter = 40
""")
    cfg = load_config(path)
    assert cfg["spectrum"]["type"] == "harmonics"
    assert cfg["solver"]["max_iter"] == "40"


def test_load_config_rejects_unknown_section(tmp_path):
    path = write_config(tmp_path, "[telescope]\nfocal = 2\n")
    with pytest.raises(ConfigError, match="section"):
        load_config(path)


def test_load_config_rejects_unknown_key(tmp_path):
    path = write_config(tmp_path, "[solver]\nstep_size = 0.5\n")
    with pytest.raises(ConfigError, match="step_size"):
        load_config(path)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(FormatError):
        load_config(tmp_path / "nope.ini")


def test_load_config_malformed(tmp_path):
    path = write_config(tmp_path, "no section header here\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_spectrum_from_config_harmonics(tmp_path):
    cfg = load_config(write_config(tmp_path, """
[spectrum]
type = harmonics
orders = 3 5
weights = 0.4, 0.6
"""))
    spec = spectrum_from_config(cfg)
    assert np.allclose(spec.ratios, [1.0, 5 / 3])
    assert np.allclose(spec.weights, [0.6, 0.4])


def test_spectrum_from_config_continuous(tmp_path):
    cfg = load_config(write_config(tmp_path, """
[spectrum]
type = continuous
center = 2.5
bandwidth = 0.8
points = 16
"""))
    spec = spectrum_from_config(cfg)
    assert len(spec.ratios) == 16
    assert np.isclose(spec.ratios[0], 1.0)


def test_spectrum_from_config_table_and_normalize(tmp_path):
    cfg = load_config(write_config(tmp_path, """
[spectrum]
type = table
ratios = 1.0 2.0
weights = 2.0 6.0
normalize = yes
"""))
    spec = spectrum_from_config(cfg)
    assert np.isclose(spec.total_weight, 1.0)
    assert np.allclose(spec.weights, [0.25, 0.75])


def test_spectrum_from_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="spectrum"):
        spectrum_from_config({})
    cfg = load_config(write_config(tmp_path, "[spectrum]\ntype = comb\n"))
    with pytest.raises(ConfigError, match="comb"):
        spectrum_from_config(cfg)
    cfg = load_config(write_config(tmp_path, "[spectrum]\ntype = harmonics\norders = 1 2\n"))
    with pytest.raises(ConfigError, match="missing"):
        spectrum_from_config(cfg)
    cfg = load_config(write_config(tmp_path, """
[spectrum]
type = continuous
center = 2.5
bandwidth = 0.8
points = 16
ratios = 1 2
"""))
    with pytest.raises(ConfigError, match="do not apply"):
        spectrum_from_config(cfg)


def test_solver_from_config(tmp_path):
    cfg = load_config(write_config(tmp_path, """
[solver]
mode = plain
alpha = 0.3
max_iter = 77
projection = off
"""))
    scfg = solver_from_config(cfg)
    assert scfg.mode == "plain" and scfg.alpha == 0.3
    assert scfg.max_iter == 77 and scfg.projection is False
    assert solver_from_config({}).mode == "momentum"  # defaults apply


def test_solver_from_config_invalid(tmp_path):
    cfg = load_config(write_config(tmp_path, "[solver]\nmode = quantum\n"))
    with pytest.raises(ConfigError):
        solver_from_config(cfg)


def test_retrieval_from_config(tmp_path):
    cfg = load_config(write_config(tmp_path, """
[retrieval]
algorithm = RAAR
beta = 0.85
iterations = 120
restarts = 3
positivity = no
"""))
    rcfg, restarts = retrieval_from_config(cfg, seed=11)
    assert rcfg.algorithm == "RAAR" and rcfg.beta == 0.85
    assert rcfg.iterations == 120 and rcfg.seed == 11
    assert rcfg.positivity is False
    assert restarts == 3
    _, default_restarts = retrieval_from_config({})
    assert default_restarts == 8


def test_retrieval_from_config_invalid(tmp_path):
    cfg = load_config(write_config(tmp_path, "[retrieval]\nbeta = 2.0\n"))
    with pytest.raises(ConfigError):
        retrieval_from_config(cfg)
