import numpy as np
import pytest
from hypothesis import given, strategies as st

from aerokin.config import RunConfig, build_model, convert, mixture
from aerokin.collision import ElasticCutoff, ElasticHardSphere, InelasticDiffuse
from aerokin.distributions import GaussianMixture
from aerokin.errors import ValidationError
from aerokin.io import format_value, read_csv, read_field, write_csv, write_field


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip_through_text(x):
    assert float(format_value(x)) == x


def test_format_value_kinds():
    assert format_value(True) == "true" and format_value(np.int64(3)) == "3"
    assert format_value(None) == "" and format_value(0.1) == "0.10000000000000001"


def test_csv_round_trip(tmp_path):
    path = write_csv(tmp_path / "t.csv", ("a", "b"), [(1, 0.25), {"a": 2, "b": 1e-300}])
    header, rows = read_csv(path)
    assert header == ["a", "b"] and rows[0] == ["1", "0.25"]
    assert rows[1][0] == "2" and float(rows[1][1]) == 1e-300


def test_field_layout_x_fastest(tmp_path):
    n = 4
    u = np.random.default_rng(0).standard_normal((3, n, n, n))
    path = write_field(tmp_path / "f.bin", u)
    raw = np.frombuffer(path.read_bytes()[8:], "<f8")
    assert raw[1] == u[0, 1, 0, 0] and raw[n] == u[0, 0, 1, 0] and raw[n ** 3] == u[1, 0, 0, 0]
    np.testing.assert_array_equal(read_field(path), u)


def test_convert_kinds():
    assert convert("yes", bool, "x") is True
    assert convert("1, 2, 3", "vector", "x") == (1.0, 2.0, 3.0)
    assert convert("1,0,0 | 0,1,0", "vectors", "x") == ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    with pytest.raises(ValidationError, match="x"):
        convert("1,2", "vector", "x")


def test_build_models(tmp_path):
    for name in ("mu0.csv", "mu1.csv"):
        (tmp_path / name).write_text("0,0.1\n5,0.1\n")
    (tmp_path / "m.ini").write_text("[model]\nname = elastic-cutoff\nsigma_mu_nodes = 0, 1\n"
                                    "sigma_tables = mu0.csv, mu1.csv\n")
    cfg = RunConfig.load(tmp_path / "m.ini")
    assert isinstance(build_model(cfg), ElasticCutoff)
    assert isinstance(build_model(cfg, "elastic-hard-sphere"), ElasticHardSphere)
    assert build_model(cfg, "inelastic-diffuse", 2.0) == InelasticDiffuse(2.0)
    with pytest.raises(ValidationError):
        build_model(cfg, "soft-sphere")
    with pytest.raises(ValidationError, match="sigma_tables"):
        build_model(RunConfig(), "elastic-cutoff")


def test_mixture_from_config(tmp_path):
    (tmp_path / "p.ini").write_text("[particles]\nposition_means = 0.25,0.5,0.5 | 0.75,0.5,0.5\n"
                                    "position_sigmas = 0.05, 0.1\nposition_weights = 1, 3\n")
    mix = mixture(RunConfig.load(tmp_path / "p.ini"), "position", None)
    assert mix == GaussianMixture((1.0, 3.0), ((0.25, 0.5, 0.5), (0.75, 0.5, 0.5)), (0.05, 0.1))
    assert mixture(RunConfig(), "velocity", "fallback") == "fallback"


def test_malformed_file(tmp_path):
    (tmp_path / "bad.ini").write_text("no section header\n")
    with pytest.raises(ValidationError, match="malformed"):
        RunConfig.load(tmp_path / "bad.ini")
