import csv

import numpy as np
import pytest

from mortex import bench
from mortex.bench import (BenchReport, EshelbyConfig, PatchTestConfig, convergence_slope,
                          error_norm_interface, graded_axis, patch_test_meshes, write_convergence_csv,
                          write_profile_csv, write_report_csv)
from mortex.errors import ConfigError, GeometryError


def test_error_norm_identity():
    g = np.array([1.0, -2.0, 3.0])
    assert error_norm_interface(g, g) == 0.0


def test_error_norm_constant_offset():
    R0, c = 2.0, 0.1
    assert error_norm_interface(np.full(7, R0 + c), np.full(7, R0)) == pytest.approx(c / R0, rel=1e-14)


def test_error_norm_scale_invariant():
    rng = np.random.default_rng(0)
    f, g = rng.normal(size=10), rng.normal(size=10)
    assert error_norm_interface(3.5 * f, 3.5 * g) == pytest.approx(error_norm_interface(f, g), rel=1e-14)


@pytest.mark.parametrize("f,g", [([], []), ([1.0], [1.0, 2.0]), ([1.0], [0.0])])
def test_error_norm_rejects(f, g):
    with pytest.raises(ValueError):
        error_norm_interface(f, g)


def test_convergence_slope_recovers_power():
    n = np.array([128, 256, 512, 1024])
    assert convergence_slope(n, 3.0 / n) == pytest.approx(1.0, abs=1e-12)
    assert convergence_slope(n, 0.5 / n ** 2) == pytest.approx(2.0, abs=1e-12)


def test_graded_axis():
    x = graded_axis(5.0, 0.3, 0.05)
    assert x[0] == -5.0 and x[-1] == 5.0
    assert np.allclose(x, -x[::-1])
    d = np.diff(x)
    assert np.all(d > 0)
    core = np.abs(0.5 * (x[1:] + x[:-1])) < 0.3
    assert np.allclose(d[core], 0.05)
    # the origin is a cell centre
    assert not np.any(np.isclose(x, 0.0))
    # neighbouring cells grow by at most the growth factor, except the
    # remainder cell at each end
    r = d[2:-1] / d[1:-2]
    assert np.max(np.maximum(r, 1 / r)) < 1.15 + 1e-9
    with pytest.raises(GeometryError):
        graded_axis(1.0, 2.0, 0.1)


def test_patch_meshes_geometry():
    patch, host = patch_test_meshes(1, "distorted")
    assert (patch.n_elements, host.n_elements) == (191 * 38, 17 * 4)
    assert patch.coords[:, 1].min() == pytest.approx(1.0)
    assert host.coords[:, 1].max() == pytest.approx(1.25)
    tri = patch_test_meshes(2, "triangles")[1]
    assert {e.kind for e in tri.elements} == {"T3"}


@pytest.mark.parametrize("kw", [dict(case=3), dict(load="shear"), dict(host_type="hex"),
                                dict(distortion=0.5)])
def test_patch_config_validation(kw):
    with pytest.raises(ConfigError):
        PatchTestConfig(**kw)


def test_eshelby_config_validation():
    with pytest.raises(ConfigError):
        EshelbyConfig(n_mortar=4)
    with pytest.raises(ConfigError):
        EshelbyConfig(L=0.2)


def test_default_poisson_ratio_per_load():
    assert PatchTestConfig(load="bending").nu == 0.0
    assert PatchTestConfig(load="compression").nu == 0.3


def test_report_csv(tmp_path):
    a = BenchReport("x", {"b": 1, "a": "s"}, {"E_r": 0.5, "N_m": 4.0})
    write_report_csv([a], tmp_path / "r.csv")
    rows = list(csv.DictReader(open(tmp_path / "r.csv")))
    assert [r["metric"] for r in rows] == ["E_r", "N_m"]
    assert rows[0]["config"] == "a=s;b=1"
    assert float(rows[0]["value"]) == 0.5


def test_profile_and_convergence_csv(tmp_path):
    write_profile_csv({"node": np.arange(3), "v": np.array([0.1, 0.2, 0.3])}, tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "node,v" and lines[1].startswith("0,1.0")
    rows = [{"N_m": 8, "h_norm": 0.125, "E_r": 0.01, "scheme": "cgi", "kappa": 2, "triangulated": False}]
    write_convergence_csv(rows, tmp_path / "c.csv")
    out = list(csv.DictReader(open(tmp_path / "c.csv")))
    assert out[0]["scheme"] == "cgi" and float(out[0]["E_r"]) == 0.01


def test_eshelby_grid_hits_contrast():
    s = bench.eshelby_setup(EshelbyConfig(n_mortar=128))
    assert s.n_mortar == 128
    assert abs(s.mesh_contrast / 6.0 - 1.0) < 0.1


def test_eshelby_report_is_deterministic():
    cfg = EshelbyConfig(n_mortar=64, scheme="cgi", kappa=8)
    a = bench.EshelbySetup(cfg).run("cgi", 8)
    b = bench.EshelbySetup(cfg).run("cgi", 8)
    assert a.metrics == b.metrics
    for k in a.profiles["interface"]:
        assert np.array_equal(a.profiles["interface"][k], b.profiles["interface"][k])


def test_unknown_example():
    with pytest.raises(ConfigError):
        bench.run_example("tower")
