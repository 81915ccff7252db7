from pathlib import Path

import pytest

from mortex.config import bench_grid, build_problem, load_config, parse_config
from mortex.errors import ConfigError

BENCHMARKS = Path(__file__).resolve().parents[1] / "benchmarks"

MODEL = """\
# two domains
run.name = small
domain.host.generator = structured
domain.host.extents = [0, 0, 1, 1]
domain.host.cells = [4, 4]
domain.host.E = 1
domain.host.nu = 0.3
domain.patch.generator = structured
domain.patch.extents = [0, 1, 1, 2]
domain.patch.cells = [5, 5]
domain.patch.E = 10
domain.patch.nu = 0.3
domain.patch.host = host
tying.t.patch = patch
tying.t.polyline = bottom
bc.fix.kind = dirichlet_component
bc.fix.domain = host
bc.fix.target = bottom
bc.fix.component = 1
"""


def _line_of(text, needle):
    return next(i for i, l in enumerate(text.splitlines(), 1) if l.startswith(needle))


def test_parse_model_defaults():
    cfg = parse_config(MODEL)
    assert cfg.dual == "sli-p1" and cfg.kappa == "auto" and cfg.triangulate is False
    assert cfg.run["cell_rule"] == "physical"
    assert cfg.domains["host"]["cells"] == [4, 4]
    assert cfg.lines[("domain", "patch", "host")] == _line_of(MODEL, "domain.patch.host")


def test_build_problem():
    prob = build_problem(parse_config(MODEL + "run.dual = cgi\nrun.kappa = 2\n"))
    assert list(prob.domains) == ["host", "patch"]
    assert prob.domains["patch"].material.E == 10.0


@pytest.mark.parametrize("extra,needle", [
    ("domain.host.colour = red", "unknown key"),
    ("widget.a = 1", "unknown section"),
    ("domain.host.E = 2", "duplicate key"),
    ("run.kappa = 0", "bad value"),
    ("run.dual = lagrange", "bad value"),
    ("run.triangulate = maybe", "bad value"),
    ("bc.fix.gradient = 1, 2", "bad value"),
    ("just some words", "expected"),
    ("run.a.b = 1", "take the form"),
])
def test_errors_report_line(extra, needle):
    text = MODEL + extra + "\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    msg = str(exc.value)
    assert needle in msg
    assert msg.startswith(f"line {len(text.splitlines())}:")


def test_comments_and_blank_lines_ignored():
    cfg = parse_config("\n# header\n" + MODEL.replace("= 0.3", "= 0.3   # trailing"))
    assert cfg.domains["host"]["nu"] == 0.3


@pytest.mark.parametrize("edit,needle", [
    (("domain.patch.host = host", "domain.patch.host = nowhere"), "unknown domain"),
    (("tying.t.patch = patch", "tying.t.patch = ghost"), "unknown domain"),
    (("domain.host.E = 1\n", ""), "missing 'E'"),
    (("domain.host.generator = structured", "domain.host.generator = structured\ndomain.host.mesh = h.msh"),
     "exactly one"),
])
def test_semantic_errors(edit, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(MODEL.replace(*edit))


def test_host_cycle_rejected():
    text = MODEL + "domain.host.host = patch\n"
    with pytest.raises(ConfigError):
        parse_config(text)


def test_topological_order_independent_of_text_order():
    lines = MODEL.splitlines()
    patch_first = "\n".join([l for l in lines if "patch" in l] + [l for l in lines if "patch" not in l])
    cfg = parse_config(patch_first)
    assert cfg.host_order() == ["host", "patch"]


def test_missing_mesh_file(tmp_path):
    text = MODEL.replace("domain.host.generator = structured", "domain.host.mesh = nothing.msh")
    text = "\n".join(l for l in text.splitlines() if not l.startswith(("domain.host.extents", "domain.host.cells")))
    with pytest.raises(ConfigError, match="not found"):
        parse_config(text, tmp_path)
    assert parse_config(text, tmp_path, check_files=False).domains["host"]["mesh"] == "nothing.msh"
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "absent.cfg")


def test_bench_and_model_are_exclusive():
    with pytest.raises(ConfigError):
        parse_config(MODEL + "bench.kind = eshelby\n")
    with pytest.raises(ConfigError, match="bench.kind"):
        parse_config("bench.n_mortar = [128]\n")


def test_bench_grid_product():
    cfg = parse_config("bench.kind = patch_test\nbench.case = [1, 2]\n"
                       "bench.load = [bending, compression]\nbench.triangulate = [false, true]\n"
                       "bench.distortion = 0.2\n")
    grid = bench_grid(cfg.bench)
    assert len(grid) == 8
    assert all(g["distortion"] == 0.2 and g["kind"] == "patch_test" for g in grid)
    assert len({(g["case"], g["load"], g["triangulate"]) for g in grid}) == 8


@pytest.mark.parametrize("path", sorted(BENCHMARKS.glob("*.cfg")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg.bench or cfg.domains
