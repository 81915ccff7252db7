import numpy as np
import pytest

from mortex.bench import PatchTestConfig, patch_test_setup, run_pathology
from mortex.elasticity import Material
from mortex.errors import ConfigError, SolverError
from mortex.mesh import Mesh, generate_structured_mesh
from mortex.model import Domain, Problem, Tying
from mortex.solver import BoundaryCondition as BC
from mortex.solver import equilibrium_error, polyline_load

MAT = Material(200.0, 0.3)
LOADS = [BC("traction_on_polyline", "patch", "top", vector=(0.3, -1.0)),
         BC("linear_pressure_on_polyline", "patch", "right", value=0.2, gradient=(0.0, 0.5))]


def _tied(nudge=False, host_mesh=None):
    host = host_mesh or generate_structured_mesh((0, 0, 1, 1), 4, 4)
    patch = generate_structured_mesh((0, 1, 1, 2), 4, 4)
    bcs = [BC("dirichlet_component", "host", "bottom", 0),
           BC("dirichlet_component", "host", "bottom", 1)] + LOADS
    return Problem([Domain("host", host, MAT), Domain("patch", patch, MAT, host="host")],
                   [Tying("patch", "bottom")], bcs, nudge=nudge)


def _monolithic():
    m = generate_structured_mesh((0, 0, 1, 2), 4, 8)
    # right side of the upper half only, to match the patch load
    right = [n for n in m.polylines["right"].nodes if m.coords[n, 1] >= 1.0 - 1e-12]
    from mortex.mesh import Polyline
    pl = dict(m.polylines)
    pl["right_upper"] = Polyline(tuple(right))
    mm = Mesh(m.coords, [(e.kind, e.nodes) for e in m.elements], m.node_sets, pl)
    bcs = [BC("dirichlet_component", "m", "bottom", 0), BC("dirichlet_component", "m", "bottom", 1),
           BC("traction_on_polyline", "m", "top", vector=(0.3, -1.0)),
           BC("linear_pressure_on_polyline", "m", "right_upper", value=0.2, gradient=(0.0, 0.5))]
    return mm, Problem([Domain("m", mm, MAT)], [], bcs).solve("sli-p1")


def _field_at(mesh, u):
    return {tuple(np.round(x, 9)): v for x, v in zip(mesh.coords, u)}


def test_conforming_tied_equals_monolithic():
    res = _tied().solve("sli-p1")
    mm, mono = _monolithic()
    ref = _field_at(mm, mono.u("m"))
    scale = np.abs(mono.u("m")).max()
    for name in ("host", "patch"):
        mesh = res.problem.domains[name].mesh
        for x, v in zip(mesh.coords, res.u(name)):
            assert np.max(np.abs(v - ref[tuple(np.round(x, 9))])) < 1e-10 * scale


def test_tied_solve_equilibrium_and_symmetry():
    p = _tied()
    res = p.solve("sli-p1")
    assert equilibrium_error(res.solution) < 1e-9
    A, _ = p.assemble("p1").matrix()
    assert abs(A - A.T).max() < 1e-14 * abs(A).max()
    nf = p.assemble("p1").eliminated()[0].shape[0]
    assert A[nf:, nf:].nnz == 0 or abs(A[nf:, nf:]).max() == 0.0


def test_constraint_rows_vanish():
    p = _tied()
    res = p.solve("sli-p1")
    s = res.solution.system
    assert np.max(np.abs(s.B @ res.solution.x - s.g)) < 1e-12


def test_pressure_load_resultant():
    m = generate_structured_mesh((0, 0, 2.5, 1), 5, 2)
    F = polyline_load(m, "top", BC("pressure_on_polyline", "m", "top", value=1.0))
    assert F.sum(axis=0) == pytest.approx([0.0, -2.5], abs=1e-14)


def test_linear_pressure_resultant():
    l, s0 = 5.0, 1.0
    m = generate_structured_mesh((0, 0, l, 1), 10, 2)
    bc = BC("linear_pressure_on_polyline", "m", "bottom", value=s0, gradient=(-2 * s0 / l, 0.0))
    F = polyline_load(m, "bottom", bc)
    # p = s0 (1 - 2x/l) integrates to zero force, moment -s0 l^2 / 6 about the origin
    assert F.sum(axis=0) == pytest.approx([0.0, 0.0], abs=1e-14)
    assert np.sum(m.coords[:, 0] * F[:, 1]) == pytest.approx(-s0 * l * l / 6, rel=1e-13)


def test_rigid_translation_gives_zero_multipliers():
    host = generate_structured_mesh((0, 0, 1, 1), 4, 4)
    patch = generate_structured_mesh((0, 1, 1, 2), 3, 5)
    bcs = [BC("dirichlet_component", "host", "bottom", 0, 0.02),
           BC("dirichlet_component", "host", "bottom", 1, -0.01)]
    p = Problem([Domain("host", host, MAT), Domain("patch", patch, MAT, host="host")],
                [Tying("patch", "bottom")], bcs)
    for scheme in ("sli-p0", "sli-p1", "cgi"):
        res = p.solve(scheme, 2 if scheme == "cgi" else None)
        assert np.max(np.abs(res.solution.lam_full)) < 1e-12 * MAT.E  # round-off of K u
        assert np.allclose(res.u("patch"), [0.02, -0.01], atol=1e-14)


def test_kappa_one_is_bitwise_sli():
    s = patch_test_setup(PatchTestConfig(case=1, load="compression", host_type="distorted"))
    assert s.problem.cgi_transformation(1) is None
    a = s.problem.solve("sli-p1")
    b = s.problem.solve("cgi", 1)
    assert np.array_equal(a.solution.x, b.solution.x)
    assert np.array_equal(a.solution.lam_full, b.solution.lam_full)


def test_cgi_condensed_rows_vanish_and_stay_symmetric():
    s = patch_test_setup(PatchTestConfig(case=1, load="compression", host_type="distorted"))
    res = s.problem.solve("cgi", 12)
    sy = res.solution.system
    assert sy.T is not None
    assert np.max(np.abs(sy.B @ res.solution.x - sy.g)) < 1e-10 * np.abs(sy.B).max()
    A, _ = sy.matrix()
    assert abs(A - A.T).max() < 1e-14 * abs(A).max()
    # slaves follow the masters through the interpolation matrix
    lam = res.solution.lam_full
    assert np.allclose(sy.T @ np.linalg.lstsq(sy.T.toarray(), lam, rcond=None)[0], lam)
    assert equilibrium_error(res.solution) < 1e-9


def test_relabelled_host_gives_same_field():
    base = generate_structured_mesh((0, 0, 1, 1), 4, 4)
    rng = np.random.default_rng(0)
    perm = rng.permutation(base.n_nodes)              # new id of old node
    inv = np.argsort(perm)
    coords = base.coords[inv]
    els = [(e.kind, tuple(int(perm[n]) for n in e.nodes)) for e in base.elements]
    sets = {k: [int(perm[n]) for n in v] for k, v in base.node_sets.items()}
    relabelled = Mesh(coords, els, sets, {})
    a = _tied().solve("sli-p1")
    b = _tied(host_mesh=relabelled).solve("sli-p1")
    assert np.allclose(b.u("host")[perm], a.u("host"), rtol=0, atol=1e-13)
    assert np.allclose(b.u("patch"), a.u("patch"), rtol=0, atol=1e-13)


def test_missing_support_is_singular():
    host = generate_structured_mesh((0, 0, 1, 1), 2, 2)
    p = Problem([Domain("host", host, MAT)], [],
                [BC("traction_on_polyline", "host", "top", vector=(0.0, 1.0))])
    with pytest.raises(SolverError):
        p.solve("sli-p1")


def test_problem_validation():
    host = generate_structured_mesh((0, 0, 1, 1), 2, 2)
    with pytest.raises(ConfigError):
        Problem([Domain("a", host, MAT), Domain("a", host, MAT)])
    with pytest.raises(ConfigError):
        Problem([Domain("a", host, MAT, host="nope")])
    with pytest.raises(ConfigError):
        Problem([Domain("a", host, MAT)], [Tying("a", "bottom")])
    with pytest.raises(ConfigError):
        Problem([Domain("a", host, MAT)]).solve("lagrange")
    with pytest.raises(ConfigError):
        BC("dirichlet_component", "a", "bottom", 2)


def test_cyclic_nesting_rejected():
    m = generate_structured_mesh((0, 0, 1, 1), 2, 2)
    with pytest.raises(ConfigError):
        Problem([Domain("a", m, MAT, host="b"), Domain("b", m, MAT, host="a")])


def test_triangulated_blending_gives_uniform_interface_displacement():
    rep = run_pathology(triangulate=True)
    assert rep.metrics["max_rel_dev"] < 1e-9


def test_untriangulated_q2_placement_is_not_uniform():
    assert run_pathology(triangulate=False).metrics["max_rel_dev"] > 1e-3


def test_bending_reference_reproduced_with_two_masters():
    # an affine multiplier field is in the coarse space for any kappa
    s = patch_test_setup(PatchTestConfig(case=1, load="bending", host_type="aligned"))
    rep = s.run("cgi", s.n_mortar)
    assert rep.metrics["E_r"] < 1e-3
