import numpy as np
import pytest

from mortex.cut import ClipPolygon, build_integration_cells
from mortex.geometry import HOST_NODE
from mortex.elasticity import (PLANE_STRESS, Material, constitutive_matrix, element_stiffness,
                               recover_nodal_stress, stiffness_batch)
from mortex.mesh import Q4, T3, generate_structured_mesh


def test_c12_zero_without_poisson():
    C = constitutive_matrix(Material(1000.0, 0.0))
    assert C[0, 1] == 0.0 and C[1, 0] == 0.0


def test_c11_plane_strain():
    C = constitutive_matrix(Material(1000.0, 0.3))
    assert C[0, 0] == pytest.approx(1346.153846153846, rel=1e-12)


def test_plane_stress_unit():
    C = constitutive_matrix(Material(1.0, 0.0, PLANE_STRESS))
    assert np.allclose(C, np.diag([1.0, 1.0, 0.5]))


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.3, 0.49])
def test_constitutive_spd(nu):
    C = constitutive_matrix(Material(7.0, nu))
    assert np.allclose(C, C.T)
    assert np.all(np.linalg.eigvalsh(C) > 0)


@pytest.mark.parametrize("E,nu", [(0.0, 0.3), (1.0, 0.5), (1.0, -1.0)])
def test_material_validation(E, nu):
    with pytest.raises(ValueError):
        Material(E, nu)


def _oracle_q4_stiffness(xe, C, n=5):
    # independent dense quadrature, written out without the package helpers
    x, w = np.polynomial.legendre.leggauss(n)
    K = np.zeros((8, 8))
    for r, wr in zip(x, w):
        for s, ws in zip(x, w):
            dr = 0.25 * np.array([-(1 - s), (1 - s), (1 + s), -(1 + s)])
            ds = 0.25 * np.array([-(1 - r), -(1 + r), (1 + r), (1 - r)])
            J = np.array([[dr @ xe[:, 0], ds @ xe[:, 0]], [dr @ xe[:, 1], ds @ xe[:, 1]]])
            g = np.linalg.solve(J.T, np.vstack([dr, ds]))
            B = np.zeros((3, 8))
            B[0, 0::2] = g[0]
            B[1, 1::2] = g[1]
            B[2, 0::2] = g[1]
            B[2, 1::2] = g[0]
            K += B.T @ C @ B * np.linalg.det(J) * wr * ws
    return K


def test_unit_square_stiffness_matches_oracle():
    m = generate_structured_mesh((0, 0, 1, 1), 1, 1)
    mat = Material(1.0, 0.0, PLANE_STRESS)
    K = element_stiffness(m.elements[0], m, mat)
    Ko = _oracle_q4_stiffness(m.element_coords(0), constitutive_matrix(mat))
    assert np.allclose(K, Ko, rtol=0, atol=1e-14)
    # hand value of the bilinear quad
    assert K[0, 0] == pytest.approx(0.5, rel=1e-14)


def _random_quads(rng, n):
    base = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return base + rng.uniform(-0.2, 0.2, (n, 4, 2))


def test_stiffness_symmetry_and_rank():
    rng = np.random.default_rng(3)
    C = constitutive_matrix(Material(5.0, 0.25))
    Ks = stiffness_batch(Q4, _random_quads(rng, 100), C)
    for K in Ks:
        assert np.max(np.abs(K - K.T)) < 1e-12 * np.max(np.abs(K))
        ev = np.linalg.eigvalsh(0.5 * (K + K.T))
        assert np.count_nonzero(ev < 1e-10 * ev.max()) == 3


def test_rigid_modes_give_zero_force():
    rng = np.random.default_rng(4)
    xe = _random_quads(rng, 1)[0]
    K = stiffness_batch(Q4, xe[None], constitutive_matrix(Material(1.0, 0.3)))[0]
    rot = np.column_stack([-xe[:, 1], xe[:, 0]]).ravel()
    for u in (np.tile([1.0, 0.0], 4), np.tile([0.0, 1.0], 4), rot):
        assert np.max(np.abs(K @ u)) < 1e-12


@pytest.mark.parametrize("rule", ["physical", "parent"])
def test_full_cells_equal_full_integration(rule):
    m = generate_structured_mesh((0, 0, 2, 1), 1, 1)
    el = m.elements[0]
    whole = [ClipPolygon(m.element_coords(0), [HOST_NODE] * 4)]
    cells = build_integration_cells(el, m, whole, rule)
    mat = Material(1.0, 0.3)
    K_cells = element_stiffness(el, m, mat, cells)
    K_full = element_stiffness(el, m, mat)
    assert np.allclose(K_cells, K_full, rtol=0, atol=1e-12 * np.abs(K_full).max())


def test_uniform_stretch_recovery():
    m = generate_structured_mesh((0, 0, 2, 1), 4, 3, distortion=0.05, seed=2)
    mat = Material(10.0, 0.0)
    u = np.column_stack([np.zeros(m.n_nodes), 0.01 * m.coords[:, 1]])
    st = recover_nodal_stress(m, u, mat)
    assert np.allclose(st.nodal[:, 1], 0.1, atol=1e-13)
    assert np.allclose(st.nodal[:, [0, 2]], 0.0, atol=1e-13)


def test_linear_bending_field_recovered():
    kind = Q4
    # sigma_yy = 2 s0 (x/l - 1/2), nu = 0
    l, s0, E = 5.0, 1.0, 1000.0
    m = generate_structured_mesh((0, 0, l, 1), 10, 2, kind)
    X, Y = m.coords[:, 0], m.coords[:, 1]
    eps = lambda x: 2 * s0 * (x / l - 0.5) / E
    u = np.column_stack([-(s0 / (E * l)) * Y ** 2, eps(X) * Y])
    st = recover_nodal_stress(m, u, Material(E, 0.0))
    assert np.allclose(st.nodal[:, 1], 2 * s0 * (X / l - 0.5), atol=1e-12)


def test_affine_patch_test_monolithic():
    from mortex.model import Domain, Problem
    from mortex.solver import BoundaryCondition as BC
    m = generate_structured_mesh((0, 0, 1, 1), 5, 5, distortion=0.05, seed=9)
    mat = Material(100.0, 0.3)
    # tie the whole boundary to an affine field through node sets
    A = np.array([[1e-3, 2e-3], [-5e-4, 3e-3]])
    edge = np.unique(np.concatenate([m.node_sets[s] for s in ("bottom", "right", "top", "left")]))
    sets = dict(m.node_sets)
    bcs = []
    for k, n in enumerate(edge):
        sets[f"n{k}"] = [int(n)]
        val = A @ m.coords[n]
        bcs += [BC("dirichlet_component", "m", f"n{k}", 0, float(val[0])),
                BC("dirichlet_component", "m", f"n{k}", 1, float(val[1]))]
    from mortex.mesh import Mesh
    mm = Mesh(m.coords, [(e.kind, e.nodes) for e in m.elements], sets, m.polylines)
    res = Problem([Domain("m", mm, mat)], [], bcs).solve("sli-p1")
    assert np.allclose(res.u("m"), m.coords @ A.T, atol=1e-14)
