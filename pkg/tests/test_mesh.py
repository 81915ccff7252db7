import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mortex.errors import GeometryError, OutsideElementError
from mortex.mesh import (L2, Q4, T3, PARENT_MEASURE, PARENT_NODES, Mesh, forward_map,
                         gauss_rule, generate_disk_mesh, generate_ogrid_mesh,
                         generate_structured_mesh, inverse_map, inverse_map_points,
                         merge_meshes, parse_mesh, format_mesh, polygon_area,
                         shape_gradients, shape_values)

DISTORTED_Q4 = np.array([[0.0, 0.0], [2.0, 0.2], [1.9, 1.8], [-0.1, 1.0]])


def test_q4_center_values():
    assert np.allclose(shape_values(Q4, [0.0, 0.0]), 0.25)


def test_q4_kronecker_first_node():
    assert np.array_equal(shape_values(Q4, [-1.0, -1.0]), [1.0, 0.0, 0.0, 0.0])


def test_t3_centroid():
    assert np.allclose(shape_values(T3, [1 / 3, 1 / 3]), 1 / 3)


def test_q4_gradient_at_center():
    g = shape_gradients(Q4, [0.0, 0.0])
    assert np.allclose(g[:, 0], [-0.25, 0.25, 0.25, -0.25])


def test_t3_gradients_constant():
    a = shape_gradients(T3, [0.1, 0.2])
    b = shape_gradients(T3, [0.6, 0.3])
    assert np.array_equal(a, b)


@pytest.mark.parametrize("kind", [L2, T3, Q4])
def test_kronecker_at_parent_nodes(kind):
    N = shape_values(kind, PARENT_NODES[kind])
    assert np.allclose(N, np.eye(len(N)), atol=0, rtol=0)


def _random_parent(kind, rng, n):
    if kind == L2:
        return rng.uniform(-1, 1, (n, 1))
    if kind == Q4:
        return rng.uniform(-1, 1, (n, 2))
    p = rng.uniform(0, 1, (n, 2))
    flip = p.sum(axis=1) > 1
    p[flip] = 1 - p[flip]
    return p


@pytest.mark.parametrize("kind", [L2, T3, Q4])
def test_partition_of_unity_random(kind):
    p = _random_parent(kind, np.random.default_rng(1), 1000)
    assert np.max(np.abs(shape_values(kind, p).sum(axis=-1) - 1.0)) < 1e-14
    assert np.max(np.abs(shape_gradients(kind, p).sum(axis=-2))) < 1e-14


def test_unknown_kind():
    with pytest.raises(ValueError):
        shape_values("Q9", [0, 0])


@pytest.mark.parametrize("kind", [L2, T3, Q4])
def test_gauss_weights_sum_to_parent_measure(kind):
    assert gauss_rule(kind).weights.sum() == pytest.approx(PARENT_MEASURE[kind], rel=1e-14)


def _monomial_integral_q4(a, b):
    f = lambda k: 0.0 if k % 2 else 2.0 / (k + 1)
    return f(a) * f(b)


def test_quad_rule_exact_for_stiffness_products():
    # bilinear gradients times bilinear gradients: degree <= 2 per direction
    r = gauss_rule(Q4)
    for a in range(4):
        for b in range(4):
            num = np.sum(r.weights * r.points[:, 0] ** a * r.points[:, 1] ** b)
            assert num == pytest.approx(_monomial_integral_q4(a, b), abs=1e-14)


def test_triangle_rule_exact_degree_two():
    from math import factorial
    r = gauss_rule(T3)
    for a in range(3):
        for b in range(3 - a):
            exact = factorial(a) * factorial(b) / factorial(a + b + 2)
            num = np.sum(r.weights * r.points[:, 0] ** a * r.points[:, 1] ** b)
            assert num == pytest.approx(exact, abs=1e-15)


def test_inverse_map_unit_square_center():
    m = generate_structured_mesh((0, 0, 1, 1), 1, 1)
    assert np.allclose(inverse_map(m.elements[0], m, [0.5, 0.5]), 0.0, atol=1e-15)


def test_inverse_map_t3():
    xe = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    p = inverse_map_points(T3, xe, [0.25, 0.25])
    assert np.allclose(shape_values(T3, p), [0.5, 0.25, 0.25])


def test_inverse_map_distorted_round_trip():
    rng = np.random.default_rng(7)
    parent = rng.uniform(-1, 1, (1000, 2))
    X = forward_map(Q4, DISTORTED_Q4, parent)
    back = inverse_map_points(Q4, DISTORTED_Q4, X)
    diam = np.hypot(*(DISTORTED_Q4.max(0) - DISTORTED_Q4.min(0)))
    assert np.max(np.abs(forward_map(Q4, DISTORTED_Q4, back) - X)) < 1e-12 * diam
    assert np.max(np.abs(back - parent)) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_inverse_map_property(r, s):
    X = forward_map(Q4, DISTORTED_Q4, [r, s])
    back = inverse_map_points(Q4, DISTORTED_Q4, X)
    assert np.allclose(back, [r, s], atol=1e-10)


def test_inverse_map_outside():
    with pytest.raises(OutsideElementError):
        inverse_map_points(Q4, DISTORTED_Q4, [5.0, 5.0])


def test_structured_single_quad():
    m = generate_structured_mesh((0, 0, 1, 1), 1, 1, Q4)
    assert (m.n_elements, m.n_nodes) == (1, 4)


def test_structured_triangles():
    assert generate_structured_mesh((0, 0, 1, 1), 2, 2, T3).n_elements == 8


def test_zero_distortion_identity():
    a = generate_structured_mesh((0, 0, 2, 1), 4, 3)
    b = generate_structured_mesh((0, 0, 2, 1), 4, 3, distortion=0.0, seed=5)
    assert np.array_equal(a.coords, b.coords)


def test_distortion_is_seeded_and_keeps_orientation():
    a = generate_structured_mesh((0, 0, 2, 1), 8, 4, distortion=0.05, seed=3)
    b = generate_structured_mesh((0, 0, 2, 1), 8, 4, distortion=0.05, seed=3)
    assert np.array_equal(a.coords, b.coords)
    assert np.all(a.element_areas() > 0)
    assert a.element_areas().sum() == pytest.approx(2.0, rel=1e-13)


def test_structured_rejects_large_distortion():
    with pytest.raises(GeometryError):
        generate_structured_mesh((0, 0, 1, 1), 4, 4, distortion=0.2)


def test_structured_polylines():
    m = generate_structured_mesh((0, 0, 1, 1), 3, 2)
    assert set(m.polylines) >= {"bottom", "right", "top", "left"}
    assert len(m.polylines["bottom"].nodes) == 4


def test_disk_area_and_boundary():
    m = generate_disk_mesh(0.1, 256)
    assert abs(m.element_areas().sum() - np.pi * 0.01) < 0.005 * np.pi * 0.01
    pl = m.polylines["boundary"]
    assert pl.closed and len(pl.nodes) == 256
    assert np.all(m.element_areas() > 0)


def test_ogrid_area_and_sides():
    m = generate_ogrid_mesh(1.0, 0.4, 8, 4)
    assert m.element_areas().sum() == pytest.approx(4.0 - abs(polygon_area(m.polyline_coords("hole"))),
                                                    rel=1e-12)
    for side in ("right", "top", "left", "bottom"):
        assert len(m.polylines[side].nodes) == 9


def test_mesh_rejects_clockwise_element():
    with pytest.raises(GeometryError):
        Mesh([[0, 0], [1, 0], [0, 1]], [(T3, (0, 2, 1))])


def test_text_format_round_trip():
    m = generate_structured_mesh((0, 0, 1, 1), 2, 1)
    m2 = parse_mesh(format_mesh(m))
    assert np.allclose(m.coords, m2.coords)
    assert [e.nodes for e in m.elements] == [e.nodes for e in m2.elements]
    assert m2.polylines["bottom"].nodes == m.polylines["bottom"].nodes


def test_merge_meshes_shares_nodes():
    a = generate_structured_mesh((0, 0, 1, 1), 2, 2)
    b = generate_structured_mesh((1, 0, 2, 1), 2, 2)
    m, mp = merge_meshes(a, b)
    assert m.n_nodes == a.n_nodes + b.n_nodes - 3
    assert m.element_areas().sum() == pytest.approx(2.0)
