"""Meshes, first-order shape functions, quadrature and parent/physical maps.

Only linear triangles (``T3``) and bilinear quadrilaterals (``Q4``) are
supported, plus the two-node line (``L2``) used for mortar edges.

Parent domains
--------------
``L2``  xi in [-1, 1]
``T3``  unit simplex, nodes (0, 0), (1, 0), (0, 1)
``Q4``  [-1, 1]^2, nodes (-1,-1), (1,-1), (1,1), (-1,1)
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import Delaunay

from .errors import GeometryError, NonConvergenceError, OutsideElementError

log = logging.getLogger(__name__)

Array = np.ndarray

T3 = "T3"
Q4 = "Q4"
L2 = "L2"
NODES_PER_KIND = {L2: 2, T3: 3, Q4: 4}
PARENT_NODES = {
    L2: np.array([[-1.0], [1.0]]),
    T3: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    Q4: np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]),
}
PARENT_MEASURE = {L2: 2.0, T3: 0.5, Q4: 4.0}

# Newton settings for the Q4 inverse map.
NEWTON_TOL = 1e-13
NEWTON_MAXIT = 30
# Slack on parent-domain membership, absorbs clipping round-off.
PARENT_TOL = 1e-9


def _check_kind(kind: str) -> None:
    if kind not in NODES_PER_KIND:
        raise ValueError(f"unknown element kind {kind!r}")


# ---------------------------------------------------------------------------
# shape functions
# ---------------------------------------------------------------------------

def shape_values(kind: str, parent) -> Array:
    """Shape-function values at parent coordinates.

    ``parent`` may hold a single point or a stack of points (last axis is the
    parent dimension; a bare scalar is accepted for ``L2``).  Returns an array
    of shape ``(..., n_nodes)``.
    """
    _check_kind(kind)
    p = np.asarray(parent, dtype=float)
    if kind == L2:
        xi = p[..., 0] if p.ndim and p.shape[-1:] == (1,) else p
        return np.stack([0.5 * (1.0 - xi), 0.5 * (1.0 + xi)], axis=-1)
    r, s = p[..., 0], p[..., 1]
    if kind == T3:
        return np.stack([1.0 - r - s, r, s], axis=-1)
    return 0.25 * np.stack([(1 - r) * (1 - s), (1 + r) * (1 - s),
                            (1 + r) * (1 + s), (1 - r) * (1 + s)], axis=-1)


def shape_gradients(kind: str, parent) -> Array:
    """Parent-space gradients, shape ``(..., n_nodes, dim)``."""
    _check_kind(kind)
    p = np.asarray(parent, dtype=float)
    if kind == L2:
        xi = p[..., 0] if p.ndim and p.shape[-1:] == (1,) else p
        g = np.broadcast_to(np.array([[-0.5], [0.5]]), np.shape(xi) + (2, 1))
        return g.copy()
    r, s = p[..., 0], p[..., 1]
    if kind == T3:
        g = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        return np.broadcast_to(g, r.shape + (3, 2)).copy()
    dr = 0.25 * np.stack([-(1 - s), (1 - s), (1 + s), -(1 + s)], axis=-1)
    ds = 0.25 * np.stack([-(1 - r), -(1 + r), (1 + r), (1 - r)], axis=-1)
    return np.stack([dr, ds], axis=-1)


def inside_parent(kind: str, parent, tol: float = PARENT_TOL) -> Array:
    p = np.asarray(parent, dtype=float)
    if kind == T3:
        r, s = p[..., 0], p[..., 1]
        return (r >= -tol) & (s >= -tol) & (r + s <= 1.0 + tol)
    if kind == Q4:
        return np.all(np.abs(p) <= 1.0 + tol, axis=-1)
    return np.abs(p[..., 0]) <= 1.0 + tol


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussRule:
    points: Array
    weights: Array


def _duffy_triangle(n: int) -> GaussRule:
    # collapsed tensor rule, exact for polynomials of degree 2n - 2
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(wu, wu)
    r = U.ravel()
    s = (V * (1.0 - U)).ravel()
    return GaussRule(np.column_stack([r, s]), (W * (1.0 - U)).ravel())


def gauss_rule(kind: str, order: Optional[int] = None) -> GaussRule:
    """Default rules: 3-point line, 3-point triangle, 2x2 quad.

    ``order`` overrides the number of points per direction (line and quad) or
    selects a collapsed tensor rule on the triangle; used by the oracles.
    """
    _check_kind(kind)
    if kind == L2:
        n = 3 if order is None else order
        x, w = np.polynomial.legendre.leggauss(n)
        return GaussRule(x[:, None], w)
    if kind == T3:
        if order is None:
            pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
            return GaussRule(pts, np.full(3, 1 / 6))
        return _duffy_triangle(order)
    n = 2 if order is None else order
    x, w = np.polynomial.legendre.leggauss(n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return GaussRule(np.column_stack([X.ravel(), Y.ravel()]), np.outer(w, w).ravel())


# ---------------------------------------------------------------------------
# mesh containers
# ---------------------------------------------------------------------------

class Node(NamedTuple):
    id: int
    X: Array


@dataclass(frozen=True)
class Element:
    id: int
    kind: str
    nodes: Tuple[int, ...]


@dataclass(frozen=True)
class Polyline:
    """Ordered node chain; ``closed`` chains do not repeat the first node."""
    nodes: Tuple[int, ...]
    closed: bool = False

    @property
    def edges(self) -> List[Tuple[int, int]]:
        n = list(self.nodes)
        pairs = list(zip(n[:-1], n[1:]))
        if self.closed:
            pairs.append((n[-1], n[0]))
        return pairs


class Mesh:
    """Nodes, T3/Q4 elements, named node sets and boundary polylines."""

    def __init__(self, coords, elements: Sequence[Tuple[str, Sequence[int]]],
                 node_sets: Optional[Dict[str, Sequence[int]]] = None,
                 polylines: Optional[Dict[str, Polyline]] = None,
                 check: bool = True):
        self.coords = np.asarray(coords, dtype=float).reshape(-1, 2)
        self.elements: List[Element] = [
            Element(i, kind, tuple(int(n) for n in nodes))
            for i, (kind, nodes) in enumerate(elements)
        ]
        self.node_sets = {k: np.asarray(v, dtype=int) for k, v in (node_sets or {}).items()}
        self.polylines: Dict[str, Polyline] = dict(polylines or {})
        self._groups = None
        if check:
            self.validate()

    # -- basic queries -------------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def nodes(self) -> List[Node]:
        return [Node(i, x) for i, x in enumerate(self.coords)]

    def element_coords(self, e: int) -> Array:
        return self.coords[list(self.elements[e].nodes)]

    def groups(self) -> Dict[str, Tuple[Array, Array]]:
        """Element ids and connectivity arrays grouped by kind."""
        if self._groups is None:
            out = {}
            for kind in (T3, Q4):
                ids = [el.id for el in self.elements if el.kind == kind]
                if ids:
                    conn = np.array([self.elements[i].nodes for i in ids], dtype=int)
                    out[kind] = (np.array(ids, dtype=int), conn)
            self._groups = out
        return self._groups

    def element_areas(self) -> Array:
        areas = np.empty(self.n_elements)
        for kind, (ids, conn) in self.groups().items():
            areas[ids] = polygon_area_batch(self.coords[conn])
        return areas

    def centroids(self) -> Array:
        c = np.empty((self.n_elements, 2))
        for kind, (ids, conn) in self.groups().items():
            c[ids] = self.coords[conn].mean(axis=1)
        return c

    def node_elements(self) -> List[List[int]]:
        inc: List[List[int]] = [[] for _ in range(self.n_nodes)]
        for el in self.elements:
            for n in el.nodes:
                inc[n].append(el.id)
        return inc

    def polyline_coords(self, name: str) -> Array:
        return self.coords[list(self.polylines[name].nodes)]

    def validate(self) -> None:
        n = self.n_nodes
        for el in self.elements:
            _check_kind(el.kind)
            if len(el.nodes) != NODES_PER_KIND[el.kind] or el.kind == L2:
                raise GeometryError(f"element {el.id}: bad node count for {el.kind}")
            if min(el.nodes) < 0 or max(el.nodes) >= n:
                raise GeometryError(f"element {el.id} references a missing node")
        if self.elements:
            areas = self.element_areas()
            bad = np.flatnonzero(areas <= 0.0)
            if bad.size:
                raise GeometryError(f"elements {bad[:5].tolist()} are not counter-clockwise")
        for name, pl in self.polylines.items():
            if len(pl.nodes) and (min(pl.nodes) < 0 or max(pl.nodes) >= n):
                raise GeometryError(f"polyline {name!r} references a missing node")
            if pl.closed and len(set(pl.nodes)) != len(pl.nodes):
                raise GeometryError(f"closed polyline {name!r} repeats a node")
        for name, ids in self.node_sets.items():
            if ids.size and (ids.min() < 0 or ids.max() >= n):
                raise GeometryError(f"node set {name!r} references a missing node")

    def with_elements(self, elements: Sequence[Tuple[str, Sequence[int]]]) -> "Mesh":
        """Same nodes, sets and polylines with a different element list."""
        return Mesh(self.coords, elements, self.node_sets, self.polylines)

    def boundary_loops(self) -> List[List[int]]:
        """Closed boundary node loops; outer loops CCW, holes CW."""
        count: Dict[Tuple[int, int], int] = {}
        directed = []
        for el in self.elements:
            nd = el.nodes
            for a, b in zip(nd, nd[1:] + nd[:1]):
                key = (min(a, b), max(a, b))
                count[key] = count.get(key, 0) + 1
                directed.append((a, b))
        nxt = {}
        for a, b in directed:
            if count[(min(a, b), max(a, b))] == 1:
                if a in nxt:
                    raise GeometryError("non-manifold boundary")
                nxt[a] = b
        loops = []
        seen = set()
        for start in sorted(nxt):
            if start in seen:
                continue
            loop = [start]
            seen.add(start)
            cur = nxt[start]
            while cur != start:
                loop.append(cur)
                seen.add(cur)
                cur = nxt[cur]
            loops.append(loop)
        return loops

    def outer_outlines(self) -> List[Array]:
        """Coordinates of the CCW (outer) boundary loops."""
        out = []
        for loop in self.boundary_loops():
            xy = self.coords[loop]
            if polygon_area(xy) > 0:
                out.append(xy)
        return out


def polygon_area(xy) -> float:
    xy = np.asarray(xy, dtype=float)
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_area_batch(xy: Array) -> Array:
    x, y = xy[..., 0], xy[..., 1]
    return 0.5 * np.sum(x * np.roll(y, -1, axis=-1) - np.roll(x, -1, axis=-1) * y, axis=-1)


# ---------------------------------------------------------------------------
# parent <-> physical maps
# ---------------------------------------------------------------------------

def forward_map(kind: str, xe: Array, parent) -> Array:
    return shape_values(kind, parent) @ np.asarray(xe, dtype=float)


def jacobian(kind: str, xe: Array, parent) -> Array:
    """dX/dparent, shape ``(..., 2, 2)`` with rows = physical components."""
    g = shape_gradients(kind, parent)
    return np.einsum("na,...nb->...ab", np.asarray(xe, dtype=float), g)


def inverse_map_points(kind: str, xe, X, check: bool = True) -> Array:
    """Parent coordinates of physical points ``X`` (shape ``(..., 2)``) in one element.

    T3 uses the closed-form affine inverse; Q4 runs Newton from the parent
    centre.  Raises :class:`OutsideElementError` when a point falls outside the
    parent domain by more than ``PARENT_TOL``.
    """
    _check_kind(kind)
    xe = np.asarray(xe, dtype=float)
    X = np.asarray(X, dtype=float)
    shp = X.shape[:-1]
    P = X.reshape(-1, 2)
    if kind == T3:
        A = np.column_stack([xe[1] - xe[0], xe[2] - xe[0]])
        out = np.linalg.solve(A, (P - xe[0]).T).T
    elif kind == Q4:
        out = np.zeros_like(P)
        prev = np.inf
        for _ in range(NEWTON_MAXIT):
            R = forward_map(Q4, xe, out) - P
            J = jacobian(Q4, xe, out)
            d = np.linalg.solve(J, R[..., None])[..., 0]
            out -= d
            step = np.max(np.abs(d), initial=0.0)
            # slender elements stall at round-off slightly above the tolerance
            if step < NEWTON_TOL or (step < 1e-10 and step >= 0.5 * prev):
                break
            prev = step
        else:
            raise NonConvergenceError("Q4 inverse map did not converge")
    else:
        raise ValueError("inverse map of a line element is not defined")
    if check:
        ok = inside_parent(kind, out)
        if not np.all(ok):
            raise OutsideElementError(f"point {P[~ok][0]} outside {kind} element")
    return out.reshape(shp + (2,))


def inverse_map(element: Element, mesh: Mesh, X_G) -> Array:
    """Parent coordinates of the physical point ``X_G`` inside ``element``."""
    return inverse_map_points(element.kind, mesh.coords[list(element.nodes)], X_G)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def structured_mesh(xs, ys, kind: str = Q4, distortion: float = 0.0,
                    seed: int = 0) -> Mesh:
    """Tensor-product mesh over the grid lines ``xs`` x ``ys``.

    ``distortion`` jitters interior nodes uniformly in
    ``[-distortion, distortion]^2``; boundary nodes never move so the
    rectangle stays straight.  Each quad cell is split along its 0-2
    diagonal for ``T3``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    nx, ny = len(xs) - 1, len(ys) - 1
    if nx < 1 or ny < 1:
        raise GeometryError("need at least one cell in each direction")
    if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        raise GeometryError("degenerate extents")
    hmin = min(np.diff(xs).min(), np.diff(ys).min())
    if distortion < 0 or distortion >= 0.5 * hmin:
        raise GeometryError("distortion amplitude must be below half the smallest edge")
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    coords = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return j * (nx + 1) + i

    if distortion > 0.0:
        rng = np.random.default_rng(seed)
        jitter = rng.uniform(-distortion, distortion, size=coords.shape)
        interior = np.zeros((ny + 1, nx + 1), bool)
        interior[1:-1, 1:-1] = True
        coords[interior.ravel()] += jitter[interior.ravel()]
    elements = []
    for j in range(ny):
        for i in range(nx):
            q = (nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1))
            if kind == Q4:
                elements.append((Q4, q))
            elif kind == T3:
                elements.append((T3, (q[0], q[1], q[2])))
                elements.append((T3, (q[0], q[2], q[3])))
            else:
                raise ValueError(f"unknown element kind {kind!r}")
    bottom = [nid(i, 0) for i in range(nx + 1)]
    right = [nid(nx, j) for j in range(ny + 1)]
    top = [nid(i, ny) for i in range(nx, -1, -1)]
    left = [nid(0, j) for j in range(ny, -1, -1)]
    node_sets = {
        "bottom": bottom, "right": right, "top": top, "left": left,
        "bottom_left": [nid(0, 0)], "bottom_right": [nid(nx, 0)],
        "top_right": [nid(nx, ny)], "top_left": [nid(0, ny)],
    }
    polylines = {
        "bottom": Polyline(tuple(bottom)), "right": Polyline(tuple(right)),
        "top": Polyline(tuple(top)), "left": Polyline(tuple(left)),
        "boundary": Polyline(tuple(bottom[:-1] + right[:-1] + top[:-1] + left[:-1]), True),
    }
    return Mesh(coords, elements, node_sets, polylines)


def generate_structured_mesh(extents, nx: int, ny: int, kind: str = Q4,
                             distortion: float = 0.0, seed: int = 0) -> Mesh:
    """Uniform ``nx`` x ``ny`` mesh of the rectangle ``(x0, y0, x1, y1)``."""
    x0, y0, x1, y1 = map(float, extents)
    if x1 <= x0 or y1 <= y0:
        raise GeometryError("degenerate extents")
    if nx < 1 or ny < 1:
        raise GeometryError("nx and ny must be >= 1")
    return structured_mesh(np.linspace(x0, x1, nx + 1), np.linspace(y0, y1, ny + 1),
                           kind, distortion, seed)


def generate_disk_mesh(R: float, n_boundary: int, center=(0.0, 0.0),
                       growth: float = 1.2, max_size: Optional[float] = None) -> Mesh:
    """Triangulated disk whose boundary is a regular ``n_boundary``-gon.

    Boundary nodes come first (ids ``0..n_boundary-1``, CCW from angle 0) and
    form the closed polyline ``"boundary"``.  Interior rings coarsen
    geometrically towards the centre, so the node count grows roughly like
    ``n_boundary * log(n_boundary)`` instead of quadratically.
    """
    if n_boundary < 8:
        raise GeometryError("n_boundary must be >= 8")
    if R <= 0:
        raise GeometryError("radius must be positive")
    h0 = 2.0 * np.pi * R / n_boundary
    hmax = max_size if max_size is not None else R / 3.0
    pts = [R * np.column_stack([np.cos(t), np.sin(t)])
           for t in [2 * np.pi * np.arange(n_boundary) / n_boundary]]
    r, h, k = R, h0, 0
    while True:
        h = min(h * growth, hmax) if k else h
        r = r - h * np.sqrt(3) / 2
        k += 1
        if r < 0.6 * h:
            break
        n = max(6, int(round(2 * np.pi * r / h)))
        t = 2 * np.pi * (np.arange(n) + 0.5 * (k % 2)) / n
        pts.append(r * np.column_stack([np.cos(t), np.sin(t)]))
    pts.append(np.zeros((1, 2)))
    xy = np.vstack(pts)
    tri = Delaunay(xy)
    simplices = tri.simplices
    a = polygon_area_batch(xy[simplices])
    simplices = np.where((a < 0)[:, None], simplices[:, [0, 2, 1]], simplices)
    a = np.abs(a)
    keep = a > 1e-14 * h0 * h0
    elements = [(T3, tuple(s)) for s in simplices[keep]]
    xy = xy + np.asarray(center, dtype=float)
    bnd = tuple(range(n_boundary))
    return Mesh(xy, elements, {"boundary": list(bnd)}, {"boundary": Polyline(bnd, True)})



def generate_ogrid_mesh(half_side: float, R: float, n_side: int, n_rad: int,
                        center=(0.0, 0.0), growth: float = 1.1) -> Mesh:
    """Quad O-grid of the square ``[-a, a]^2`` minus a centred hole of radius ``R``.

    ``n_side`` (even) cells along each square side, ``n_rad`` graded layers
    from the hole outwards.  Outer ring nodes come first, CCW from
    ``(a, 0)``; polylines ``"outer"`` and ``"hole"`` are closed, and the
    square sides are open CCW polylines and node sets ``"top"``, ``"bottom"``,
    ``"left"``, ``"right"``.
    """
    a = float(half_side)
    if n_side < 2 or n_side % 2:
        raise GeometryError("n_side must be even and >= 2")
    if not 0.0 < R < a:
        raise GeometryError("hole radius must lie inside the square")
    if n_rad < 1:
        raise GeometryError("n_rad must be >= 1")
    nt = 4 * n_side
    h = 2.0 * a / n_side
    t = h * np.arange(nt)
    # walk the square CCW starting at the middle of the right side
    legs = [((a, 0.0), (0.0, 1.0), a), ((a, a), (-1.0, 0.0), 2 * a), ((-a, a), (0.0, -1.0), 2 * a),
            ((-a, -a), (1.0, 0.0), 2 * a), ((a, -a), (0.0, 1.0), a)]
    S = np.empty((nt, 2))
    start = 0.0
    for (p0, d, length) in legs:
        m = (t >= start - 1e-12) & (t < start + length - 1e-12)
        S[m] = np.asarray(p0) + (t[m] - start)[:, None] * np.asarray(d)
        start += length
    th = np.arctan2(S[:, 1], S[:, 0])
    C = R * np.column_stack([np.cos(th), np.sin(th)])
    if growth == 1.0:
        rho = np.linspace(0.0, 1.0, n_rad + 1)
    else:
        rho = (growth ** np.arange(n_rad + 1) - 1.0) / (growth ** n_rad - 1.0)
    rings = [C + r * (S - C) for r in rho[::-1]]          # outer ring first
    coords = np.vstack(rings) + np.asarray(center, dtype=float)

    def nid(j, i):                                        # j = 0 outer ring
        return j * nt + i % nt

    elements = []
    for j in range(n_rad):
        for i in range(nt):
            q = (nid(j, i), nid(j, i + 1), nid(j + 1, i + 1), nid(j + 1, i))
            if polygon_area(coords[list(q)]) < 0:
                q = q[::-1]
            elements.append((Q4, q))
    outer = tuple(range(nt))
    hole = tuple(nid(n_rad, i) for i in range(nt - 1, -1, -1))
    tol = 1e-9 * a
    loc = S
    node_sets = {
        "outer": list(outer), "hole": list(hole),
        "top": [i for i in outer if abs(loc[i, 1] - a) < tol],
        "bottom": [i for i in outer if abs(loc[i, 1] + a) < tol],
        "left": [i for i in outer if abs(loc[i, 0] + a) < tol],
        "right": [i for i in outer if abs(loc[i, 0] - a) < tol],
    }
    q = n_side // 2
    sides = {"right": [*range(7 * q, 8 * q), *range(0, q + 1)],
             "top": list(range(q, 3 * q + 1)), "left": list(range(3 * q, 5 * q + 1)),
             "bottom": list(range(5 * q, 7 * q + 1))}
    polylines = {"outer": Polyline(outer, True), "hole": Polyline(hole, True)}
    polylines.update({k: Polyline(tuple(v)) for k, v in sides.items()})
    return Mesh(coords, elements, node_sets, polylines)

# ---------------------------------------------------------------------------
# ASCII mesh files
# ---------------------------------------------------------------------------

def read_mesh(path) -> Mesh:
    """Read the whitespace ASCII format (``NODES``/``ELEMENTS``/``NSET``/``POLYLINE``)."""
    with open(path) as fh:
        text = fh.read()
    return parse_mesh(text)


def parse_mesh(text: str) -> Mesh:
    tokens_by_line = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens_by_line.append(line.split())
    coords, elements = None, []
    node_sets, polylines = {}, {}
    i = 0
    while i < len(tokens_by_line):
        tok = tokens_by_line[i]
        head = tok[0].upper()
        if head == "NODES":
            n = int(tok[1])
            coords = np.empty((n, 2))
            for k in range(n):
                row = tokens_by_line[i + 1 + k]
                nid = int(row[0])
                if nid != k:
                    raise GeometryError("node ids must be contiguous from 0")
                coords[k] = float(row[1]), float(row[2])
            i += n + 1
        elif head == "ELEMENTS":
            m = int(tok[1])
            for k in range(m):
                row = tokens_by_line[i + 1 + k]
                if int(row[0]) != k:
                    raise GeometryError("element ids must be contiguous from 0")
                elements.append((row[1].upper(), [int(v) for v in row[2:]]))
            i += m + 1
        elif head in ("NSET", "POLYLINE"):
            name, k = tok[1], int(tok[2])
            ids = [int(v) for v in tok[3:3 + k]]
            closed = len(tok) > 3 + k and tok[3 + k].lower() == "closed"
            if len(ids) != k:
                raise GeometryError(f"{head} {name}: expected {k} ids")
            if head == "NSET":
                node_sets[name] = ids
            else:
                polylines[name] = Polyline(tuple(ids), closed)
            i += 1
        else:
            raise GeometryError(f"unexpected mesh record {tok[0]!r}")
    if coords is None:
        raise GeometryError("mesh file has no NODES block")
    return Mesh(coords, elements, node_sets, polylines)


def format_mesh(mesh: Mesh) -> str:
    out = [f"NODES {mesh.n_nodes}"]
    out += [f"{i} {float(x)!r} {float(y)!r}" for i, (x, y) in enumerate(mesh.coords)]
    out.append(f"ELEMENTS {mesh.n_elements}")
    out += [f"{el.id} {el.kind} " + " ".join(map(str, el.nodes)) for el in mesh.elements]
    for name, ids in mesh.node_sets.items():
        out.append(f"NSET {name} {len(ids)} " + " ".join(map(str, ids)))
    for name, pl in mesh.polylines.items():
        tail = " closed" if pl.closed else ""
        out.append(f"POLYLINE {name} {len(pl.nodes)} " + " ".join(map(str, pl.nodes)) + tail)
    return "\n".join(out) + "\n"


def write_mesh(mesh: Mesh, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_mesh(mesh))


def merge_meshes(a: Mesh, b: Mesh, tol: float = 1e-10) -> Tuple[Mesh, Array]:
    """Glue ``b`` onto ``a`` fusing coincident nodes; returns mesh and b's node map."""
    from scipy.spatial import cKDTree
    tree = cKDTree(a.coords)
    d, idx = tree.query(b.coords)
    mapping = np.empty(b.n_nodes, dtype=int)
    new = d > tol
    mapping[~new] = idx[~new]
    mapping[new] = a.n_nodes + np.arange(new.sum())
    coords = np.vstack([a.coords, b.coords[new]])
    elements = [(el.kind, el.nodes) for el in a.elements]
    elements += [(el.kind, tuple(mapping[list(el.nodes)])) for el in b.elements]
    return Mesh(coords, elements, a.node_sets, a.polylines), mapping


def remove_elements(mesh: Mesh, drop: Iterable[int]) -> Mesh:
    """Drop elements and renumber the remaining nodes contiguously."""
    drop = set(int(d) for d in drop)
    kept = [el for el in mesh.elements if el.id not in drop]
    used = np.zeros(mesh.n_nodes, bool)
    for el in kept:
        used[list(el.nodes)] = True
    new_id = -np.ones(mesh.n_nodes, dtype=int)
    new_id[used] = np.arange(used.sum())
    elements = [(el.kind, tuple(new_id[list(el.nodes)])) for el in kept]
    sets = {k: new_id[v][new_id[v] >= 0] for k, v in mesh.node_sets.items()}
    polys = {}
    for k, pl in mesh.polylines.items():
        ids = new_id[list(pl.nodes)]
        if np.all(ids >= 0):
            polys[k] = Polyline(tuple(int(i) for i in ids), pl.closed)
    return Mesh(mesh.coords[used], elements, sets, polys)
