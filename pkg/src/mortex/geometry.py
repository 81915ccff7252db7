"""Planar polygon kernels used by the cut engine.

All polygons are ``(n, 2)`` arrays without a repeated closing vertex.
"""
from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import GeometryError

log = logging.getLogger(__name__)

Array = np.ndarray

HOST_NODE = "host_node"
CLIP_INTERSECTION = "clip_intersection"
KINK_POINT = "kink_point"


def signed_area(poly) -> float:
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def points_in_polygon(points, poly) -> Array:
    """Crossing-number test, vectorised over points (boundary is ambiguous)."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    V = np.asarray(poly, dtype=float)
    W = np.roll(V, -1, axis=0)
    px, py = P[:, 0:1], P[:, 1:2]
    y0, y1 = V[None, :, 1], W[None, :, 1]
    x0, x1 = V[None, :, 0], W[None, :, 0]
    straddle = (y0 > py) != (y1 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
    hits = straddle & (px < xi)
    return (np.count_nonzero(hits, axis=1) % 2) == 1


def point_segment_distance(p, a, b) -> float:
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    d = b - a
    L2 = float(d @ d)
    t = 0.0 if L2 == 0.0 else min(1.0, max(0.0, float((p - a) @ d) / L2))
    return float(np.linalg.norm(a + t * d - p))


def clip_segment_convex(a, b, poly, tol: float = 0.0) -> Optional[Tuple[float, float]]:
    """Parameter range ``(t0, t1)`` of segment ``a + t (b - a)`` inside a convex CCW polygon.

    ``tol`` is an absolute distance by which the polygon is inflated.  Returns
    None when the overlap is empty or shorter than ``tol``.
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    V = np.asarray(poly, dtype=float)
    E = np.roll(V, -1, axis=0) - V
    lengths = np.hypot(E[:, 0], E[:, 1])
    n = np.column_stack([-E[:, 1], E[:, 0]]) / lengths[:, None]   # inward normals
    num = np.einsum("ij,ij->i", n, a - V) + tol
    den = n @ d
    t0, t1 = 0.0, 1.0
    for k in range(len(V)):
        if abs(den[k]) < 1e-300:
            if num[k] < 0.0:
                return None
            continue
        t = -num[k] / den[k]
        if den[k] > 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    if (t1 - t0) * np.hypot(*d) <= max(tol, 0.0) and tol > 0:
        return None
    if t1 <= t0:
        return None
    return t0, t1


def distance_to_boundary(p, poly) -> Tuple[float, int, float]:
    """Distance from ``p`` to the polygon boundary, edge index and edge parameter."""
    V = np.asarray(poly, dtype=float)
    W = np.roll(V, -1, axis=0)
    D = W - V
    L2 = np.einsum("ij,ij->i", D, D)
    t = np.clip(np.einsum("ij,ij->i", np.asarray(p) - V, D) / L2, 0.0, 1.0)
    Q = V + t[:, None] * D
    dist = np.hypot(*(Q - p).T)
    k = int(np.argmin(dist))
    return float(dist[k]), k, float(t[k])


# ---------------------------------------------------------------------------
# ear clipping
# ---------------------------------------------------------------------------

def _in_triangle(p, a, b, c, eps) -> bool:
    # inclusive test in a CCW triangle
    return (cross2(b - a, p - a) >= -eps and cross2(c - b, p - b) >= -eps
            and cross2(a - c, p - c) >= -eps)


def ear_clip(polygon) -> List[Tuple[int, int, int]]:
    """Triangulate a simple CCW polygon into ``n - 2`` CCW triangles.

    Returns vertex-index triples.  Vertices are scanned in a fixed order, so
    the output is deterministic.  Collinear vertices yield zero-area ears,
    which are clipped only once no proper ear remains.
    """
    P = np.asarray(polygon, dtype=float)
    n = len(P)
    if n < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    area = signed_area(P)
    if area <= 0:
        raise GeometryError("polygon must be counter-clockwise with positive area")
    scale = float(np.max(np.ptp(P, axis=0))) ** 2
    eps = 1e-13 * scale
    idx = list(range(n))
    tris: List[Tuple[int, int, int]] = []
    while len(idx) > 3:
        m = len(idx)
        clipped = False
        for k in range(m):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = P[i0], P[i1], P[i2]
            if cross2(b - a, c - b) <= eps:
                continue
            blocked = False
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                q = P[j]
                if (np.allclose(q, a) or np.allclose(q, b) or np.allclose(q, c)):
                    continue
                if _in_triangle(q, a, b, c, eps):
                    blocked = True
                    break
            if blocked:
                continue
            tris.append((i0, i1, i2))
            del idx[k]
            clipped = True
            break
        if not clipped:
            for k in range(m):
                i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
                a, b, c = P[i0], P[i1], P[i2]
                if abs(cross2(b - a, c - b)) <= eps and np.dot(a - b, c - b) < 0:
                    tris.append((i0, i1, i2))
                    del idx[k]
                    clipped = True
                    break
        if not clipped:
            raise GeometryError("ear clipping failed: polygon is not simple")
    tris.append((idx[0], idx[1], idx[2]))
    return tris


def interior_point(poly) -> Array:
    """A point strictly inside a simple CCW polygon (centroid of its largest ear)."""
    P = np.asarray(poly, dtype=float)
    best, best_a = None, -1.0
    for t in ear_clip(P):
        tri = P[list(t)]
        a = signed_area(tri)
        if a > best_a:
            best, best_a = tri.mean(axis=0), a
    return best


# ---------------------------------------------------------------------------
# splitting a convex polygon by cut segments
# ---------------------------------------------------------------------------

class Face:
    """A polygon produced by splitting, with per-vertex provenance tags."""

    __slots__ = ("vertices", "tags")

    def __init__(self, vertices: Array, tags: List[str]):
        self.vertices = vertices
        self.tags = tags

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def __repr__(self):
        return f"Face(n={len(self.vertices)}, area={self.area:.6g})"


def split_convex_polygon(poly, segments, tol: float, extend_dangling: bool = True) -> List[Face]:
    """Split a convex CCW polygon by straight cut segments.

    ``segments`` is an iterable of ``(a, b)`` point pairs (pieces of cut
    polylines; consecutive pieces share endpoints).  Pieces lying on the
    polygon boundary are ignored.  A piece ending strictly inside the polygon
    is extended along its direction up to the boundary.  Returns the bounded
    faces of the resulting planar subdivision (CCW).
    """
    V = np.asarray(poly, dtype=float)
    nv = len(V)
    verts: List[Array] = [v.copy() for v in V]
    tags: List[str] = [HOST_NODE] * nv
    bparam: Dict[int, float] = {i: float(i) for i in range(nv)}   # perimeter parameter

    def locate(p) -> int:
        for i, q in enumerate(verts):
            if abs(q[0] - p[0]) <= tol and abs(q[1] - p[1]) <= tol:
                return i
        d, k, t = distance_to_boundary(p, V)
        if d <= tol:
            if t <= 0.0 or t >= 1.0:
                return k if t <= 0.0 else (k + 1) % nv
            q = V[k] + t * (V[(k + 1) % nv] - V[k])
            verts.append(q)
            tags.append(CLIP_INTERSECTION)
            bparam[len(verts) - 1] = k + t
        else:
            verts.append(np.asarray(p, dtype=float).copy())
            tags.append(KINK_POINT)
        return len(verts) - 1

    inner_edges = set()
    for a, b in segments:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        r = clip_segment_convex(a, b, V)
        if r is None:
            continue
        t0, t1 = r
        p, q = a + t0 * (b - a), a + t1 * (b - a)
        mid = 0.5 * (p + q)
        if distance_to_boundary(mid, V)[0] <= tol:
            continue
        if np.hypot(*(q - p)) <= tol:
            continue
        i, j = locate(p), locate(q)
        if i != j:
            inner_edges.add((min(i, j), max(i, j)))

    if not inner_edges:
        return [Face(V.copy(), [HOST_NODE] * nv)]

    def degree_map():
        deg: Dict[int, int] = {}
        for i, j in inner_edges:
            deg[i] = deg.get(i, 0) + 1
            deg[j] = deg.get(j, 0) + 1
        return deg

    if extend_dangling:
        deg = degree_map()
        for v, dg in list(deg.items()):
            if dg == 1 and v not in bparam:
                (i, j), = [e for e in inner_edges if v in e]
                o = j if i == v else i
                d = verts[v] - verts[o]
                far = verts[v] + d / np.hypot(*d) * 4.0 * float(np.max(np.ptp(V, axis=0)))
                r = clip_segment_convex(verts[v], far, V)
                t1 = r[1] if r else 0.0
                end = verts[v] + t1 * (far - verts[v])
                log.warning("cut polyline ends inside an element; extending to %s", end)
                w = locate(end)
                if w != v:
                    inner_edges.add((min(v, w), max(v, w)))

    # a cut loop floating inside the polygon would need a face with a hole
    adj: Dict[int, set] = {}
    for i, j in inner_edges:
        adj.setdefault(i, set()).add(j)
        adj.setdefault(j, set()).add(i)
    seen = set()
    for start in adj:
        if start in seen:
            continue
        comp, stack = set(), [start]
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(adj[v] - comp)
        seen |= comp
        if not any(v in bparam for v in comp):
            raise GeometryError("cut polyline forms a loop strictly inside one host element")

    # boundary edges between consecutive boundary vertices
    border = sorted(bparam, key=lambda k: bparam[k])
    edges = set(inner_edges)
    for k in range(len(border)):
        i, j = border[k], border[(k + 1) % len(border)]
        edges.add((min(i, j), max(i, j)))
    nbrs: Dict[int, List[int]] = {}
    for i, j in edges:
        nbrs.setdefault(i, []).append(j)
        nbrs.setdefault(j, []).append(i)
    X = np.array(verts)
    order: Dict[int, List[int]] = {}
    for v, ns in nbrs.items():
        ang = [np.arctan2(*(X[w] - X[v])[::-1]) for w in ns]
        order[v] = [w for _, w in sorted(zip(ang, ns))]

    used = set()
    faces: List[Face] = []
    for i, j in sorted(edges):
        for u, v in ((i, j), (j, i)):
            if (u, v) in used:
                continue
            loop = [u]
            a, b = u, v
            while (a, b) not in used:
                used.add((a, b))
                loop.append(b)
                ring = order[b]
                k = ring.index(a)
                a, b = b, ring[k - 1]   # next edge clockwise from the reverse one
            loop = loop[:-1]
            pts = X[loop]
            if signed_area(pts) > 0:
                faces.append(Face(pts, [tags[k] for k in loop]))
    return faces
