"""Selective integration of host elements cut by an embedded patch outline.

Host elements are classified as standard, blending or discarded against an
indicator built from closed patch outlines.  Blending elements are split by
the outline, the retained polygons are ear-clipped into triangles, and each
triangle gets a fresh 3-point Gauss rule mapped back to the host parent
space.  No degrees of freedom are added; host nodes whose elements are all
discarded are reported as orphans.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import GeometryError
from .geometry import (CLIP_INTERSECTION, HOST_NODE, KINK_POINT, cross2, ear_clip,
                       interior_point, points_in_polygon, signed_area,
                       split_convex_polygon)
from .mesh import Q4, T3, Mesh, gauss_rule, inverse_map_points, jacobian, shape_values

log = logging.getLogger(__name__)

Array = np.ndarray

SNAP_TOL = 1e-10      # x element diameter
AREA_TOL = 1e-12      # x element area
NUDGE = 1e-9          # x local outline edge length

PARENT = "parent"
PHYSICAL = "physical"

__all__ = [
    "ElementClass", "Indicator", "ClipPolygon", "IntegrationCell", "CutState",
    "classify_elements", "clip_element", "ear_clip", "build_integration_cells",
    "triangulate_blending_elements", "orphan_dofs", "cut_host", "nudge_outline",
    "HOST_NODE", "CLIP_INTERSECTION", "KINK_POINT",
]


class ElementClass(enum.IntEnum):
    STANDARD = 0
    BLENDING = 1
    DISCARDED = 2


def _segments_intersect(p1, p2, q1, q2) -> bool:
    # proper crossing only; touching at endpoints does not count
    d1 = cross2(q2 - q1, p1 - q1)
    d2 = cross2(q2 - q1, p2 - q1)
    d3 = cross2(p2 - p1, q1 - p1)
    d4 = cross2(p2 - p1, q2 - p1)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _check_simple(loop: Array) -> None:
    n = len(loop)
    if n < 3:
        raise GeometryError("outline needs at least 3 vertices")
    if n > 400:
        # sweep over bounding boxes keeps large outlines cheap
        a, b = loop, np.roll(loop, -1, axis=0)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        order = np.argsort(lo[:, 0])
        for ii, i in enumerate(order):
            for j in order[ii + 1:]:
                if lo[j, 0] > hi[i, 0]:
                    break
                if abs(i - j) in (1, n - 1):
                    continue
                if lo[j, 1] > hi[i, 1] or hi[j, 1] < lo[i, 1]:
                    continue
                if _segments_intersect(a[i], b[i], a[j], b[j]):
                    raise GeometryError("self-intersecting outline")
        return
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_intersect(loop[i], loop[(i + 1) % n], loop[j], loop[(j + 1) % n]):
                raise GeometryError("self-intersecting outline")


class Indicator:
    """Retained-side indicator built from closed outlines.

    ``phi(X)`` is 1 outside every outline and 0 inside any of them (the patch
    interior is removed from the host).  ``invert=True`` swaps the sides.
    """

    def __init__(self, outlines: Sequence[Array], invert: bool = False, check: bool = True):
        self.outlines = []
        for loop in outlines:
            loop = np.asarray(loop, dtype=float)
            if signed_area(loop) < 0:
                loop = loop[::-1].copy()
            if check:
                _check_simple(loop)
            self.outlines.append(loop)
        self.invert = bool(invert)
        segs = [np.stack([o, np.roll(o, -1, axis=0)], axis=1) for o in self.outlines]
        self.edges = np.concatenate(segs) if segs else np.zeros((0, 2, 2))
        self.edge_lo = self.edges.min(axis=1)
        self.edge_hi = self.edges.max(axis=1)

    @classmethod
    def from_patches(cls, patches: Sequence[Mesh], invert: bool = False) -> "Indicator":
        loops = []
        for p in patches:
            loops.extend(p.outer_outlines())
        return cls(loops, invert)

    def __call__(self, X) -> Array:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        inside = np.zeros(len(X), bool)
        for loop in self.outlines:
            lo, hi = loop.min(axis=0), loop.max(axis=0)
            cand = np.flatnonzero(np.all((X >= lo) & (X <= hi), axis=1))
            for k in range(0, len(cand), 2048):
                c = cand[k:k + 2048]
                inside[c] |= points_in_polygon(X[c], loop)
        phi = (~inside).astype(float)
        return 1.0 - phi if self.invert else phi

    def edges_near(self, lo, hi, pad: float = 0.0) -> Array:
        m = np.all(self.edge_hi >= np.asarray(lo) - pad, axis=1) & \
            np.all(self.edge_lo <= np.asarray(hi) + pad, axis=1)
        return self.edges[m]


def nudge_outline(coords: Array, chain: Sequence[int], closed: bool, host: Mesh,
                  rel: float = NUDGE, done: Optional[set] = None) -> int:
    """Move chain nodes that coincide with host nodes slightly along the chain.

    ``coords`` is modified in place.  Nodes listed in ``done`` are left alone
    and newly moved nodes are added to it.  Returns the number of nudged nodes.
    """
    done = set() if done is None else done
    chain = list(chain)
    if len(chain) < 2:
        return 0
    tree = cKDTree(host.coords)
    P = coords[chain]
    E = np.diff(P, axis=0)
    L = np.hypot(E[:, 0], E[:, 1])
    h = float(L.min()) if len(L) else 1.0
    d, _ = tree.query(P)
    moved = 0
    for k in np.flatnonzero(d <= 1e-8 * h):
        if chain[k] in done:
            continue
        done.add(chain[k])
        if k + 1 < len(chain):
            t = coords[chain[k + 1]] - coords[chain[k]]
        elif closed:
            t = coords[chain[0]] - coords[chain[k]]
        else:
            # last node of an open chain moves back along the chain, never off its end
            t = coords[chain[k - 1]] - coords[chain[k]]
        ln = np.hypot(*t)
        coords[chain[k]] += rel * t
        log.info("nudged outline node %d by %.3g along the outline", chain[k], rel * ln)
        moved += 1
    return moved


@dataclass
class ClipPolygon:
    """Retained polygon of a blending element with vertex provenance tags."""
    vertices: Array
    tags: List[str]

    @property
    def area(self) -> float:
        return signed_area(self.vertices)


@dataclass
class IntegrationCell:
    """Triangle of a clipped element with its own 3-point rule.

    ``parent_vertices`` are the triangle corners in host parent coordinates,
    ``points`` the Gauss points in host parent coordinates and ``weights``
    carry the physical area measure (they sum to the triangle area).
    """
    element: int
    vertices: Array
    parent_vertices: Array
    points: Array
    weights: Array
    X: Array

    @property
    def area(self) -> float:
        return signed_area(self.vertices)


def _is_convex(xe: Array) -> bool:
    n = len(xe)
    for i in range(n):
        a, b, c = xe[i - 1], xe[i], xe[(i + 1) % n]
        if cross2(b - a, c - b) < 0:
            return False
    return True


def _split_element(xe: Array, indicator: Indicator):
    """Faces of one element and their retained flags."""
    lo, hi = xe.min(axis=0), xe.max(axis=0)
    diam = float(np.hypot(*(hi - lo)))
    tol = SNAP_TOL * diam
    segs = indicator.edges_near(lo, hi, tol)
    if not len(segs):
        return None
    if not _is_convex(xe):
        raise GeometryError("clipping requires convex host elements")
    faces = split_convex_polygon(xe, segs, tol)
    if len(faces) <= 1:
        return None
    area = signed_area(xe)
    faces = [f for f in faces if f.area > AREA_TOL * area]
    keep = [indicator(interior_point(f.vertices))[0] > 0.5 for f in faces]
    return faces, keep


def _classify(mesh: Mesh, indicator: Indicator):
    n = mesh.n_elements
    classes = np.full(n, ElementClass.STANDARD, dtype=int)
    polys: Dict[int, List[ClipPolygon]] = {}
    cent = mesh.centroids()
    phi = indicator(cent)
    if len(indicator.edges):
        glo, ghi = indicator.edge_lo.min(axis=0), indicator.edge_hi.max(axis=0)
    for el in mesh.elements:
        e = el.id
        xe = mesh.coords[list(el.nodes)]
        res = None
        if len(indicator.edges):
            lo, hi = xe.min(axis=0), xe.max(axis=0)
            if np.all(hi >= glo) and np.all(lo <= ghi):
                res = _split_element(xe, indicator)
        if res is None:
            classes[e] = ElementClass.STANDARD if phi[e] > 0.5 else ElementClass.DISCARDED
            continue
        faces, keep = res
        kept = [ClipPolygon(f.vertices, list(f.tags)) for f, k in zip(faces, keep) if k]
        if not kept:
            classes[e] = ElementClass.DISCARDED
        elif all(keep):
            classes[e] = ElementClass.STANDARD
        else:
            classes[e] = ElementClass.BLENDING
            polys[e] = kept
    return classes, polys


def classify_elements(host: Mesh, indicator: Indicator) -> Array:
    """Class of every host element as an integer array of :class:`ElementClass`."""
    return _classify(host, indicator)[0]


def clip_element(element, mesh: Mesh, indicator: Indicator) -> List[ClipPolygon]:
    """Retained polygons of one element (whole element if uncut, empty if removed)."""
    xe = mesh.coords[list(element.nodes)]
    res = _split_element(xe, indicator)
    if res is None:
        if indicator(xe.mean(axis=0))[0] > 0.5:
            return [ClipPolygon(xe.copy(), [HOST_NODE] * len(xe))]
        return []
    faces, keep = res
    return [ClipPolygon(f.vertices, list(f.tags)) for f, k in zip(faces, keep) if k]


_TRI = gauss_rule(T3)


def build_integration_cells(element, mesh: Mesh, polygons: Sequence[ClipPolygon],
                            rule: str = PHYSICAL) -> List[IntegrationCell]:
    """Ear-clip each polygon and attach a 3-point rule to every triangle.

    With ``rule="parent"`` the triangle corners are pulled back to the host
    parent space and the Gauss rule lives on the straight parent triangle;
    the weights carry ``det J``.  On a distorted quad the image of such a
    triangle has curved sides, so the weight sum is the area of that image.
    With ``rule="physical"`` the Gauss points sit on the straight physical
    triangle and are pulled back one by one, so the weights sum exactly to
    the clipped area.  Both coincide on affine elements.
    """
    if rule not in (PARENT, PHYSICAL):
        raise ValueError(f"unknown cell rule {rule!r}")
    xe = mesh.coords[list(element.nodes)]
    cells = []
    bary = np.column_stack([1.0 - _TRI.points.sum(axis=1), _TRI.points])   # (3, 3)
    for poly in polygons:
        V = np.asarray(poly.vertices, dtype=float)
        for tri in ear_clip(V):
            T = V[list(tri)]
            a = signed_area(T)
            if a <= 0.0:
                continue
            pv = inverse_map_points(element.kind, xe, T)
            if rule == PHYSICAL:
                X = bary @ T
                pts = inverse_map_points(element.kind, xe, X)
                w = _TRI.weights * 2.0 * a
            else:
                pts = bary @ pv
                X = shape_values(element.kind, pts) @ xe
                det = np.linalg.det(jacobian(element.kind, xe, pts))
                w = _TRI.weights * 2.0 * signed_area(pv) * det
            cells.append(IntegrationCell(element.id, T, pv, pts, w, X))
    return cells


def triangulate_blending_elements(host: Mesh, classes) -> tuple:
    """Replace every blending Q4 by two T3 along its 0-2 diagonal.

    Returns ``(overlay, parent)`` where ``parent[k]`` is the host element of
    overlay element ``k``.  Nodes, node sets and polylines are unchanged.
    """
    classes = np.asarray(classes)
    elements, parent = [], []
    for el in host.elements:
        if el.kind == Q4 and classes[el.id] == ElementClass.BLENDING:
            n = el.nodes
            elements += [(T3, (n[0], n[1], n[2])), (T3, (n[0], n[2], n[3]))]
            parent += [el.id, el.id]
        else:
            elements.append((el.kind, el.nodes))
            parent.append(el.id)
    overlay = Mesh(host.coords, elements, host.node_sets, host.polylines, check=False)
    return overlay, np.array(parent, dtype=int)


def orphan_dofs(host: Mesh, classes) -> List[int]:
    """Nodes all of whose elements are discarded."""
    classes = np.asarray(classes)
    live = np.zeros(host.n_nodes, bool)
    used = np.zeros(host.n_nodes, bool)
    for el in host.elements:
        used[list(el.nodes)] = True
        if classes[el.id] != ElementClass.DISCARDED:
            live[list(el.nodes)] = True
    return np.flatnonzero(used & ~live).tolist()


@dataclass
class CutState:
    """Result of cutting one host mesh.

    ``mesh`` is the computation mesh (the host itself, or its overlay when
    blending quads were triangulated); ``parent`` maps its elements back to
    host elements.
    """
    host: Mesh
    mesh: Mesh
    parent: Array
    classes: Array
    host_classes: Array
    polygons: Dict[int, List[ClipPolygon]] = field(default_factory=dict)
    cells: Dict[int, List[IntegrationCell]] = field(default_factory=dict)
    orphans: List[int] = field(default_factory=list)
    indicator: Optional[Indicator] = None

    @property
    def active(self) -> Array:
        return self.classes != ElementClass.DISCARDED

    def counts(self) -> Dict[str, int]:
        return {c.name.lower(): int(np.count_nonzero(self.classes == c)) for c in ElementClass}

    def retained_area(self) -> float:
        areas = self.mesh.element_areas()
        std = float(areas[self.classes == ElementClass.STANDARD].sum())
        return std + sum(float(c.weights.sum()) for cl in self.cells.values() for c in cl)


def cut_host(host: Mesh, indicator: Indicator, triangulate: bool = False,
             rule: str = PHYSICAL) -> CutState:
    """Classify, clip and re-integrate a host mesh."""
    host_classes, polys = _classify(host, indicator)
    mesh, parent, classes = host, np.arange(host.n_elements), host_classes
    if triangulate and np.any((host_classes == ElementClass.BLENDING)):
        mesh, parent = triangulate_blending_elements(host, host_classes)
        classes, polys = _classify(mesh, indicator)
    cells = {}
    for e, pl in polys.items():
        cells[e] = build_integration_cells(mesh.elements[e], mesh, pl, rule)
    orphans = orphan_dofs(mesh, classes)
    return CutState(host, mesh, parent, classes, host_classes, polys, cells, orphans, indicator)
