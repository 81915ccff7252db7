"""Mortar tying of a patch boundary chain to a cut host mesh.

The patch boundary is the mortar side and carries the multipliers; the host
volume is the non-mortar side and is interpolated at the images of the
interface Gauss points inside the host elements.  Each mortar edge is split
into segments, one per host element it crosses, and the mortar integrals

    D[l, m] = sum_G w_G Phi_l(xi_G) N1_m(xi_G) J_seg
    M[l, i] = sum_G w_G Phi_l(xi_G) N2_i(mu_G, eta_G) J_seg

are accumulated segment by segment with a 3-point Gauss rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cut import CutState, ElementClass
from .errors import ConfigError, GeometryError
from .geometry import CLIP_INTERSECTION, KINK_POINT, clip_segment_convex
from .mesh import L2, Mesh, gauss_rule, inverse_map_points, shape_values

Array = np.ndarray

P0 = "p0"
P1 = "p1"
N_GAUSS = 3


@dataclass
class Chain:
    """Ordered mortar node chain in physical coordinates.

    ``nodes`` are patch node ids, ``X`` their coordinates.  For a closed
    chain the last edge joins the final node back to the first.
    """
    nodes: Array
    X: Array
    closed: bool = False

    @classmethod
    def from_polyline(cls, mesh: Mesh, name: str) -> "Chain":
        pl = mesh.polylines[name]
        nodes = np.asarray(pl.nodes, dtype=int)
        return cls(nodes, mesh.coords[nodes].copy(), pl.closed)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.nodes) if self.closed else len(self.nodes) - 1

    def edge(self, k: int) -> Tuple[int, int]:
        """Chain positions of the end nodes of edge ``k``."""
        return k, (k + 1) % len(self.nodes)

    def edge_lengths(self) -> Array:
        X = np.vstack([self.X, self.X[:1]]) if self.closed else self.X
        d = np.diff(X, axis=0)
        return np.hypot(d[:, 0], d[:, 1])

    def arc_length(self) -> Array:
        L = self.edge_lengths()
        return np.concatenate([[0.0], np.cumsum(L)])[: self.n_nodes]


@dataclass
class Segment:
    """Piece of a mortar edge lying inside one host element."""
    edge: int
    element: int
    xi_a: float
    xi_b: float
    Xa: Array
    Xb: Array
    tag_a: str
    tag_b: str

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.Xb - self.Xa)))


@dataclass
class GaussMapping:
    """Interface Gauss points of one segment seen from both sides."""
    gamma: Array       # segment parent coordinate
    xi: Array          # mortar edge parent coordinate
    host: Array        # host parent coordinates (n, 2)
    X: Array           # physical points (n, 2)
    w: Array
    J: Array


@dataclass
class MortarElement:
    """Mortar edge + host element pair restricted to one segment."""
    segment: Segment
    mortar_nodes: Tuple[int, int]        # chain positions
    host_nodes: Tuple[int, ...]          # computation-mesh node ids
    host_kind: str
    slots: Tuple[int, ...]               # multiplier slot ids
    gauss: GaussMapping
    D: Array = field(default=None)
    M: Array = field(default=None)


class _ElementIndex:
    """Uniform bucket grid over element bounding boxes."""

    def __init__(self, mesh: Mesh, elements: Sequence[int]):
        self.mesh = mesh
        self.ids = np.asarray(elements, dtype=int)
        xe = [mesh.coords[list(mesh.elements[e].nodes)] for e in self.ids]
        if not xe:
            self.lo = self.hi = np.zeros((0, 2))
            self.h = 1.0
            self.buckets = {}
            return
        self.lo = np.array([x.min(axis=0) for x in xe])
        self.hi = np.array([x.max(axis=0) for x in xe])
        self.h = float(np.median(np.max(self.hi - self.lo, axis=1)))
        self.buckets: Dict[Tuple[int, int], List[int]] = {}
        for k in range(len(self.ids)):
            i0, j0 = np.floor(self.lo[k] / self.h).astype(int)
            i1, j1 = np.floor(self.hi[k] / self.h).astype(int)
            for i in range(i0, i1 + 1):
                for j in range(j0, j1 + 1):
                    self.buckets.setdefault((i, j), []).append(k)

    def query(self, lo, hi) -> Array:
        i0, j0 = np.floor(np.asarray(lo) / self.h).astype(int)
        i1, j1 = np.floor(np.asarray(hi) / self.h).astype(int)
        hits = set()
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                hits.update(self.buckets.get((i, j), ()))
        ks = np.array(sorted(hits), dtype=int)
        if not len(ks):
            return ks
        m = np.all(self.hi[ks] >= lo, axis=1) & np.all(self.lo[ks] <= hi, axis=1)
        return self.ids[ks[m]]


def build_segments(chain: Chain, cut: CutState, allow_partial: bool = False,
                   rel_tol: float = 1e-10) -> List[Segment]:
    """Split every chain edge into segments, one per non-discarded host element.

    Where an edge runs along a host element face shared by two retained
    elements, the element with the lower id takes it, so the result does not
    depend on iteration order.  Raises :class:`GeometryError` if a part of an
    edge is not covered by any retained host element, unless
    ``allow_partial``.
    """
    mesh = cut.mesh
    active = np.flatnonzero(cut.classes != ElementClass.DISCARDED)
    index = _ElementIndex(mesh, active)
    segs: List[Segment] = []
    for k in range(chain.n_edges):
        ia, ib = chain.edge(k)
        a, b = chain.X[ia], chain.X[ib]
        h = float(np.hypot(*(b - a)))
        if h <= 0.0:
            raise GeometryError(f"zero-length mortar edge {k}")
        pad = rel_tol * h
        lo, hi = np.minimum(a, b) - pad, np.maximum(a, b) + pad
        pieces = []
        for e in index.query(lo, hi):
            xe = mesh.coords[list(mesh.elements[e].nodes)]
            r = clip_segment_convex(a, b, xe, pad)
            if r is None:
                continue
            # the inflated clip only detects; exact breakpoints come from the
            # plain clip unless the edge grazes or runs along a face
            r0 = clip_segment_convex(a, b, xe, 0.0)
            if r0 is not None and r0[1] - r0[0] > rel_tol:
                r = r0
            if r[1] - r[0] > rel_tol:
                pieces.append((max(r[0], 0.0), min(r[1], 1.0), int(e)))
        if not pieces:
            if allow_partial:
                continue
            raise GeometryError(f"mortar edge {k} is not inside any retained host element")
        ts = sorted({0.0, 1.0} | {p[0] for p in pieces} | {p[1] for p in pieces})
        # merge breakpoints closer than the tolerance
        merged = [ts[0]]
        for t in ts[1:]:
            if t - merged[-1] > rel_tol:
                merged.append(t)
        merged[-1] = 1.0
        owner = []
        for t0, t1 in zip(merged[:-1], merged[1:]):
            tm = 0.5 * (t0 + t1)
            cand = [e for p0, p1, e in pieces if p0 - rel_tol <= tm <= p1 + rel_tol]
            owner.append(min(cand) if cand else -1)
        runs = []
        for (t0, t1), e in zip(zip(merged[:-1], merged[1:]), owner):
            if runs and runs[-1][2] == e:
                runs[-1][1] = t1
            else:
                runs.append([t0, t1, e])
        covered = sum(t1 - t0 for t0, t1, e in runs if e >= 0)
        if covered < 1.0 - 1e-9 and not allow_partial:
            raise GeometryError(f"mortar edge {k} leaves the retained host region")
        for t0, t1, e in runs:
            if e < 0:
                continue
            segs.append(Segment(
                edge=k, element=e, xi_a=2.0 * t0 - 1.0, xi_b=2.0 * t1 - 1.0,
                Xa=a + t0 * (b - a), Xb=a + t1 * (b - a),
                tag_a=KINK_POINT if t0 == 0.0 else CLIP_INTERSECTION,
                tag_b=KINK_POINT if t1 == 1.0 else CLIP_INTERSECTION))
    return segs


_LINE = gauss_rule(L2, N_GAUSS)


def xi_of_gamma(segment: Segment, gamma) -> Array:
    g = np.asarray(gamma, dtype=float)
    return 0.5 * (1.0 - g) * segment.xi_a + 0.5 * (1.0 + g) * segment.xi_b


def segment_jacobian(segment: Segment, edge_X: Array, xi=None) -> float:
    """d(arc length)/d(gamma) for a straight mortar edge."""
    h = float(np.hypot(*(edge_X[1] - edge_X[0])))
    if h <= 0.0:
        raise GeometryError("zero-length mortar edge")
    return 0.5 * h * 0.5 * (segment.xi_b - segment.xi_a)


def map_gauss_points(segment: Segment, edge_X: Array, host_kind: str, host_X: Array) -> GaussMapping:
    gamma = _LINE.points[:, 0]
    xi = xi_of_gamma(segment, gamma)
    X = shape_values(L2, xi[:, None]) @ edge_X
    host = inverse_map_points(host_kind, host_X, X)
    J = np.full(len(gamma), segment_jacobian(segment, edge_X))
    return GaussMapping(gamma, xi, host, X, _LINE.weights.copy(), J)


def dual_values(dual: str, xi) -> Array:
    xi = np.asarray(xi, dtype=float)
    if dual == P1:
        return shape_values(L2, xi[:, None])
    if dual == P0:
        return np.ones((len(xi), 1))
    raise ConfigError(f"unknown dual basis {dual!r}")


def compute_D(me: MortarElement, dual: str = P1) -> Array:
    g = me.gauss
    Phi = dual_values(dual, g.xi)
    N1 = shape_values(L2, g.xi[:, None])
    return np.einsum("g,gl,gm->lm", g.w * g.J, Phi, N1)


def compute_M(me: MortarElement, dual: str = P1) -> Array:
    g = me.gauss
    Phi = dual_values(dual, g.xi)
    N2 = shape_values(me.host_kind, g.host)
    return np.einsum("g,gl,gi->li", g.w * g.J, Phi, N2)


def build_mortar_elements(chain: Chain, cut: CutState, segments: Sequence[Segment],
                          dual: str = P1) -> List[MortarElement]:
    out = []
    for s in segments:
        ia, ib = chain.edge(s.edge)
        el = cut.mesh.elements[s.element]
        hx = cut.mesh.coords[list(el.nodes)]
        g = map_gauss_points(s, chain.X[[ia, ib]], el.kind, hx)
        slots = (ia, ib) if dual == P1 else (s.edge,)
        me = MortarElement(s, (ia, ib), el.nodes, el.kind, slots, g)
        me.D = compute_D(me, dual)
        me.M = compute_M(me, dual)
        out.append(me)
    return out


def mortar_residual(me: MortarElement, U1, U2, Lam):
    """Element residual blocks ``(D^T L, -M^T L, D U1 - M U2)``.

    ``U1`` is ``(2, 2)`` (mortar nodes x components), ``U2`` ``(N, 2)`` and
    ``Lam`` ``(L, 2)``.
    """
    U1, U2, Lam = (np.asarray(a, dtype=float) for a in (U1, U2, Lam))
    return me.D.T @ Lam, -me.M.T @ Lam, me.D @ U1 - me.M @ U2


def mortar_tangent(me: MortarElement) -> Array:
    """Symmetric element matrix over ``(U1, U2, Lam)``, node-major dof order."""
    I = np.eye(2)
    Dk = np.kron(me.D, I)
    Mk = np.kron(me.M, I)
    n1, n2, nl = Dk.shape[1], Mk.shape[1], Dk.shape[0]
    K = np.zeros((n1 + n2 + nl,) * 2)
    K[n1 + n2:, :n1] = Dk
    K[n1 + n2:, n1:n1 + n2] = -Mk
    K[:n1, n1 + n2:] = Dk.T
    K[n1:n1 + n2, n1 + n2:] = -Mk.T
    return K
