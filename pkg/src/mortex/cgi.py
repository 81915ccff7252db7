"""Coarse-grained interpolation of the interface multipliers.

The mortar chain is cut into super-segments of ``kappa`` mortar edges.  The
multipliers at super-segment ends (masters) stay free; interior (slave)
multipliers follow the linear interpolation of their two masters in an
arc-length coordinate.  The constraint is imposed by congruence,
``B_red = T^T B``, so the reduced saddle system stays symmetric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, GeometryError

Array = np.ndarray


@dataclass
class SuperSegment:
    """Chain positions ``nodes`` from one master to the next."""
    nodes: List[int]
    xi: Array

    @property
    def masters(self):
        return self.nodes[0], self.nodes[-1]

    @property
    def slaves(self) -> List[int]:
        return self.nodes[1:-1]

    @property
    def kappa(self) -> int:
        return len(self.nodes) - 1


@dataclass(frozen=True)
class MpcConstraint:
    slave: int
    masters: tuple
    weights: tuple


@dataclass
class MeshContrast:
    global_value: float
    local: Dict[int, float] = field(default_factory=dict)


def compute_mesh_contrast(segments, parent: Optional[Array] = None) -> MeshContrast:
    """Mortar edges per host element carrying segments.

    ``parent`` maps computation-mesh elements to host elements, so splitting
    blending quads into triangles does not change the contrast.
    """
    per_elem: Dict[int, set] = {}
    edges = set()
    for s in segments:
        e = int(parent[s.element]) if parent is not None else int(s.element)
        per_elem.setdefault(e, set()).add(s.edge)
        edges.add(s.edge)
    if not per_elem:
        raise GeometryError("mesh contrast undefined: no blending elements")
    local = {e: float(len(v)) for e, v in sorted(per_elem.items())}
    return MeshContrast(len(edges) / len(per_elem), local)


def _xi_cg(s: Array) -> Array:
    return -1.0 + 2.0 * (s - s[0]) / (s[-1] - s[0])


def _tile(ids: List[int], arc: Array, sizes: Sequence[int]) -> List[SuperSegment]:
    out, p = [], 0
    for k in sizes:
        nodes = ids[p:p + k + 1]
        out.append(SuperSegment(list(nodes), _xi_cg(arc[p:p + k + 1])))
        p += k
    return out


def _chain_walk(edge_lengths: Array, closed: bool, node_ids=None):
    L = np.asarray(edge_lengths, dtype=float)
    n_edges = len(L)
    n_nodes = n_edges if closed else n_edges + 1
    start = 0
    if closed and node_ids is not None:
        start = int(np.argmin(np.asarray(node_ids)))
    if closed:
        order = [(start + i) % n_nodes for i in range(n_nodes + 1)]
        lens = np.array([L[(start + i) % n_edges] for i in range(n_edges)])
    else:
        order = list(range(n_nodes))
        lens = L
    arc = np.concatenate([[0.0], np.cumsum(lens)])
    return order, arc, n_edges


def partition_supersegments(edge_lengths, kappa: int, closed: bool = False,
                            node_ids=None) -> List[SuperSegment]:
    """Tile a chain with super-segments of ``kappa`` edges, remainder last.

    Nodes are chain positions.  For a closed chain the first master is the
    position holding the lowest ``node_ids`` entry and the last
    super-segment wraps back onto it.
    """
    order, arc, n_m = _chain_walk(edge_lengths, closed, node_ids)
    hi = n_m - 1 if closed else n_m
    if not isinstance(kappa, (int, np.integer)) or not 1 <= kappa <= hi:
        raise ConfigError(f"kappa must lie in [1, {hi}], got {kappa}")
    sizes = [kappa] * (n_m // kappa)
    if n_m % kappa:
        sizes.append(n_m % kappa)
    return _tile(order, arc, sizes)


def partition_supersegments_local(edge_lengths, edge_kappa, closed: bool = False,
                                  node_ids=None) -> List[SuperSegment]:
    """Variable super-segments: each takes the kappa of the edge it starts on."""
    order, arc, n_m = _chain_walk(edge_lengths, closed, node_ids)
    kap = np.asarray(edge_kappa, dtype=int)
    if closed:
        start = order[0]
        kap = np.array([kap[(start + i) % n_m] for i in range(n_m)])
    sizes, p = [], 0
    while p < n_m:
        k = int(max(1, min(kap[p], n_m - p)))
        sizes.append(k)
        p += k
    if closed and len(sizes) == 1:
        sizes = [n_m - 1, 1]
    return _tile(order, arc, sizes)


def edge_kappa_from_contrast(segments, contrast: MeshContrast, n_edges: int,
                             parent: Optional[Array] = None) -> Array:
    """Per-edge kappa: ceil of the largest local contrast among its host elements."""
    kap = np.ones(n_edges, dtype=int)
    for s in segments:
        e = int(parent[s.element]) if parent is not None else int(s.element)
        kap[s.edge] = max(kap[s.edge], math.ceil(contrast.local[e]))
    return kap


def slave_weights(ss: SuperSegment, node: int) -> MpcConstraint:
    """Linear hat weights of the two masters at a slave position."""
    if node not in ss.slaves:
        raise ConfigError(f"node {node} is not a slave of this super-segment")
    xi = float(ss.xi[ss.nodes.index(node)])
    return MpcConstraint(node, ss.masters, (0.5 * (1.0 - xi), 0.5 * (1.0 + xi)))


def constraints(supersegments: Sequence[SuperSegment]) -> List[MpcConstraint]:
    return [slave_weights(ss, n) for ss in supersegments for n in ss.slaves]


def transformation(n_slots: int, mpcs: Sequence[MpcConstraint], dim: int = 2):
    """Sparse ``T`` with ``lambda_full = T lambda_masters`` and the master slot list."""
    slaves = [c.slave for c in mpcs]
    if len(set(slaves)) != len(slaves):
        raise ConfigError("conflicting constraints on one slave")
    sl = set(slaves)
    masters = [i for i in range(n_slots) if i not in sl]
    col = {m: k for k, m in enumerate(masters)}
    rows, cols, vals = [], [], []
    for m in masters:
        rows.append(m); cols.append(col[m]); vals.append(1.0)
    for c in mpcs:
        for m, w in zip(c.masters, c.weights):
            if m in sl:
                raise ConfigError("a master cannot also be a slave")
            rows.append(c.slave); cols.append(col[m]); vals.append(w)
    T = sp.coo_matrix((vals, (rows, cols)), shape=(n_slots, len(masters))).tocsr()
    if dim > 1:
        T = sp.kron(T, sp.identity(dim), format="csr")
    return T, masters


def apply_mpc(system, T):
    """Condense multipliers with ``T``: ``B' = T^T B``, ``g' = T^T g``.

    ``system`` is a :class:`mortex.solver.SaddleSystem`; ``T=None`` returns it
    untouched.
    """
    if T is None:
        return system
    return system.reduced(T)
