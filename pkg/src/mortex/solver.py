"""Global assembly and solution of the tied saddle-point system.

    [ K   B^T ] [ u ]   [ f ]
    [ B   0   ] [ l ] = [ g ]

Dirichlet dofs are eliminated (rows and columns removed, right-hand side
corrected) so the matrix stays symmetric.  Multiplier rows with no free
entry left are dropped and their multipliers reported as zero.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cut import ElementClass
from .elasticity import constitutive_matrix, element_stiffness, stiffness_batch
from .errors import ConfigError, SolverError
from .mesh import L2, Mesh, gauss_rule, shape_values

log = logging.getLogger(__name__)

Array = np.ndarray

DIRICHLET = "dirichlet_component"
PRESSURE = "pressure_on_polyline"
LINEAR_PRESSURE = "linear_pressure_on_polyline"
TRACTION = "traction_on_polyline"
BC_KINDS = (DIRICHLET, PRESSURE, LINEAR_PRESSURE, TRACTION)


@dataclass
class BoundaryCondition:
    """Prescribed displacement component or surface load.

    ``dirichlet_component``: ``u[component] = value`` on node set ``target``.
    ``pressure_on_polyline``: traction ``-p n`` with ``p = value``.
    ``linear_pressure_on_polyline``: ``p(X) = value + gradient . X``.
    ``traction_on_polyline``: constant traction vector ``vector``.
    """
    kind: str
    domain: str
    target: str
    component: Optional[int] = None
    value: float = 0.0
    gradient: Tuple[float, float] = (0.0, 0.0)
    vector: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ConfigError(f"unknown boundary condition kind {self.kind!r}")
        if self.kind == DIRICHLET and self.component not in (0, 1):
            raise ConfigError("dirichlet_component needs component 0 or 1")


class DofMap:
    """Dense numbering of active primal dofs and multiplier slots.

    ``node_dofs[name]`` is ``(n_nodes, 2)`` with -1 on inactive (orphan or
    unused) nodes.  Multiplier blocks are numbered after registration order.
    """

    def __init__(self):
        self.node_dofs: Dict[str, Array] = {}
        self.n_primal = 0
        self.mult_offset: Dict[str, int] = {}
        self.mult_slots: Dict[str, int] = {}
        self.n_dual = 0

    def add_domain(self, name: str, active_nodes: Array) -> Array:
        active_nodes = np.asarray(active_nodes, bool)
        d = -np.ones((len(active_nodes), 2), dtype=int)
        k = int(active_nodes.sum())
        d[active_nodes] = self.n_primal + np.arange(2 * k).reshape(k, 2)
        self.node_dofs[name] = d
        self.n_primal += 2 * k
        return d

    def add_multipliers(self, name: str, n_slots: int) -> int:
        self.mult_offset[name] = self.n_dual
        self.mult_slots[name] = n_slots
        self.n_dual += 2 * n_slots
        return self.mult_offset[name]

    def mult_rows(self, name: str) -> Array:
        o = self.mult_offset[name]
        return np.arange(o, o + 2 * self.mult_slots[name]).reshape(-1, 2)


@dataclass
class SaddleSystem:
    """Assembled system before Dirichlet elimination.

    ``T`` (if set) maps the reduced multipliers to the full multiplier
    vector; ``B`` and ``g`` are already reduced (``T^T B``).
    """
    K: sp.csr_matrix
    B: sp.csr_matrix
    f: Array
    g: Array
    fixed: Array
    u_fixed: Array
    dofmap: DofMap
    B_full: Optional[sp.csr_matrix] = None
    T: Optional[sp.csr_matrix] = None

    def __post_init__(self):
        if self.B_full is None:
            self.B_full = self.B

    @property
    def free(self) -> Array:
        mask = np.ones(self.K.shape[0], bool)
        mask[self.fixed] = False
        return np.flatnonzero(mask)

    def reduced(self, T) -> "SaddleSystem":
        T = sp.csr_matrix(T)
        Tt = T.T.tocsr()
        T_all = T if self.T is None else (self.T @ T).tocsr()
        return replace(self, B=(Tt @ self.B).tocsr(), g=Tt @ self.g, T=T_all)

    def eliminated(self):
        """Free-dof blocks ``(K_ff, B_f, f_f, g_f, kept_rows)``."""
        free, fixed = self.free, self.fixed
        K = self.K.tocsr()
        B = self.B.tocsr()
        Kff = K[free][:, free]
        f = self.f[free] - K[free][:, fixed] @ self.u_fixed
        Bf = B[:, free]
        g = self.g - B[:, fixed] @ self.u_fixed
        nnz = np.diff(Bf.tocsr().indptr)
        rownorm = np.sqrt(np.asarray(Bf.multiply(Bf).sum(axis=1)).ravel())
        scale = rownorm.max() if rownorm.size else 0.0
        kept = np.flatnonzero((nnz > 0) & (rownorm > 1e-14 * scale))
        return Kff.tocsr(), Bf[kept].tocsr(), f, g[kept], kept

    def matrix(self):
        """Eliminated saddle matrix and right-hand side."""
        Kff, Bf, f, g, _ = self.eliminated()
        A = sp.bmat([[Kff, Bf.T], [Bf, None]], format="csc")
        return A, np.concatenate([f, g])


@dataclass
class Solution:
    u: Dict[str, Array]
    lam: Dict[str, Array]
    x: Array
    lam_full: Array
    residual: float
    reactions: Array
    system: Optional[SaddleSystem] = None
    info: Dict[str, float] = field(default_factory=dict)


def _edge_owner(mesh: Mesh, active: Optional[Array] = None) -> Dict[Tuple[int, int], int]:
    owner = {}
    for el in mesh.elements:
        if active is not None and not active[el.id]:
            continue
        nd = el.nodes
        for a, b in zip(nd, nd[1:] + nd[:1]):
            owner.setdefault((min(a, b), max(a, b)), el.id)
    return owner


_EDGE = gauss_rule(L2, 3)


def polyline_load(mesh: Mesh, name: str, bc: BoundaryCondition,
                  active: Optional[Array] = None) -> Array:
    """Consistent nodal forces ``(n_nodes, 2)`` of a surface load on a polyline."""
    pl = mesh.polylines[name]
    owner = _edge_owner(mesh, active)
    cent = mesh.centroids()
    F = np.zeros((mesh.n_nodes, 2))
    N = shape_values(L2, _EDGE.points)              # (3, 2)
    for a, b in pl.edges:
        xa, xb = mesh.coords[a], mesh.coords[b]
        d = xb - xa
        h = float(np.hypot(*d))
        n = np.array([d[1], -d[0]]) / h
        e = owner.get((min(a, b), max(a, b)))
        if e is None:
            continue
        if np.dot(cent[e] - 0.5 * (xa + xb), n) > 0:
            n = -n
        X = N @ np.array([xa, xb])
        if bc.kind == TRACTION:
            t = np.tile(np.asarray(bc.vector, dtype=float), (len(X), 1))
        else:
            p = bc.value + X @ np.asarray(bc.gradient, dtype=float)
            t = -p[:, None] * n[None, :]
        w = _EDGE.weights * 0.5 * h
        F[[a, b]] += np.einsum("g,gn,gc->nc", w, N, t)
    return F


def stiffness_triplets(mesh: Mesh, material, dofs: Array, classes: Optional[Array] = None,
                       cells: Optional[Mapping[int, Sequence]] = None):
    """COO triplets of the stiffness of one domain.

    Standard elements use the default Gauss rule, blending elements their
    integration cells, discarded elements are skipped.
    """
    C = constitutive_matrix(material)
    cells = cells or {}
    rows, cols, vals = [], [], []
    for kind, (ids, conn) in mesh.groups().items():
        sel = np.ones(len(ids), bool)
        if classes is not None:
            sel &= classes[ids] == ElementClass.STANDARD
        sel &= np.array([i not in cells for i in ids], bool)
        if sel.any():
            Ke = stiffness_batch(kind, mesh.coords[conn[sel]], C)
            ed = dofs[conn[sel]].reshape(len(Ke), -1)
            rows.append(np.repeat(ed, ed.shape[1], axis=1).ravel())
            cols.append(np.tile(ed, (1, ed.shape[1])).ravel())
            vals.append(Ke.ravel())
    for e in sorted(cells):
        if classes is not None and classes[e] == ElementClass.DISCARDED:
            continue
        el = mesh.elements[e]
        Ke = element_stiffness(el, mesh, material, cells[e])
        ed = dofs[list(el.nodes)].ravel()
        rows.append(np.repeat(ed, len(ed)))
        cols.append(np.tile(ed, len(ed)))
        vals.append(Ke.ravel())
    if not rows:
        return np.zeros(0, int), np.zeros(0, int), np.zeros(0)
    r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    if np.any(r < 0) or np.any(c < 0):
        raise SolverError("active element references an inactive dof")
    return r, c, v


def mortar_triplets(elements, patch_dofs: Array, chain_nodes: Array, host_dofs: Array,
                    row0: int):
    """COO triplets of ``B`` for one tying (rows ``row0 + 2 slot + c``)."""
    rows, cols, vals = [], [], []
    for me in elements:
        p_nodes = chain_nodes[list(me.mortar_nodes)]
        for l, s in enumerate(me.slots):
            for c in (0, 1):
                r = row0 + 2 * s + c
                for m, pn in enumerate(p_nodes):
                    rows.append(r); cols.append(patch_dofs[pn, c]); vals.append(me.D[l, m])
                for i, hn in enumerate(me.host_nodes):
                    rows.append(r); cols.append(host_dofs[hn, c]); vals.append(-me.M[l, i])
    r = np.array(rows, dtype=int)
    c = np.array(cols, dtype=int)
    if np.any(c < 0):
        raise SolverError("mortar element references an inactive dof")
    return r, c, np.array(vals)


def solve(system: SaddleSystem, check: bool = True) -> Solution:
    """Eliminate Dirichlet dofs, factorize with SuperLU and expand the result."""
    Kff, Bf, f, g, kept = system.eliminated()
    A = sp.bmat([[Kff, Bf.T], [Bf, None]], format="csc") if Bf.shape[0] else Kff.tocsc()
    rhs = np.concatenate([f, g])
    if A.shape[0] == 0:
        raise SolverError("empty system")
    try:
        lu = spla.splu(A, permc_spec="COLAMD")
        y = lu.solve(rhs)
    except RuntimeError as exc:
        raise SolverError(f"factorization failed: {exc}") from exc
    if not np.all(np.isfinite(y)):
        raise SolverError("non-finite solution (singular system)")
    res = float(np.max(np.abs(A @ y - rhs), initial=0.0))
    An = float(abs(A).sum(axis=1).max())
    bound = 1e-10 * (An * float(np.max(np.abs(y), initial=0.0)) + float(np.max(np.abs(rhs), initial=0.0)))
    if check and res > bound:
        # a floating pivot close to zero slips through SuperLU; refine once
        y += lu.solve(rhs - A @ y)
        res = float(np.max(np.abs(A @ y - rhs), initial=0.0))
        if res > max(bound, 1e-8 * float(np.max(np.abs(rhs), initial=1.0))):
            raise SolverError(f"solve residual {res:.3e} exceeds tolerance (singular system?)")
    nf = Kff.shape[0]
    x = np.zeros(system.K.shape[0])
    x[system.free] = y[:nf]
    x[system.fixed] = system.u_fixed
    lam_red = np.zeros(system.B.shape[0])
    lam_red[kept] = y[nf:]
    lam_full = system.T @ lam_red if system.T is not None else lam_red
    reactions = system.K @ x - system.f + system.B_full.T @ lam_full
    dm = system.dofmap
    u = {}
    for name, d in dm.node_dofs.items():
        U = np.full(d.shape, np.nan)
        ok = d[:, 0] >= 0
        U[ok] = x[d[ok]]
        u[name] = U
    lam = {name: lam_full[dm.mult_rows(name)] for name in dm.mult_offset}
    return Solution(u, lam, x, lam_full, res, reactions, system,
                    {"n_primal": float(nf), "n_dual": float(Bf.shape[0])})


def equilibrium_error(sol: Solution) -> float:
    """Relative imbalance between reactions at fixed dofs and applied loads.

    Reactions are ``K u - f + B^T lambda`` restricted to fixed dofs; their sum
    plus the total applied load vanishes per component.
    """
    s = sol.system
    comp = np.zeros(s.K.shape[0], dtype=int)
    for d in s.dofmap.node_dofs.values():
        ok = d[:, 0] >= 0
        comp[d[ok, 1]] = 1
    fixed = np.zeros(s.K.shape[0], bool)
    fixed[s.fixed] = True
    imbalance = [sol.reactions[(comp == c) & fixed].sum() + s.f[comp == c].sum() for c in (0, 1)]
    scale = max(np.abs(s.f).sum(), np.abs(sol.reactions[s.fixed]).sum(), 1e-300)
    return float(np.max(np.abs(imbalance)) / scale)
