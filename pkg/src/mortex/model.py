"""Problem pipeline: meshes -> cut -> mortar -> coarse-graining -> solve.

A :class:`Problem` holds named domains (a host and patches embedded in it,
possibly nested), the tyings between patch boundary chains and their hosts,
and boundary conditions.  ``prepare`` runs the geometric stages once; many
solves with different multiplier schemes can then reuse them.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from . import cgi
from .cut import CutState, ElementClass, Indicator, cut_host, nudge_outline
from .elasticity import Material, StressField, recover_nodal_stress
from .errors import ConfigError, GeometryError, SolverError
from .mesh import Mesh
from .mortar import P0, P1, Chain, build_mortar_elements, build_segments
from .solver import (DIRICHLET, BoundaryCondition, DofMap, SaddleSystem, Solution,
                     mortar_triplets, polyline_load, solve, stiffness_triplets)

log = logging.getLogger(__name__)

Array = np.ndarray

SCHEMES = ("sli-p0", "sli-p1", "cgi")


@dataclass
class Domain:
    name: str
    mesh: Mesh
    material: Material
    host: Optional[str] = None


@dataclass
class Tying:
    """Patch boundary polyline glued to the volume of the patch's host."""
    patch: str
    polyline: str
    center: Optional[Sequence[float]] = None


@dataclass
class TyingResult:
    chain: Chain
    traction: Array        # traction acting on the patch at chain nodes
    normal: Array          # outward patch normal at chain nodes
    lam: Array             # raw multipliers per slot

    @property
    def normal_stress(self) -> Array:
        return np.einsum("ij,ij->i", self.traction, self.normal)

    def radial(self, center) -> Array:
        d = self.chain.X - np.asarray(center, dtype=float)
        r = np.hypot(d[:, 0], d[:, 1])
        if np.any(r == 0.0):
            raise GeometryError("chain node at the projection centre")
        return np.einsum("ij,ij->i", self.traction, d / r[:, None])


@dataclass
class Result:
    problem: "Problem"
    solution: Solution
    scheme: str
    kappa: Optional[int]
    tyings: List[TyingResult] = field(default_factory=list)
    _stress: Dict[str, StressField] = field(default_factory=dict)

    def u(self, domain: str) -> Array:
        return self.solution.u[domain]

    def stress(self, domain: str) -> StressField:
        if domain not in self._stress:
            p = self.problem
            mesh, classes, cells = p.computation_mesh(domain)
            active = None if classes is None else classes != ElementClass.DISCARDED
            self._stress[domain] = recover_nodal_stress(
                mesh, np.nan_to_num(self.u(domain)), p.domains[domain].material,
                cells=cells, active=active)
        return self._stress[domain]


def _outward_node_normals(mesh: Mesh, chain: Chain) -> Array:
    from .solver import _edge_owner
    owner = _edge_owner(mesh)
    cent = mesh.centroids()
    n_e = np.zeros((chain.n_edges, 2))
    for k in range(chain.n_edges):
        ia, ib = chain.edge(k)
        a, b = chain.nodes[ia], chain.nodes[ib]
        d = chain.X[ib] - chain.X[ia]
        n = np.array([d[1], -d[0]]) / np.hypot(*d)
        e = owner.get((min(a, b), max(a, b)))
        if e is not None and np.dot(cent[e] - 0.5 * (chain.X[ia] + chain.X[ib]), n) > 0:
            n = -n
        n_e[k] = n
    out = np.zeros((chain.n_nodes, 2))
    for k in range(chain.n_edges):
        ia, ib = chain.edge(k)
        out[ia] += n_e[k]
        out[ib] += n_e[k]
    return out / np.hypot(out[:, 0], out[:, 1])[:, None]


class Problem:
    """Tied multi-domain elasticity problem."""

    def __init__(self, domains: Sequence[Domain], tyings: Sequence[Tying] = (),
                 bcs: Sequence[BoundaryCondition] = (), triangulate: bool = False,
                 nudge: bool = True, drop_fixed_multipliers: bool = True,
                 cell_rule: str = "physical"):
        self.domains: Dict[str, Domain] = {}
        for d in domains:
            if d.name in self.domains:
                raise ConfigError(f"duplicate domain {d.name!r}")
            self.domains[d.name] = d
        for d in self.domains.values():
            if d.host is not None and d.host not in self.domains:
                raise ConfigError(f"domain {d.name!r} embedded in unknown domain {d.host!r}")
        self.order = _host_order(self.domains)
        self.tyings = list(tyings)
        for t in self.tyings:
            if t.patch not in self.domains or self.domains[t.patch].host is None:
                raise ConfigError(f"tying patch {t.patch!r} is not an embedded domain")
            if t.polyline not in self.domains[t.patch].mesh.polylines:
                raise ConfigError(f"unknown polyline {t.polyline!r} on {t.patch!r}")
        self.bcs = list(bcs)
        self.triangulate = bool(triangulate)
        self.nudge = nudge
        self.drop_fixed_multipliers = drop_fixed_multipliers
        self.cell_rule = cell_rule
        self.cuts: Dict[str, CutState] = {}
        self.chains: List[Chain] = []
        self.segments: List[list] = []
        self.contrast: List[cgi.MeshContrast] = []
        self._mortar: Dict[str, List[list]] = {}
        self._prepared = False

    # -- geometry --------------------------------------------------------------
    def prepare(self) -> "Problem":
        if self._prepared:
            return self
        for name in self.order:
            d = self.domains[name]
            if d.host is None or not self.nudge:
                continue
            host = self.domains[d.host].mesh
            coords = d.mesh.coords.copy()
            moved, done = 0, set()
            # tied chains first, along their own direction, then whole outlines
            for t in self.tyings:
                if t.patch == name:
                    pl = d.mesh.polylines[t.polyline]
                    moved += nudge_outline(coords, pl.nodes, pl.closed, host, done=done)
            for loop in d.mesh.boundary_loops():
                moved += nudge_outline(coords, loop, True, host, done=done)
            if moved:
                m = d.mesh
                d.mesh = Mesh(coords, [(e.kind, e.nodes) for e in m.elements],
                              m.node_sets, m.polylines)
        for name in self.order:
            patches = [d.mesh for d in self.domains.values() if d.host == name]
            if patches:
                ind = Indicator.from_patches(patches)
                self.cuts[name] = cut_host(self.domains[name].mesh, ind, self.triangulate,
                                             self.cell_rule)
        for t in self.tyings:
            pd = self.domains[t.patch]
            chain = Chain.from_polyline(pd.mesh, t.polyline)
            segs = build_segments(chain, self.cuts[pd.host])
            self.chains.append(chain)
            self.segments.append(segs)
            self.contrast.append(cgi.compute_mesh_contrast(segs, self.cuts[pd.host].parent))
        self._prepared = True
        return self

    def computation_mesh(self, name: str):
        """``(mesh, classes, cells)`` used to integrate domain ``name``."""
        if name in self.cuts:
            c = self.cuts[name]
            return c.mesh, c.classes, c.cells
        return self.domains[name].mesh, None, None

    def mortar_elements(self, dual: str) -> List[list]:
        self.prepare()
        if dual not in self._mortar:
            self._mortar[dual] = [
                build_mortar_elements(ch, self.cuts[self.domains[t.patch].host], segs, dual)
                for t, ch, segs in zip(self.tyings, self.chains, self.segments)]
        return self._mortar[dual]

    # -- algebra ---------------------------------------------------------------
    def assemble(self, dual: str = P1) -> SaddleSystem:
        self.prepare()
        dm = DofMap()
        rows, cols, vals = [], [], []
        for name in self.order:
            mesh, classes, cells = self.computation_mesh(name)
            active = np.zeros(mesh.n_nodes, bool)
            for el in mesh.elements:
                if classes is None or classes[el.id] != ElementClass.DISCARDED:
                    active[list(el.nodes)] = True
            dofs = dm.add_domain(name, active)
            r, c, v = stiffness_triplets(mesh, self.domains[name].material, dofs, classes, cells)
            rows.append(r); cols.append(c); vals.append(v)
        n = dm.n_primal
        K = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n)).tocsr()
        f = np.zeros(n)
        fixed: Dict[int, float] = {}
        for bc in self.bcs:
            if bc.domain not in self.domains:
                raise ConfigError(f"boundary condition on unknown domain {bc.domain!r}")
            mesh, classes, _ = self.computation_mesh(bc.domain)
            dofs = dm.node_dofs[bc.domain]
            if bc.kind == DIRICHLET:
                if bc.target not in mesh.node_sets:
                    raise ConfigError(f"unknown node set {bc.target!r} on {bc.domain!r}")
                ids = mesh.node_sets[bc.target]
                dd = dofs[ids, bc.component]
                if np.any(dd < 0):
                    log.warning("skipping Dirichlet condition on %d inactive nodes", int(np.sum(dd < 0)))
                for k in dd[dd >= 0]:
                    fixed[int(k)] = float(bc.value)
            else:
                if bc.target not in mesh.polylines:
                    raise ConfigError(f"unknown polyline {bc.target!r} on {bc.domain!r}")
                active = None if classes is None else classes != ElementClass.DISCARDED
                F = polyline_load(mesh, bc.target, bc, active)
                ok = dofs[:, 0] >= 0
                if np.any(F[~ok] != 0.0):
                    log.warning("load on inactive nodes of %s ignored", bc.domain)
                np.add.at(f, dofs[ok].ravel(), F[ok].ravel())
        brow, bcol, bval = [], [], []
        for t, ch, mes in zip(self.tyings, self.chains, self.mortar_elements(dual)):
            n_slots = ch.n_nodes if dual == P1 else ch.n_edges
            row0 = dm.add_multipliers(t.patch + ":" + t.polyline, n_slots)
            host = self.domains[t.patch].host
            r, c, v = mortar_triplets(mes, dm.node_dofs[t.patch], ch.nodes,
                                      dm.node_dofs[host], row0)
            brow.append(r); bcol.append(c); bval.append(v)
        m = dm.n_dual
        if brow and self.drop_fixed_multipliers:
            # a multiplier whose patch-side dof is prescribed only duplicates
            # the Dirichlet condition and makes the system near-singular
            r, c, v = np.concatenate(brow), np.concatenate(bcol), np.concatenate(bval)
            dead = set()
            for t, ch in zip(self.tyings, self.chains):
                if dual != P1:
                    continue
                rows_t = dm.mult_rows(t.patch + ":" + t.polyline)
                pd = dm.node_dofs[t.patch][ch.nodes]
                for comp in (0, 1):
                    hit = np.array([int(d) in fixed for d in pd[:, comp]], bool)
                    dead.update(rows_t[hit, comp].tolist())
            keep = ~np.isin(r, np.fromiter(dead, dtype=int, count=len(dead)))
            brow, bcol, bval = [r[keep]], [c[keep]], [v[keep]]
        if brow:
            B = sp.coo_matrix((np.concatenate(bval), (np.concatenate(brow), np.concatenate(bcol))),
                              shape=(m, n)).tocsr()
        else:
            B = sp.csr_matrix((0, n))
        fx = np.array(sorted(fixed), dtype=int)
        ux = np.array([fixed[k] for k in fx])
        return SaddleSystem(K, B, f, np.zeros(m), fx, ux, dm)

    def cgi_transformation(self, kappa, local: bool = False):
        """Block-diagonal ``T`` over all tyings, or None when nothing is condensed."""
        blocks, any_mpc = [], False
        for k, ch in enumerate(self.chains):
            kap = self.resolve_kappa(kappa, k)
            L = ch.edge_lengths()
            if local:
                ek = cgi.edge_kappa_from_contrast(self.segments[k], self.contrast[k], ch.n_edges,
                                                  self.cuts[self.domains[self.tyings[k].patch].host].parent)
                sss = cgi.partition_supersegments_local(L, ek, ch.closed, ch.nodes)
            else:
                sss = cgi.partition_supersegments(L, kap, ch.closed, ch.nodes)
            mpcs = cgi.constraints(sss)
            any_mpc |= bool(mpcs)
            T, _ = cgi.transformation(ch.n_nodes, mpcs)
            blocks.append(T)
        if not any_mpc:
            return None
        return sp.block_diag(blocks, format="csr")

    def resolve_kappa(self, kappa, k: int = 0) -> int:
        if isinstance(kappa, dict):
            kappa = kappa.get(k, 1)
        if kappa is None:
            return 1
        if kappa == "auto":
            return max(1, int(round(self.contrast[k].global_value)))
        return int(kappa)

    def _check_supports(self, system: SaddleSystem) -> None:
        """Raise when a group of tied domains keeps a rigid-body mode."""
        group = {n: n for n in self.domains}

        def root(n):
            while group[n] != n:
                n = group[n]
            return n
        for t in self.tyings:
            group[root(t.patch)] = root(self.domains[t.patch].host)
        fixed = np.zeros(system.K.shape[0], bool)
        fixed[system.fixed] = True
        pts: Dict[str, list] = {}
        for name, d in system.dofmap.node_dofs.items():
            X = self.domains[name].mesh.coords
            for comp in (0, 1):
                dof = d[:, comp]
                sel = (dof >= 0) & fixed[np.maximum(dof, 0)]
                pts.setdefault(root(name), []).append((X[sel], np.full(sel.sum(), comp)))
        for g in sorted({root(n) for n in self.domains}):
            X = np.vstack([x for x, _ in pts.get(g, [])] or [np.zeros((0, 2))])
            comps = np.concatenate([c for _, c in pts.get(g, [])] or [np.zeros(0, int)])
            if _rigid_mode_rank(X, comps) < 3:
                members = sorted(n for n in self.domains if root(n) == g)
                raise SolverError(f"domains {members} are not fully supported; "
                                  "Dirichlet conditions leave a rigid-body mode (singular system)")

    def solve(self, scheme: str = "sli-p1", kappa: Union[int, str, None] = None,
              local: bool = False) -> Result:
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
        self.prepare()
        dual = P0 if scheme == "sli-p0" else P1
        system = self.assemble(dual)
        if scheme == "cgi":
            system = cgi.apply_mpc(system, self.cgi_transformation(kappa if kappa is not None else "auto", local))
            kap = None if local else self.resolve_kappa(kappa if kappa is not None else "auto")
        else:
            kap = None
        self._check_supports(system)
        sol = solve(system)
        res = Result(self, sol, scheme, kap)
        for t, ch in zip(self.tyings, self.chains):
            lam = sol.lam[t.patch + ":" + t.polyline]
            if dual == P1:
                nodal = -lam
            else:
                nodal = np.zeros((ch.n_nodes, 2))
                cnt = np.zeros(ch.n_nodes)
                for k in range(ch.n_edges):
                    for i in ch.edge(k):
                        nodal[i] -= lam[k]
                        cnt[i] += 1
                nodal /= cnt[:, None]
            normal = _outward_node_normals(self.domains[t.patch].mesh, ch)
            res.tyings.append(TyingResult(ch, nodal, normal, lam))
        return res


def _rigid_mode_rank(X: Array, comps: Array) -> int:
    """Rank of the plane rigid modes restricted to fixed components ``comps`` at ``X``."""
    if not len(X):
        return 0
    c = X.mean(axis=0)
    L = max(float(np.ptp(X, axis=0).max()), 1.0e-300)
    rows = np.zeros((len(X), 3))
    rows[:, 0] = comps == 0
    rows[:, 1] = comps == 1
    rows[:, 2] = np.where(comps == 0, -(X[:, 1] - c[1]), X[:, 0] - c[0]) / L
    sv = np.linalg.svd(rows, compute_uv=False)
    return int(np.sum(sv > 1e-10 * sv[0])) if sv[0] > 0 else 0


def _host_order(domains: Dict[str, Domain]) -> List[str]:
    """Domains sorted so that every host precedes the patches it carries."""
    order, state = [], {}

    def visit(n, stack=()):
        if state.get(n) == 2:
            return
        if n in stack:
            raise ConfigError("cyclic domain nesting")
        h = domains[n].host
        if h is not None:
            visit(h, stack + (n,))
        state[n] = 2
        order.append(n)

    for n in domains:
        visit(n)
    return order
