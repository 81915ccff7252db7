"""Plane linear elasticity: Hooke matrix, element stiffness, stress recovery.

Voigt convention throughout: ``(xx, yy, xy)`` with engineering shear strain
``gamma_xy = 2 eps_xy``.  Element dofs are node-major, ``(ux0, uy0, ux1, ...)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from .errors import GeometryError
from .mesh import Element, Mesh, gauss_rule, shape_gradients, shape_values

Array = np.ndarray

PLANE_STRAIN = "plane_strain"
PLANE_STRESS = "plane_stress"


@dataclass(frozen=True)
class Material:
    E: float
    nu: float
    formulation: str = PLANE_STRAIN

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError(f"Young's modulus must be positive, got {self.E}")
        if not -1.0 < self.nu < 0.5:
            raise ValueError(f"Poisson's ratio must lie in (-1, 0.5), got {self.nu}")
        if self.formulation not in (PLANE_STRAIN, PLANE_STRESS):
            raise ValueError(f"unknown formulation {self.formulation!r}")

    @property
    def shear_modulus(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))


def constitutive_matrix(material: Material) -> Array:
    E, nu = material.E, material.nu
    if material.formulation == PLANE_STRAIN:
        c = E / ((1 + nu) * (1 - 2 * nu))
        return c * np.array([[1 - nu, nu, 0.0],
                             [nu, 1 - nu, 0.0],
                             [0.0, 0.0, 0.5 - nu]])
    c = E / (1 - nu * nu)
    return c * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 0.5 * (1 - nu)]])


def physical_gradients(kind: str, xe: Array, parent: Array):
    """Shape gradients w.r.t. physical coordinates and Jacobian determinants.

    ``xe`` has shape ``(..., n, 2)`` and ``parent`` ``(ng, 2)``; results have
    shapes ``(..., ng, n, 2)`` and ``(..., ng)``.
    """
    g = shape_gradients(kind, parent)                      # (ng, n, 2)
    J = np.einsum("...na,gnb->...gab", xe, g)              # dX_a / dxi_b
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1]
    inv[..., 1, 1] = J[..., 0, 0]
    inv[..., 0, 1] = -J[..., 0, 1]
    inv[..., 1, 0] = -J[..., 1, 0]
    inv /= det[..., None, None]
    dN = np.einsum("gnb,...gba->...gna", g, inv)
    return dN, det


def strain_matrix(dN: Array) -> Array:
    """B matrix of shape ``(..., 3, 2n)`` from physical gradients ``(..., n, 2)``."""
    n = dN.shape[-2]
    B = np.zeros(dN.shape[:-2] + (3, 2 * n))
    B[..., 0, 0::2] = dN[..., 0]
    B[..., 1, 1::2] = dN[..., 1]
    B[..., 2, 0::2] = dN[..., 1]
    B[..., 2, 1::2] = dN[..., 0]
    return B


def stiffness_batch(kind: str, xe: Array, C: Array, points: Optional[Array] = None,
                    weights: Optional[Array] = None, physical_weights: bool = False) -> Array:
    """Stiffness of a stack of elements ``xe`` (``(ne, n, 2)``).

    Without ``points`` the default Gauss rule is used.  With
    ``physical_weights`` the weights already carry the area measure (cut
    integration cells) and the Jacobian determinant is not applied again.
    """
    if points is None:
        rule = gauss_rule(kind)
        points, weights = rule.points, rule.weights
    dN, det = physical_gradients(kind, xe, np.asarray(points, dtype=float))
    if np.any(det <= 0.0):
        raise GeometryError("non-positive Jacobian in element stiffness")
    B = strain_matrix(dN)
    w = np.asarray(weights, dtype=float)
    w = w if physical_weights else w * det
    return np.einsum("...gij,jk,...gkl,...g->...il", B.swapaxes(-1, -2), C, B, w)


def element_stiffness(element: Element, mesh: Mesh, material: Material,
                      cells: Optional[Sequence] = None) -> Array:
    """Stiffness of one element, optionally restricted to integration cells.

    ``cells`` are objects exposing parent ``points`` and physical-area
    ``weights`` (see :class:`mortex.cut.IntegrationCell`).
    """
    xe = mesh.coords[list(element.nodes)]
    C = constitutive_matrix(material)
    if cells is None:
        return stiffness_batch(element.kind, xe, C)
    n = 2 * len(element.nodes)
    K = np.zeros((n, n))
    if len(cells):
        pts = np.vstack([c.points for c in cells])
        w = np.concatenate([c.weights for c in cells])
        K = stiffness_batch(element.kind, xe, C, pts, w, physical_weights=True)
    return K


def element_stresses(kind: str, xe: Array, ue: Array, C: Array, points: Array) -> Array:
    """Stresses ``(..., ng, 3)`` at parent points for element displacements ``ue``."""
    dN, _ = physical_gradients(kind, xe, points)
    B = strain_matrix(dN)
    flat = ue.reshape(ue.shape[:-2] + (-1,))
    eps = np.einsum("...gij,...j->...gi", B, flat)
    return eps @ C.T


@dataclass
class StressField:
    """Gauss-point stresses per element and nodal averages.

    ``gauss`` maps element id to ``(X, sigma)`` with physical Gauss points
    ``X`` (``(ng, 2)``) and stresses ``sigma`` (``(ng, 3)``).  ``nodal`` is
    ``(n_nodes, 3)``; nodes without an active element hold NaN.
    """
    gauss: Dict[int, tuple] = field(default_factory=dict)
    nodal: Optional[Array] = None


def recover_nodal_stress(mesh: Mesh, u: Array, material: Material,
                         cells: Optional[Mapping[int, Sequence]] = None,
                         active: Optional[Array] = None,
                         keep_gauss: bool = False) -> StressField:
    """Least-squares Gauss-to-node extrapolation followed by nodal averaging.

    Elements listed in ``cells`` pool the Gauss data of their integration
    cells before the fit; elements with ``active[e] == False`` are skipped.
    """
    u = np.asarray(u, dtype=float).reshape(-1, 2)
    C = constitutive_matrix(material)
    cells = cells or {}
    active = np.ones(mesh.n_elements, bool) if active is None else np.asarray(active, bool)
    acc = np.zeros((mesh.n_nodes, 3))
    cnt = np.zeros(mesh.n_nodes)
    out = StressField()
    for kind, (ids, conn) in mesh.groups().items():
        sel = active[ids] & np.array([i not in cells for i in ids], bool)
        ids_s, conn_s = ids[sel], conn[sel]
        if len(ids_s):
            rule = gauss_rule(kind)
            sig = element_stresses(kind, mesh.coords[conn_s], u[conn_s], C, rule.points)
            N = shape_values(kind, rule.points)
            ext = np.linalg.pinv(N)
            nodal = np.einsum("ng,egc->enc", ext, sig)
            np.add.at(acc, conn_s.ravel(), nodal.reshape(-1, 3))
            np.add.at(cnt, conn_s.ravel(), 1.0)
            if keep_gauss:
                X = np.einsum("gn,ena->ega", N, mesh.coords[conn_s])
                for k, e in enumerate(ids_s):
                    out.gauss[int(e)] = (X[k], sig[k])
    for e, cl in cells.items():
        if not active[e] or not len(cl):
            continue
        el = mesh.elements[e]
        pts = np.vstack([c.points for c in cl])
        xe = mesh.coords[list(el.nodes)]
        sig = element_stresses(el.kind, xe, u[list(el.nodes)], C, pts)
        N = shape_values(el.kind, pts)
        nodal = np.linalg.lstsq(N, sig, rcond=None)[0]
        acc[list(el.nodes)] += nodal
        cnt[list(el.nodes)] += 1.0
        if keep_gauss:
            out.gauss[int(e)] = (N @ xe, sig)
    with np.errstate(invalid="ignore", divide="ignore"):
        out.nodal = acc / cnt[:, None]
    out.nodal[cnt == 0] = np.nan
    return out
