"""Closed-form stresses of a circular elastic inclusion under remote uniaxial tension.

Inclusion (material 1, radius ``R``) in an infinite matrix (material 2)
loaded by ``sigma_xx = sigma0`` at infinity.  Polar angle ``theta`` is
measured from the loading axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def kolosov(nu: float, formulation: str = "plane_strain") -> float:
    if formulation == "plane_strain":
        return 3.0 - 4.0 * nu
    if formulation == "plane_stress":
        return (3.0 - nu) / (1.0 + nu)
    raise ValueError(f"unknown formulation {formulation!r}")


@dataclass(frozen=True)
class EshelbyParams:
    R: float
    sigma0: float
    E1: float
    nu1: float
    E2: float
    nu2: float
    formulation: str = "plane_strain"

    @property
    def mu1(self) -> float:
        return self.E1 / (2.0 * (1.0 + self.nu1))

    @property
    def mu2(self) -> float:
        return self.E2 / (2.0 * (1.0 + self.nu2))

    @property
    def k1(self) -> float:
        return kolosov(self.nu1, self.formulation)

    @property
    def k2(self) -> float:
        return kolosov(self.nu2, self.formulation)

    @property
    def constants(self):
        """``(beta1, delta1, beta2, delta2, gamma2)``."""
        m1, m2, k1, k2 = self.mu1, self.mu2, self.k1, self.k2
        beta1 = m1 * (k2 + 1.0) / (2.0 * m1 + m2 * (k1 - 1.0))
        delta1 = m1 * (k2 + 1.0) / (m2 + m1 * k2)
        beta2 = -2.0 * (m1 - m2) / (m2 + m1 * k2)
        delta2 = (m1 - m2) / (m2 + m1 * k2)
        gamma2 = (m2 * (k1 - 1.0) - m1 * (k2 - 1.0)) / (2.0 * m1 + m2 * (k1 - 1.0))
        return beta1, delta1, beta2, delta2, gamma2


def eshelby_stress(params: EshelbyParams, r, theta, side: str = "auto"):
    """Polar stresses ``(s_rr, s_tt, s_rt)``.

    ``side`` selects the inclusion (``"in"``) or matrix (``"out"``)
    expression; ``"auto"`` uses ``r <= R`` for the inclusion.
    """
    r = np.asarray(r, dtype=float)
    th = np.asarray(theta, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    b1, d1, b2, d2, g2 = params.constants
    s = 0.5 * params.sigma0
    c2, s2 = np.cos(2.0 * th), np.sin(2.0 * th)
    in_rr = s * (b1 + d1 * c2)
    in_tt = s * (b1 - d1 * c2)
    in_rt = -s * d1 * s2
    with np.errstate(divide="ignore", invalid="ignore"):
        a2 = (params.R / r) ** 2
    a4 = a2 * a2
    out_rr = s * (1.0 - g2 * a2 + (1.0 - 2.0 * b2 * a2 - 3.0 * d2 * a4) * c2)
    out_tt = s * (1.0 + g2 * a2 - (1.0 - 3.0 * d2 * a4) * c2)
    out_rt = -s * (1.0 + b2 * a2 + 3.0 * d2 * a4) * s2
    if side == "in":
        return in_rr + 0 * r, in_tt + 0 * r, in_rt + 0 * r
    if side == "out":
        return out_rr, out_tt, out_rt
    inside = r <= params.R
    return (np.where(inside, in_rr, out_rr), np.where(inside, in_tt, out_tt),
            np.where(inside, in_rt, out_rt))


def polar_to_cartesian(s_rr, s_tt, s_rt, theta):
    """Rotate polar stress components to ``(s_xx, s_yy, s_xy)``."""
    c, s = np.cos(theta), np.sin(theta)
    sxx = s_rr * c * c + s_tt * s * s - 2.0 * s_rt * s * c
    syy = s_rr * s * s + s_tt * c * c + 2.0 * s_rt * s * c
    sxy = (s_rr - s_tt) * s * c + s_rt * (c * c - s * s)
    return sxx, syy, sxy
