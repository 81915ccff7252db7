"""Mortar tying of patch meshes embedded in a host mesh.

The host is integrated selectively over the part not covered by its
patches; patch boundaries are glued to the host volume with Lagrange
multipliers, optionally coarse-grained to remove interface oscillations.
"""
from .analytic import EshelbyParams, eshelby_stress
from .elasticity import Material
from .errors import (ConfigError, GeometryError, MortexError, NonConvergenceError,
                     OutsideElementError, SolverError)
from .mesh import Mesh, generate_disk_mesh, generate_ogrid_mesh, generate_structured_mesh
from .model import Domain, Problem, Result, Tying
from .solver import BoundaryCondition

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition", "ConfigError", "Domain", "EshelbyParams", "GeometryError", "Material",
    "Mesh", "MortexError", "NonConvergenceError", "OutsideElementError", "Problem", "Result",
    "SolverError", "Tying", "eshelby_stress", "generate_disk_mesh", "generate_ogrid_mesh",
    "generate_structured_mesh",
]
