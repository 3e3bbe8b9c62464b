"""P1 finite elements for Steklov eigenproblems on strips with oscillating boundaries."""

__version__ = "0.1.0"

from .geometry import DomainSpec, ProfileSpec, c_b, exact_perimeter, g_eps
from .kernels import BACKEND
from .mesh import Mesh, MeshResolution, build_disk_mesh, build_strip_mesh, write_vtk
from .steklov import SteklovSpectrum, solve_steklov

__all__ = [
    "BACKEND",
    "DomainSpec",
    "Mesh",
    "MeshResolution",
    "ProfileSpec",
    "SteklovSpectrum",
    "build_disk_mesh",
    "build_strip_mesh",
    "c_b",
    "exact_perimeter",
    "g_eps",
    "solve_steklov",
    "write_vtk",
]
