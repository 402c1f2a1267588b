"""Soft densities of packings: normed-plane decompositions and lattice ball packings in space."""

from .errors import SoftPackError
from .gauge2d import ConvexBody2D, Homothet2D, circumdisk, gauge_norm, load_body, smallest_enclosing_homothet
from .lat3d import Lattice3D, Polyhedron3D, bcc, covering_radius, cubic, dv_cell, fcc, minimal_vectors
from .soft2d import Lattice2D, SoftParams, cell_soft_density, lattice_soft_density, optimal_lattice_search
from .softvol3d import BallCluster, ball_polytope_volume, csikos_derivative, csikos_walls, soft_density_3d
from .tess2d import PackingConfig2D, delaunay, molnar_decomposition, refined_molnar, voronoi_cell

__version__ = "0.1.0"

__all__ = [
    "SoftPackError",
    "ConvexBody2D",
    "Homothet2D",
    "circumdisk",
    "gauge_norm",
    "load_body",
    "smallest_enclosing_homothet",
    "Lattice3D",
    "Polyhedron3D",
    "bcc",
    "covering_radius",
    "cubic",
    "dv_cell",
    "fcc",
    "minimal_vectors",
    "Lattice2D",
    "SoftParams",
    "cell_soft_density",
    "lattice_soft_density",
    "optimal_lattice_search",
    "BallCluster",
    "ball_polytope_volume",
    "csikos_derivative",
    "csikos_walls",
    "soft_density_3d",
    "PackingConfig2D",
    "delaunay",
    "molnar_decomposition",
    "refined_molnar",
    "voronoi_cell",
]
