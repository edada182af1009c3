"""Percolation, circle packing and square tiling experiments on planar triangulations."""
from __future__ import annotations

from .generators import (
    boundary_arcs,
    grid_with_poles,
    ladder_graph,
    layered_triangulation,
    mixed_degree_triangulation,
    parallel_paths,
    regular_hyperbolic_triangulation,
    rhombus,
    triangular_lattice_disk,
    wire_triangulation,
)
from .harmonic import classify_walk, effective_resistance, resistance_curve, solve_dirichlet
from .packing import pack
from .stats import EstimateWithCI, wilson_interval
from .tiling import tile_from_two_terminal
from .triangulation import Triangulation, TriangulationError, ball, build_from_rotation

__version__ = "0.1.0"

__all__ = [
    "EstimateWithCI",
    "Triangulation",
    "TriangulationError",
    "ball",
    "boundary_arcs",
    "build_from_rotation",
    "classify_walk",
    "effective_resistance",
    "grid_with_poles",
    "ladder_graph",
    "layered_triangulation",
    "mixed_degree_triangulation",
    "pack",
    "parallel_paths",
    "regular_hyperbolic_triangulation",
    "resistance_curve",
    "rhombus",
    "solve_dirichlet",
    "tile_from_two_terminal",
    "triangular_lattice_disk",
    "wilson_interval",
    "wire_triangulation",
]
