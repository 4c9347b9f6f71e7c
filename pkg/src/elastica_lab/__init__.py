"""Numerical toolkit for straightened clamped elastic curves.

Computes global and winding-class-local minimizers of the tension-dominated
bending energy eps^2 * B + length for clamped planar curves, the classical
fixed-length bending problem through the eps <-> length dictionary, and the
diagnostics (inflections, self-intersections, boundary-layer comparisons)
that make the small-eps asymptotics checkable at desk scale.
"""

from elastica_lab.geometry import (
    BoundaryCondition,
    DiscreteCurve,
    EnergyReport,
    energies,
    reconstruct_positions,
    rescale,
    weighted_variation,
    winding_number,
)

__all__ = [
    "BoundaryCondition",
    "DiscreteCurve",
    "EnergyReport",
    "energies",
    "reconstruct_positions",
    "rescale",
    "weighted_variation",
    "winding_number",
]

__version__ = "0.1.0"
