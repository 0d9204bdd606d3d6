"""Density-based topology optimization of coupled fluid-structure interaction.

Thin wrapper over the C++ core. Configuration is passed as a dict of the
same dotted keys the CLI config files use, e.g.
``{"geometry.resolution": 0.05, "mesh_deformation": "off"}``.
"""

from ._tofsi import (
    analyze,
    brinkman_alpha,
    discreteness_measure,
    force_filter,
    grid_summary,
    optimize,
    project,
    simp_modulus,
    verify,
)

__all__ = [
    "analyze",
    "brinkman_alpha",
    "discreteness_measure",
    "force_filter",
    "grid_summary",
    "optimize",
    "project",
    "simp_modulus",
    "verify",
]
