"""Weighted isoperimetric clusters in the plane: solver, verifier and probes."""

from .cluster_net import Arc, ClusterNet, Node, load, save, validate
from .density import DensityField, constant, gaussian, grushin, make_density, radial_power
from .functionals import weighted_area, weighted_perimeter
from .optimizer import SolveConfig, solve
from .steiner import fermat_point, l_theta

__version__ = "0.1.0"

__all__ = [
    "Arc", "ClusterNet", "Node", "load", "save", "validate",
    "DensityField", "constant", "gaussian", "grushin", "make_density", "radial_power",
    "weighted_area", "weighted_perimeter", "SolveConfig", "solve", "fermat_point", "l_theta",
]
