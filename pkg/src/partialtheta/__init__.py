"""Regularized higher-rank partial and Kostant theta functions on ADE lattices."""
from .errors import PartialThetaError
from .numeric import NumericResult
from .qseries import QExpansion
from .rootsys import RootSystem, build_root_system, parse_type

__version__ = "0.1.0"

__all__ = ["PartialThetaError", "NumericResult", "QExpansion", "RootSystem",
           "build_root_system", "parse_type", "__version__"]
