"""Exact transfer-matrix spectrum, finite-size corrections and finitized
characters for the dimer model on a strip of width N."""

from .diagrams import (
    TwoColumnDiagram,
    conformal_exponent,
    enumerate_diagrams,
    enumerate_sector,
    excess_parameter,
    sector_dimension,
    variation_index,
)
from .errors import AccuracyError, BudgetError, DimerError, DomainError, PrecisionError
from .spectrum import LatticeParams, SpectralPoint, eigenvalue, energy, momentum_angles, sector_spectrum

__all__ = [
    "AccuracyError",
    "BudgetError",
    "DimerError",
    "DomainError",
    "LatticeParams",
    "PrecisionError",
    "SpectralPoint",
    "TwoColumnDiagram",
    "conformal_exponent",
    "eigenvalue",
    "energy",
    "enumerate_diagrams",
    "enumerate_sector",
    "excess_parameter",
    "momentum_angles",
    "sector_dimension",
    "sector_spectrum",
    "variation_index",
]

__version__ = "0.1.0"
