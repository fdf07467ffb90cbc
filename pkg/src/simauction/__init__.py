"""Volumes of SIM-bodies and Straight-Jacket Auction prices in exact arithmetic."""

from .poly import MultiPoly, UniPoly, hessian_signature, is_lorentzian
from .polytope import AlphaVector, h_description, vertices
from .sja import allocate, criticality_audit, revenue, solve_prices
from .volume import volume_poly_dragon, volume_poly_lawrence

__all__ = [
    "AlphaVector",
    "MultiPoly",
    "UniPoly",
    "allocate",
    "criticality_audit",
    "h_description",
    "hessian_signature",
    "is_lorentzian",
    "revenue",
    "solve_prices",
    "vertices",
    "volume_poly_dragon",
    "volume_poly_lawrence",
]
