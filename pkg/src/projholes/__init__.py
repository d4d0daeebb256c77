"""Exact counting of convex structures in finite point sets of the projective plane."""

from .exact_geom import Point, PointSet, orientation, point
from .projective_model import Chart, CountTable, DoubleChainWedge, GonSignature

__version__ = "0.1.0"

__all__ = ["Point", "PointSet", "orientation", "point", "Chart", "CountTable", "DoubleChainWedge", "GonSignature"]
