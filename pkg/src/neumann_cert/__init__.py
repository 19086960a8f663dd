"""Certified numerics for the perimeter-normalized first Neumann eigenvalue of convex polygons."""
__version__ = "0.1.0"
