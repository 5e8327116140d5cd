"""Greedy isotropic and anisotropic adaptive piecewise polynomial approximation."""
