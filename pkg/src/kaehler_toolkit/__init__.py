"""Flat bilinear forms attached to Kaehler submanifolds of hyperbolic space."""

__all__ = [
    "bilinear",
    "config",
    "errors",
    "formfile",
    "geometry",
    "kaehler_forms",
    "pseudo_linear",
    "reports",
    "suites",
]
