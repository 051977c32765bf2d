"""Numerical laboratory for horocycle-flow renormalization on hyperbolic
surfaces: flow algebra, the Bolza quotient, ergodic integrals, the
principal/complementary-series model, the renormalization engine, and the
limit-distribution lab."""

__version__ = "0.1.0"

__all__ = ["sl2", "surface", "ergodic", "repmodel", "renorm", "distlab", "cli"]
