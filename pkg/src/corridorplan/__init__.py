"""Corridor trajectory planning with projected-gradient refinement.

Plans composite Bezier paths through unions of convex polytopes in a
parametrized configuration space, then refines them against the true
(undistorted) objective in the original space while keeping every iterate
inside the convex feasible set.
"""

__version__ = "0.1.0"
