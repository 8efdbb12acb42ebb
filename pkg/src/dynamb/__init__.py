"""Wasserstein ambiguity sets for partially observed linear dynamics.

The library builds ambiguity balls around observer-based empirical state
distributions, certifies their radii through concentration-of-measure
constants, and demonstrates the construction in a distributionally robust
economic-dispatch problem with an SAA baseline.
"""

from dynamb.wasserstein import DiscreteMeasure, wasserstein_p

__all__ = ["DiscreteMeasure", "wasserstein_p"]
__version__ = "0.1.0"
