"""Gabor frames and fusion frames generated by difference sets in Z_N.

The package builds (N,K,lambda) difference sets, the Gabor frames and fusion
frames they generate, checks their closed-form optimality properties
(coherence, tightness, equidistance, simplex bound, sparsity), and runs
sparse-recovery Monte-Carlo experiments with in-house ADMM solvers.
"""

__version__ = "0.1.0"

from . import diffsets, gabor, fusion, solvers, experiments  # noqa: F401
