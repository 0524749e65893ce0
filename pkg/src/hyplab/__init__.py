"""Numerical laboratory for compact hyperbolic surfaces.

Builds surfaces from pants decompositions (zero twists), meshes them
intrinsically, computes Laplacian spectra, heat-trace statistics, the
bottleneck functional I(S), weighted distances and discrete extremal
lengths, and cross-checks the eigenvalue / heat-kernel / extremal-length
inequalities against closed-form and discrete-graph oracles.
"""

__version__ = "0.1.0"

DEFAULT_RTOL = 1e-12
DEFAULT_SEED = 7
