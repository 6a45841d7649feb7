# ManifoldLens package
# Copyright (c) 2026 ManifoldLens contributors
#
# Package initializer for patch I/O, dimension/curvature estimation, and manifold comparison.
__version__ = "0.1.0"
