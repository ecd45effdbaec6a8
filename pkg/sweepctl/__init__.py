"""
sweepctl - controlled sweeping processes, minimum-time grids and
Hamilton-Jacobi verification
"""
__version__ = "1.0.0"
