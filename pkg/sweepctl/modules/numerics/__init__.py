"""
Numerical helpers shared by the analysis modules
"""
