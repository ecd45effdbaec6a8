"""
Analysis modules
"""
