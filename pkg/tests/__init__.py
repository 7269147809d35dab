"""
Test package for PerceptiveNet.
"""
