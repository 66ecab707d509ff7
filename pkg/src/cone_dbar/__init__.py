"""
Cone dbar Package
Numerical verification of weighted dbar estimates on the cone {z3^2 = z1 z2}
"""

__version__ = "1.0.0"
__author__ = "Cone dbar harness"
