"""Numerical range of generators of symmetric L-infinity-contractive semigroups.

Everything lives on finite atomic measure spaces, where every function is a
step function and operators are small dense matrices.
"""

__version__ = "0.1.0"
