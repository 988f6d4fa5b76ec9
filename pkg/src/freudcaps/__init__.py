"""Validated-numerics toolkit for quartic-weight orthogonal polynomial bases,
certified Sobolev embedding constants, and a computer-assisted existence proof
for standing waves of a Gross-Pitaevskii equation with sextic potential.
"""

__version__ = "0.1.0"
