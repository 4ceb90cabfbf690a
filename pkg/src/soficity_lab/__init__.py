"""Finite, checkable computations around soficity and flexible stability of lattices.

Modules: ``modmat`` (matrices mod m, PSL orders), ``quotient_structure``
(lifting and normal-subgroup probes), ``actions`` (projective actions,
orbits, density), ``schreier`` (graphs and expansion), ``sofic`` (finite
approximation models), ``obstruction`` (the bad-edge count),
``pingpong`` (projective dynamics), ``presentations`` (words, HNN
relators) and ``scenario`` / ``cli`` (reproducible runs).
"""

__version__ = "0.1.0"
