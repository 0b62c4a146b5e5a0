"""Non-commutative Hodge structures of exponential type, computationally.

Subpackages: ``algebra_core`` (series, constants, linear algebra),
``char_class``, ``quantum_connection``, ``flat_transport``, ``stokes``,
``betti_gluing``, ``bv_formal`` and the ``cli`` front end.
"""

__version__ = "0.1.0"
