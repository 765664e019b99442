"""Lyapunov exponents of K3-type variations of Hodge structure.

Modules: quadlat (exact quadratic spaces), clifford (Clifford algebras and
the Kuga-Satake identities), rootsys (restricted spin weights), hypflow
(geodesic flow on Fuchsian quotients), lyapunov (spectrum estimation),
families (exact catalog of the top exponent), cli.
"""

__version__ = "0.1.0"
