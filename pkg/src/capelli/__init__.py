"""Exact verification of the generalized Capelli identity and the
(gl_M, gl_N) duality of Gaudin transfer matrices."""

__version__ = "0.1.0"
