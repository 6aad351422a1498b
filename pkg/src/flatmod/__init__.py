"""Evaluable de Rham representatives for characteristic classes on products
of SU(N), and the identity-verification harness built on them."""

__version__ = "0.1.0"
