"""Exact finite-field computations for tilting theory, Gorenstein-projective
modules and truncated Ringel-Hall algebras."""

__version__ = "0.1.0"
