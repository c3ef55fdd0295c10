"""Trace semantics, proof checking and separation games for a concurrent
while-language with locks and fractional permissions."""

__version__ = "0.1.0"
