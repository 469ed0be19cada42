"""Entanglement criteria for multi-mode bosonic states in truncated Fock spaces."""

__version__ = "0.1.0"
