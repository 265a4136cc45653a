"""Secrecy analysis of untrusted full-duplex UAV relay networks with source-based jamming."""

__version__ = "0.1.0"
