"""Deliberation via matching: exact protocol, worst-case oracle, certificates and lower bounds."""

__version__ = "0.1.0"
