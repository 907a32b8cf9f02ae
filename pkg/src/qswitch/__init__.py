"""Max-Weight scheduling and capacity analysis for a quantum entanglement switch."""

__version__ = "0.1.0"
