"""Agent-based simulation of firm-level versus systemic fairness in lending."""

__version__ = "0.1.0"
