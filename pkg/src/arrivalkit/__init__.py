"""Heavy-tailed request-trace analysis and truncated-Pareto arrival generation."""

__version__ = "0.1.0"
