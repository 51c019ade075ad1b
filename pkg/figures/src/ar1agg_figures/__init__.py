"""Figure scripts for ar1agg CLI outputs."""

__version__ = "0.1.0"
