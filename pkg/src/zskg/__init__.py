"""Zero-shot knowledge-graph relational learning toolkit."""

__version__ = "0.1.0"
