"""Classical root systems, node-removal symmetric pairs and matrix-level checks."""

__version__ = "0.1.0"
