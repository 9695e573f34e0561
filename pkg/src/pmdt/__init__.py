"""Patient Medical Digital Twin knowledge kernel and federated query engine."""

__version__ = "0.1.0"
