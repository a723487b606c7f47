"""Feature selection posed as a quadratic unconstrained binary optimization problem."""

__version__ = "0.1.0"
