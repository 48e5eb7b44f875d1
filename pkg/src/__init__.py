"""qsdlab: quasi-stationary distributions of absorbed Markov processes."""

__version__ = "0.1.0"
