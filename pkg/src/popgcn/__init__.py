"""Population graphs and Chebyshev graph convolutional networks for
semi-supervised node classification."""

__version__ = "0.1.0"
