"""Higher-order Airy kernels, Schur-measure scaling limits and gap probabilities."""

__version__ = "0.1.0"
