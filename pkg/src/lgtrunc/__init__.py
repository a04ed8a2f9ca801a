"""Electric-basis truncation-error estimates for lattice gauge theories,
with exact and matrix-product-state evolution to check them against."""

__version__ = "0.1.0"
