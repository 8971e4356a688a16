"""Numerical companions to the chain c ⊂ ĉ ⊂ S ⊂ ℓ∞ of bounded sequences.

Sequence generators, sliding-window statistics, a truncation-based
membership classifier, exponential-like images and algebrability witnesses,
porosity certificates, and Monte Carlo runs on the uniform product measure.
"""

__version__ = "0.1.0"
