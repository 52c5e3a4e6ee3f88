"""Exact analysis of transitivity for twisted skew products over subshifts of finite type."""

__version__ = "0.1.0"
