"""Multiclass WEAT bias measurement and joint debiasing of word embeddings."""

__version__ = "0.1.0"
