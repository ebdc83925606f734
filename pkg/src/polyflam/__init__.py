"""Polymer flammability prediction: datasets, descriptors, synthetic data,
random-forest models, and serving."""

__version__ = "0.1.0"
