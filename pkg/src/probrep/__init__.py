"""Probability representations of quantum states and a key/lock GPT."""

__version__ = "0.1.0"
