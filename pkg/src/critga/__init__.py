"""Genetic algorithm with critical control of mutation and population size."""

__version__ = "0.1.0"
