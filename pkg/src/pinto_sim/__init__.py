"""Simulation of a latched, twisted-string driven, spring-loaded jumping leg."""
__version__ = "0.1.0"
