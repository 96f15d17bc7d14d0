"""Evolved FSM update rules for density-classifying cellular automata."""

__version__ = "0.1.0"
