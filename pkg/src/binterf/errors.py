"""Typed errors shared across the package.

Plain ``ValueError`` is used for invalid arguments; the classes here cover
numerical failure modes that callers may want to catch and handle per row.
"""
from __future__ import annotations


class BinterfError(Exception):
    """Base class for package-specific failures."""


class ConvergenceError(BinterfError, RuntimeError):
    """Cutoff doubling did not converge; carries both values for inspection."""

    def __init__(self, message: str, value_lo=None, value_hi=None, delta=None, dim=None):
        super().__init__(message)
        self.value_lo = value_lo
        self.value_hi = value_hi
        self.delta = delta
        self.dim = dim


class PrecisionLossError(BinterfError, ArithmeticError):
    """A series evaluation was requested outside its declared stability envelope."""


class NoSolutionError(BinterfError, RuntimeError):
    """A root bracket could not be established inside the search envelope."""

    def __init__(self, message: str, envelope=None, residual=None):
        super().__init__(message)
        self.envelope = envelope
        self.residual = residual


class OutOfEnvelopeError(BinterfError, ValueError):
    """A small-parameter approximation was called outside its validity envelope."""


class ConfigError(BinterfError):
    """Experiment configuration could not be parsed or validated."""
