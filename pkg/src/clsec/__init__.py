"""Soft-decision text correction: channel simulation, LLR wire framing,
vocabulary masking, and Bayesian fusion of channel and context evidence."""

__version__ = "0.1.0"
