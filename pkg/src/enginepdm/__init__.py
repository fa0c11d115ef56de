"""Turbofan failure classification: labeling, windowing, recurrent and classic models, local explanations."""

__version__ = "0.1.0"
