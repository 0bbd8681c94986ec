"""Energy density and flux of the Helfer state, vacuum correlators and QI checks."""

__version__ = "0.1.0"
