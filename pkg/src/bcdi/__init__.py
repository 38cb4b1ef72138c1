"""Broadband CDI monochromatization: FFT wavelength-transfer operators, a
momentum-gradient solver for the polychromatic linear model, and iterative
phase retrieval of the object."""

__version__ = "0.1.0"
