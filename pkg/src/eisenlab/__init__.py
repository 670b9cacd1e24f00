"""Eisenstein functions on the modular surface and their semiclassical limits."""

from .eisenstein import SpectralParam, eval_E, eval_mode, fit_zero_mode, scattering_from_modes, scattering_zeta
from .hyperbolic import HPoint, UnimodularMatrix

__all__ = [
    "HPoint",
    "SpectralParam",
    "UnimodularMatrix",
    "eval_E",
    "eval_mode",
    "fit_zero_mode",
    "scattering_from_modes",
    "scattering_zeta",
]
