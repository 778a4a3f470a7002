"""Nanowire-in-microcavity toolkit.

Mie scattering by a sub-wavelength dielectric cylinder, its coupling to
the Hermite-Gaussian modes of a fiber Fabry-Perot cavity, the resulting
cavity response, optomechanical figures of merit, and vectorial optical
force fields.
"""

__version__ = "0.1.0"
