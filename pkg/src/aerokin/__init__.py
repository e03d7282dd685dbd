"""Particle-gas collision kernels, small-parameter limits and a periodic
Vlasov-Stokes particle solver."""

__version__ = "0.1.0"
