"""Quantum walkers scattering off a spin-1/2 impurity at the origin.

Modules
-------
hilbert       index conventions, parameters, state vectors
operators     coin, shift and impurity scattering matrices
evolve1w      dense one-walker step operators and spectra
bound         closed-form bound states for XX coupling
evolve2w      matrix-free two-walker evolution and observables
entanglement  walker-walker negativity with the impurity traced out
cli           command-line driver
"""

__version__ = "0.1.0"
