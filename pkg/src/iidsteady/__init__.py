"""Product-form steady states of locally driven-dissipated lattice models.

Decide whether a quantum lattice model with 1-local loss/gain channels and
at most 2-body Hamiltonian terms admits a steady state that is an n-fold
tensor power of one local density matrix; compute that state and its
dynamics and correlation functions in closed form where the structure
allows; cross-check every verdict against a dense brute-force oracle.
"""

from . import algebra, checker, dynamics, lattice, models, permutations, spaces, steady

__all__ = ["algebra", "checker", "dynamics", "lattice", "models",
           "permutations", "spaces", "steady"]

__version__ = "0.1.0"
