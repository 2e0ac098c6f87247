"""Local Hilbert spaces and their standard single-site operators.

A LocalSpace fixes the on-site dimension, the particle statistics, whether
the number-superselection rule applies, and (for particle statistics) the
diagonal of the on-site number operator in the occupation basis.

Basis conventions used by the factories:

* spin-1/2                  -> (|up>, |down>)
* spinless fermion, d=2     -> (|0>, |1>)
* no-double-occupancy, d=3  -> (|0>, |up>, |down>)
* spin-1/2 fermion, d=4     -> (|0>, |up>, |down>, |updown>), |updown> = c_up† c_dn† |0>
* hard-core boson, d=2      -> (|0>, |1>)
* truncated boson           -> (|0>, ..., |n_max>)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams

SPIN = "spin"
FERMION = "fermion"
HARDCORE_BOSON = "hardcore_boson"
TRUNCATED_BOSON = "truncated_boson"

STATISTICS = (SPIN, FERMION, HARDCORE_BOSON, TRUNCATED_BOSON)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}

# Spin-1/2 operators in the (|up>, |down>) basis.
SPIN_X = PAULI_X / 2
SPIN_Y = PAULI_Y / 2
SPIN_Z = PAULI_Z / 2
SPIN_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
SPIN_PLUS = SPIN_MINUS.T.copy()


@dataclass(frozen=True)
class LocalSpace:
    """On-site Hilbert space: dimension, statistics, superselection rule."""

    dim: int
    statistics: str = SPIN
    superselection: bool = False
    number_diag: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidParams(f"local dimension must be >= 2, got {self.dim}")
        if self.statistics not in STATISTICS:
            raise InvalidParams(f"unknown statistics {self.statistics!r}")
        if self.statistics in (FERMION, TRUNCATED_BOSON) and not self.superselection:
            raise InvalidParams(f"{self.statistics} spaces are number-superselected")
        if self.statistics != SPIN:
            if self.number_diag is None:
                raise InvalidParams("particle statistics need a number operator diagonal")
            if len(self.number_diag) != self.dim:
                raise InvalidParams("number operator diagonal has wrong length")
            if any(int(k) != k or k < 0 for k in self.number_diag):
                raise InvalidParams("number operator eigenvalues must be nonnegative integers")

    @property
    def fermionic(self):
        return self.statistics == FERMION

    def number_operator(self):
        if self.number_diag is None:
            raise InvalidParams("spin spaces have no number operator")
        return np.diag(np.asarray(self.number_diag, dtype=complex))

    def parity_diag(self):
        """Diagonal of (-1)^n, the Jordan-Wigner string factor per site."""
        if self.number_diag is None:
            raise InvalidParams("spin spaces have no parity operator")
        return np.array([(-1.0) ** k for k in self.number_diag])

    @property
    def n_max(self):
        return 0 if self.number_diag is None else max(self.number_diag)


def spin_half():
    return LocalSpace(2, SPIN)


def spin(d):
    return LocalSpace(d, SPIN)


def spinless_fermion():
    return LocalSpace(2, FERMION, superselection=True, number_diag=(0, 1))


def tj_fermion():
    """Spin-1/2 fermion site with double occupancy projected out."""
    return LocalSpace(3, FERMION, superselection=True, number_diag=(0, 1, 1))


def electron_fermion():
    """Full spin-1/2 fermion site."""
    return LocalSpace(4, FERMION, superselection=True, number_diag=(0, 1, 1, 2))


def hardcore_boson(superselection=True):
    return LocalSpace(2, HARDCORE_BOSON, superselection=superselection, number_diag=(0, 1))


def truncated_boson(n_max):
    if n_max < 1:
        raise InvalidParams("n_max must be >= 1")
    return LocalSpace(n_max + 1, TRUNCATED_BOSON, superselection=True,
                      number_diag=tuple(range(n_max + 1)))


def annihilators(space):
    """Local annihilation operators, one per internal mode.

    For the d=3 projected fermion space these are the constrained operators
    that never create double occupancy.
    """
    d = space.dim
    if space.statistics == SPIN:
        raise InvalidParams("spin spaces have no mode operators")
    if d == 2:
        return [np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)]
    if space.statistics == FERMION and d == 3:
        c_up = np.zeros((3, 3), dtype=complex)
        c_up[0, 1] = 1.0
        c_dn = np.zeros((3, 3), dtype=complex)
        c_dn[0, 2] = 1.0
        return [c_up, c_dn]
    if space.statistics == FERMION and d == 4:
        c_up = np.zeros((4, 4), dtype=complex)
        c_up[0, 1] = 1.0   # |up> -> |0>
        c_up[2, 3] = 1.0   # |updown> -> |down>
        c_dn = np.zeros((4, 4), dtype=complex)
        c_dn[0, 2] = 1.0   # |down> -> |0>
        c_dn[1, 3] = -1.0  # |updown> -> -|up>
        return [c_up, c_dn]
    if space.statistics == TRUNCATED_BOSON:
        b = np.zeros((d, d), dtype=complex)
        for k in range(1, d):
            b[k - 1, k] = np.sqrt(k)
        return [b]
    raise InvalidParams(f"no mode operators defined for {space}")


def spin_operators(space):
    """Local spin operators (Sx, Sy, Sz) for spaces that carry spin."""
    if space.statistics == SPIN and space.dim == 2:
        return SPIN_X.copy(), SPIN_Y.copy(), SPIN_Z.copy()
    if space.statistics == FERMION and space.dim in (3, 4):
        c_up, c_dn = annihilators(space)
        sp = c_up.conj().T @ c_dn           # S+ = c_up† c_dn
        sm = sp.conj().T
        sz = (c_up.conj().T @ c_up - c_dn.conj().T @ c_dn) / 2
        return (sp + sm) / 2, (sp - sm) / (2j), sz
    raise InvalidParams(f"no spin operators defined for {space}")
