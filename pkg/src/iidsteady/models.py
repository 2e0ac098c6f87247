"""Built-in model catalog and closed-form reference values.

Six dissipative lattice models spanning spin, fermion, and hard-core boson
statistics, each with 1-local loss/gain channels:

1. isotropic spin-1/2 exchange with a uniform transverse field and uniform
   spin loss (product steady state for any couplings and geometry);
2. spin-1/2 chain with a tilted-axis Ising-type coupling (rY+Z)(rY+Z): a
   product steady state exists only at the matched field B = r*gamma/2;
3. spinless fermions with hopping, density-density interaction, chemical
   potential, and uniform loss/gain;
4. no-double-occupancy (t-J-type) spin-1/2 fermions with exchange,
   constrained hopping, magnetic fields, and spin loss; a one-parameter
   steady-state family interpolating to the empty lattice;
5. spin-1/2 fermions with bare hopping, on-site repulsion,
   density-density interaction, fields, and four loss/gain channels: a
   product steady state exists for all parameters even though the hopping
   is outside the commutant algebra;
6. hard-core bosons with hopping, interaction, chemical potential, and
   loss/gain.

``expected_values`` returns the analytically known quantities used as
golden references by the tests (local states, totals, relaxation rates,
threshold fields, constraint residuals).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams
from .lattice import build_model
from .spaces import (
    SPIN_MINUS, SPIN_X, SPIN_Y, SPIN_Z, annihilators, electron_fermion,
    hardcore_boson, spin_half, spin_operators, spinless_fermion, tj_fermion,
)

__all__ = ["ExampleSpec", "EXAMPLE_DEFAULTS", "build_example", "expected_values",
           "ExpectedValues", "all_pairs"]


def all_pairs(n):
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@dataclass(frozen=True)
class ExampleSpec:
    """Identifier, site count, parameter overrides, optional pair list."""

    id: int
    n: int = 3
    params: dict = field(default_factory=dict)
    pairs: tuple | None = None

    def resolved(self):
        if self.id not in EXAMPLE_DEFAULTS:
            raise InvalidParams(f"unknown example id {self.id}")
        merged = dict(EXAMPLE_DEFAULTS[self.id])
        for key, val in self.params.items():
            if key not in merged:
                raise InvalidParams(f"example {self.id} has no parameter {key!r}")
            merged[key] = float(val)
        pairs = self.pairs if self.pairs is not None else all_pairs(self.n)
        for (i, j) in pairs:
            if not 0 <= i < j < self.n:
                raise InvalidParams(f"bad pair ({i}, {j}) for n={self.n}")
        return merged, tuple(pairs)


EXAMPLE_DEFAULTS = {
    1: {"j": 1.0, "b": 1.0, "gamma": 2.0},
    2: {"j": 1.0, "r": 1.0, "b": 0.3, "gamma": 1.0},
    3: {"t": 1.0, "v": 0.5, "mu": 0.7, "gamma_minus": 3.0, "gamma_plus": 1.0},
    4: {"t": 1.0, "j": 0.7, "bx": 0.9, "bz": 0.4, "gamma": 1.3},
    5: {"t": 1.0, "u": 2.0, "v": 0.6, "bx": 0.8, "bz": 0.5,
        "gamma_plus_up": 0.7, "gamma_minus_up": 1.1,
        "gamma_plus_down": 0.4, "gamma_minus_down": 0.9},
    6: {"t": 1.0, "v": 0.5, "mu": 0.7, "gamma_minus": 3.0, "gamma_plus": 1.0},
}


def _heisenberg_pair():
    return (np.kron(SPIN_X, SPIN_X) + np.kron(SPIN_Y, SPIN_Y)
            + np.kron(SPIN_Z, SPIN_Z))


def _build_spin_exchange(spec):
    p, pairs = spec.resolved()
    space = spin_half()
    pair = p["j"] * _heisenberg_pair()
    site = -p["b"] * SPIN_X
    return build_model(
        spec.n, space,
        pair_terms=[(i, j, pair) for (i, j) in pairs],
        site_terms=[(i, site) for i in range(spec.n)],
        lindblads=[(i, "loss", SPIN_MINUS, p["gamma"]) for i in range(spec.n)],
        name="spin_exchange")


def _build_tilted_axis(spec):
    p, pairs = spec.resolved()
    space = spin_half()
    axis = p["r"] * SPIN_Y + SPIN_Z
    pair = p["j"] * np.kron(axis, axis)
    site = -p["b"] * SPIN_X
    return build_model(
        spec.n, space,
        pair_terms=[(i, j, pair) for (i, j) in pairs],
        site_terms=[(i, site) for i in range(spec.n)],
        lindblads=[(i, "loss", SPIN_MINUS, p["gamma"]) for i in range(spec.n)],
        name="tilted_axis_coupling")


def _hop_pair(space):
    """Sum over modes of c_i† c_j + c_j† c_i in the ordered pair basis."""
    d = space.dim
    par = np.diag(space.parity_diag()) if space.fermionic else np.eye(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    for c in annihilators(space):
        c_left = np.kron(c, np.eye(d))
        c_right = np.kron(par, c)
        out += c_left.conj().T @ c_right + c_right.conj().T @ c_left
    return out


def _build_spinless_fermion(spec):
    p, pairs = spec.resolved()
    space = spinless_fermion()
    nop = space.number_operator()
    pair = -p["t"] * _hop_pair(space) + p["v"] * np.kron(nop, nop)
    site = p["mu"] * nop
    (a,) = annihilators(space)
    return build_model(
        spec.n, space,
        pair_terms=[(i, j, pair) for (i, j) in pairs],
        site_terms=[(i, site) for i in range(spec.n)],
        lindblads=(
            [(i, "loss", a, p["gamma_minus"]) for i in range(spec.n)]
            + [(i, "gain", a.conj().T, p["gamma_plus"]) for i in range(spec.n)]),
        name="spinless_fermion")


def _build_tj(spec):
    p, pairs = spec.resolved()
    space = tj_fermion()
    sx, sy, sz = spin_operators(space)
    nop = space.number_operator()
    spin_dot = sum(np.kron(s, s) for s in (sx, sy, sz))
    pair = -p["t"] * _hop_pair(space) + p["j"] * (spin_dot - np.kron(nop, nop) / 4)
    site = -p["bx"] * sx - p["bz"] * sz
    c_up, c_dn = annihilators(space)
    s_minus = c_dn.conj().T @ c_up
    return build_model(
        spec.n, space,
        pair_terms=[(i, j, pair) for (i, j) in pairs],
        site_terms=[(i, site) for i in range(spec.n)],
        lindblads=[(i, "spin_loss", s_minus, p["gamma"]) for i in range(spec.n)],
        name="tj_fermion")


def _build_hubbard(spec):
    p, pairs = spec.resolved()
    space = electron_fermion()
    sx, sy, sz = spin_operators(space)
    nop = space.number_operator()
    pair = -p["t"] * _hop_pair(space) + p["v"] * np.kron(nop, nop)
    double_occ = (nop @ nop - nop) / 2
    site = p["u"] * double_occ - p["bx"] * sx - p["bz"] * sz
    c_up, c_dn = annihilators(space)
    lindblads = []
    for i in range(spec.n):
        lindblads += [
            (i, "gain_up", c_up.conj().T, p["gamma_plus_up"]),
            (i, "loss_up", c_up, p["gamma_minus_up"]),
            (i, "gain_down", c_dn.conj().T, p["gamma_plus_down"]),
            (i, "loss_down", c_dn, p["gamma_minus_down"]),
        ]
    return build_model(
        spec.n, space,
        pair_terms=[(i, j, pair) for (i, j) in pairs],
        site_terms=[(i, site) for i in range(spec.n)],
        lindblads=lindblads,
        name="hubbard")


def _build_hardcore_boson(spec):
    p, pairs = spec.resolved()
    space = hardcore_boson()
    nop = space.number_operator()
    pair = -p["t"] * _hop_pair(space) + p["v"] * np.kron(nop, nop)
    site = p["mu"] * nop
    (b,) = annihilators(space)
    return build_model(
        spec.n, space,
        pair_terms=[(i, j, pair) for (i, j) in pairs],
        site_terms=[(i, site) for i in range(spec.n)],
        lindblads=(
            [(i, "loss", b, p["gamma_minus"]) for i in range(spec.n)]
            + [(i, "gain", b.conj().T, p["gamma_plus"]) for i in range(spec.n)]),
        name="hardcore_boson")


_BUILDERS = {
    1: _build_spin_exchange,
    2: _build_tilted_axis,
    3: _build_spinless_fermion,
    4: _build_tj,
    5: _build_hubbard,
    6: _build_hardcore_boson,
}


def build_example(spec_or_id, n=None, pairs=None, **params):
    """Construct a built-in model from an ExampleSpec or keyword form."""
    if isinstance(spec_or_id, ExampleSpec):
        spec = spec_or_id
    else:
        spec = ExampleSpec(id=int(spec_or_id), n=3 if n is None else int(n),
                           params=params, pairs=pairs)
    if spec.id not in _BUILDERS:
        raise InvalidParams(f"unknown example id {spec.id}")
    return _BUILDERS[spec.id](spec)


# ---------------------------------------------------------------------------
# Closed-form reference values

@dataclass
class ExpectedValues:
    """Analytically known quantities for a built-in model at given params."""

    rho_loc: np.ndarray | None = None
    rho_loc_family: object | None = None      # callable r -> density matrix
    magnetization: np.ndarray | None = None   # total (Mx, My, Mz)
    total_number: float | None = None
    bloch: np.ndarray | None = None           # (sx, sy, sz) of rho_loc
    lambda_slow: float | None = None          # -gamma/2 transverse rate
    lambda_pm: tuple | None = None            # complex pair
    threshold_field: float | None = None
    hubbard_r: dict | None = None             # r11, r22, r33, r44, r23
    constraint_residual: float | None = None  # r11 r44 - r22 r33 + |r23|²


def _spin_fixed_point(bx, bz, gamma):
    """Fixed point of i[bx Sx + bz Sz, .] + gamma D_{S-} on a qubit,
    in the (up, down) basis."""
    den = gamma**2 + 2 * bx**2 + 4 * bz**2
    r_uu = bx**2 / den
    r_ud = -bx * (2 * bz - 1j * gamma) / den
    r_dd = (gamma**2 + bx**2 + 4 * bz**2) / den
    return np.array([[r_uu, r_ud], [np.conjugate(r_ud), r_dd]])


def expected_values(spec):
    """Golden record for a built-in model; fields are None when the value
    has no closed form for that model."""
    p, _ = spec.resolved()
    n = spec.n
    out = ExpectedValues()
    if spec.id == 1:
        b, gamma = p["b"], p["gamma"]
        den = 2 * b**2 + gamma**2
        out.rho_loc = np.array([[b**2, 1j * b * gamma],
                                [-1j * b * gamma, b**2 + gamma**2]]) / den
        out.bloch = np.array([0.0, -2 * gamma * b / den, -gamma**2 / den])
        out.magnetization = 0.5 * n * out.bloch
        disc = np.sqrt(complex(gamma**2 / 16 - b**2))
        out.lambda_pm = (-0.75 * gamma + disc, -0.75 * gamma - disc)
        out.lambda_slow = -gamma / 2
    elif spec.id == 2:
        b, gamma, r = p["b"], p["gamma"], p["r"]
        den = 2 * b**2 + gamma**2
        out.rho_loc = np.array([[b**2, 1j * b * gamma],
                                [-1j * b * gamma, b**2 + gamma**2]]) / den
        out.bloch = np.array([0.0, -2 * gamma * b / den, -gamma**2 / den])
        out.threshold_field = r * gamma / 2
    elif spec.id in (3, 6):
        gm, gp = p["gamma_minus"], p["gamma_plus"]
        tot = gm + gp
        out.rho_loc = np.diag([gm / tot, gp / tot]).astype(complex)
        out.total_number = n * gp / tot
    elif spec.id == 4:
        bx, bz, gamma = p["bx"], p["bz"], p["gamma"]
        spin = _spin_fixed_point(bx, bz, gamma)

        def family(r):
            rho = np.zeros((3, 3), dtype=complex)
            rho[0, 0] = 1.0 - r
            rho[1:, 1:] = r * spin
            return rho

        out.rho_loc_family = family
        den = gamma**2 + 2 * bx**2 + 4 * bz**2
        out.magnetization = -n / (2 * den) * np.array(
            [4 * bx * bz, 2 * bx * gamma, gamma**2 + 4 * bz**2])
        out.total_number = float(n)  # at family parameter r = 1; scales with r
    elif spec.id == 5:
        gpu, gmu = p["gamma_plus_up"], p["gamma_minus_up"]
        gpd, gmd = p["gamma_plus_down"], p["gamma_minus_down"]
        bx, bz = p["bx"], p["bz"]
        g_up = gpu + gmu
        g_dn = gpd + gmd
        g = g_up + g_dn
        den = g**2 * g_up * g_dn + bx**2 * g**2 + 4 * bz**2 * g_up * g_dn
        r23 = (gpd * gmu - gpu * gmd) * bx * (-2 * bz + 1j * g) / den
        im = r23.imag
        r11 = gpu * gpd / (g_up * g_dn) - (g_up * gpu - g_dn * gpd) / (g * g_up * g_dn) * bx * im
        r22 = gpu * gmd / (g_up * g_dn) + (g_up * (gpu + g_dn) + g_dn * gmd) / (g * g_up * g_dn) * bx * im
        r33 = gmu * gpd / (g_up * g_dn) - (g_dn * (gpd + g_up) + g_up * gmu) / (g * g_up * g_dn) * bx * im
        r44 = gmu * gmd / (g_up * g_dn) - (g_dn * gmd - g_up * gmu) / (g * g_up * g_dn) * bx * im
        out.hubbard_r = {"r11": r11, "r22": r22, "r33": r33, "r44": r44, "r23": r23}
        out.constraint_residual = abs(r11 * r44 - r22 * r33 + abs(r23) ** 2)
        # basis (|0>, |up>, |down>, |updown>)
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = r44
        rho[1, 1] = r22
        rho[2, 2] = r33
        rho[3, 3] = r11
        rho[1, 2] = r23
        rho[2, 1] = np.conjugate(r23)
        out.rho_loc = rho
        out.total_number = n * (
            (2 * gpu * gpd + gpu * gmd + gpd * gmu) / (g_up * g_dn)
            - bx**2 * g * (g_up - g_dn) * (gpd * gmu - gpu * gmd) / (g_up * g_dn * den))
        out.magnetization = (n * (gpu * gmd - gpd * gmu) / (2 * den)) * np.array(
            [4 * bx * bz, 2 * bx * g, g**2 + 4 * bz**2])
    else:
        raise InvalidParams(f"unknown example id {spec.id}")
    return out
