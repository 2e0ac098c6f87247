"""Steady-state solvers.

Two independent routes:

* mean-field: the common null space of the single-site generators on the
  local space (restricted to the number commutant under superselection),
  with PSD unit-trace representatives extracted. Multi-dimensional fixed
  point spaces spanned by commuting block states are reported as a convex
  family through their extremal states.
* brute force: the null space of the full vectorized generator, the oracle
  every local verdict is cross-checked against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .algebra import (
    dagger, frobenius, hs_inner, null_space_basis, unvec, vec,
)
from .errors import NoPSDRepresentative, RANK_TOL, ensure_dim
from .lattice import (
    apply_lindbladian, decompose_hamiltonian, liouvillian_matrix,
    number_commutant_basis, single_site_generator,
)

__all__ = [
    "LocalState", "SteadyFamily", "meanfield_steady_state",
    "per_site_fixed_points", "fixed_point_family",
    "SteadyStateResult", "full_steady_states",
    "verify_iid", "iid_vector",
]


@dataclass
class LocalState:
    """Validated single-site density matrix with its spectral data."""

    rho: np.ndarray
    eigenvalues: np.ndarray   # descending
    rank: int
    image_basis: np.ndarray   # d x r, orthonormal columns spanning Im(rho)

    @property
    def dim(self):
        return self.rho.shape[0]

    @property
    def regular(self):
        return self.rank == self.dim

    @property
    def projector(self):
        w = self.image_basis
        return w @ dagger(w)

    @classmethod
    def from_matrix(cls, rho, space=None, rank_tol=RANK_TOL, atol=1e-10):
        rho = np.asarray(rho, dtype=complex)
        d = rho.shape[0]
        herm = frobenius(rho - dagger(rho))
        if herm > atol:
            raise ValueError(f"state not Hermitian (residual {herm:.2e})")
        rho = (rho + dagger(rho)) / 2
        tr = np.trace(rho).real
        if abs(tr - 1.0) > atol:
            raise ValueError(f"state trace {tr} != 1")
        vals, vecs = np.linalg.eigh(rho)
        if vals[0] < -max(atol, 1e-12):
            raise ValueError(f"state not PSD (min eigenvalue {vals[0]:.2e})")
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
        rank = int(np.sum(vals > rank_tol))
        rank = max(rank, 1)
        if space is not None and space.superselection:
            nop = space.number_operator()
            defect = frobenius(rho @ nop - nop @ rho)
            if defect > 1e-10:
                raise ValueError(f"state violates number superselection ({defect:.2e})")
        return cls(rho=rho, eigenvalues=vals, rank=rank, image_basis=vecs[:, :rank])

    def iid(self, n):
        """rho^(⊗n) as a dense matrix."""
        out = np.array([[1.0 + 0j]])
        for _ in range(n):
            out = np.kron(out, self.rho)
        return out


@dataclass
class SteadyFamily:
    """Fixed points of a (set of) single-site generators.

    ``states`` spans the PSD unit-trace solutions: a single representative,
    or the extremal states of the convex family when the null space is
    spanned by commuting block states (``commuting`` is then True and any
    convex combination of ``states`` is again a fixed point).
    """

    states: tuple
    null_dim: int
    residual: float
    commuting: bool

    @property
    def unique(self):
        return self.null_dim == 1

    def representative(self, weights=None):
        if len(self.states) == 1:
            return self.states[0]
        if weights is None:
            weights = np.ones(len(self.states)) / len(self.states)
        rho = sum(w * st.rho for w, st in zip(weights, self.states))
        return LocalState.from_matrix(rho)

    def contains(self, rho, tol=1e-8):
        """Convex-hull membership residual for a candidate density matrix."""
        a = np.stack([vec(st.rho) for st in self.states], axis=1)
        coeff, *_ = np.linalg.lstsq(a, vec(rho), rcond=None)
        residual = frobenius(vec(rho) - a @ coeff)
        return bool(residual < tol and np.all(coeff.real > -tol)), float(residual)


def _hermitian_null_basis(null_vectors, d):
    """Hermitian orthonormal basis of a dagger-closed operator null space."""
    raw = []
    for v in null_vectors:
        x = unvec(v, d)
        raw.append((x + dagger(x)) / 2)
        raw.append((x - dagger(x)) / 2j)
    basis = []
    for x in raw:
        y = x.astype(complex).copy()
        for b in basis:
            y -= hs_inner(b, y) * b
        norm = frobenius(y)
        if norm > 1e-8:
            basis.append(y / norm)
    return basis


def _affine_project(x, basis):
    """Project onto {sum c_k B_k : trace = 1} (affine least squares)."""
    coeffs = np.array([hs_inner(b, x) for b in basis])
    traces = np.array([np.trace(b) for b in basis])
    tnorm = np.vdot(traces, traces).real
    if tnorm < 1e-24:
        raise NoPSDRepresentative("fixed-point space is traceless")
    current = np.vdot(traces, coeffs)
    coeffs = coeffs + traces * (1.0 - current) / tnorm
    return sum(c * b for c, b in zip(coeffs, basis))


def _psd_clip(x):
    x = (x + dagger(x)) / 2
    vals, vecs = np.linalg.eigh(x)
    vals = np.clip(vals, 0.0, None)
    return (vecs * vals) @ dagger(vecs)


def _psd_representative(basis, iters=500, tol=1e-13):
    """Alternating projections between the fixed-point span and the PSD cone."""
    d = basis[0].shape[0]
    x = np.eye(d, dtype=complex) / d
    for _ in range(iters):
        x = _affine_project(x, basis)
        clipped = _psd_clip(x)
        gap = frobenius(x - clipped)
        x = clipped / max(np.trace(clipped).real, 1e-300)
        if gap < tol:
            break
    x = _affine_project(x, basis)
    vals = np.linalg.eigvalsh((x + dagger(x)) / 2)
    if vals[0] < -1e-9:
        raise NoPSDRepresentative(
            f"no density matrix in the fixed-point space (min eig {vals[0]:.2e})")
    x = _psd_clip(x)
    return x / np.trace(x).real


def _extremal_states(basis, tol=1e-9):
    """Extremal PSD unit-trace states when the Hermitian null basis commutes.

    Simultaneously diagonalizes the basis and enumerates support patterns of
    basic feasible points of the simplex slice.
    """
    d = basis[0].shape[0]
    for b1 in basis:
        for b2 in basis:
            if frobenius(b1 @ b2 - b2 @ b1) > tol:
                return None
    rng = np.random.default_rng(7)
    for _ in range(8):
        mix = sum(rng.normal() * b for b in basis)
        _, u = np.linalg.eigh(mix)
        diags = [np.diagonal(dagger(u) @ b @ u) for b in basis]
        offs = [frobenius(dagger(u) @ b @ u - np.diag(np.diagonal(dagger(u) @ b @ u)))
                for b in basis]
        if max(offs) < 1e-9:
            break
    else:
        return None
    span = np.stack([dg.real for dg in diags], axis=0)  # k x d
    found = []
    for size in range(1, len(basis) + 1):
        for support in itertools.combinations(range(d), size):
            # find c with (c @ span) zero off support and summing to 1
            mask = np.ones(d, dtype=bool)
            mask[list(support)] = False
            rows = [span[:, mask].T]            # zero off support
            rows.append(span.sum(axis=1)[None, :])  # unit trace row
            amat = np.concatenate(rows, axis=0)
            bvec = np.zeros(amat.shape[0])
            bvec[-1] = 1.0
            if np.linalg.matrix_rank(amat, tol=1e-10) < amat.shape[1]:
                continue                         # support does not pin a vertex
            c, *_ = np.linalg.lstsq(amat, bvec, rcond=None)
            if frobenius(amat @ c - bvec) > 1e-9:
                continue
            x = c @ span
            if np.min(x) < -1e-9:
                continue
            state = (u * np.clip(x, 0.0, None)) @ dagger(u)
            state /= np.trace(state).real
            if all(frobenius(state - s) > 1e-8 for s in found):
                found.append(state)
    return found or None


def fixed_point_family(generator_matrices, d, space=None, sector_basis=None,
                       rank_tol=RANK_TOL):
    """Common null space of vectorized generators, as a state family.

    ``generator_matrices`` act either on full d² vec space or, when
    ``sector_basis`` is given, on the coordinates of that operator basis
    (the number commutant under superselection).
    """
    stacked = np.concatenate([np.asarray(m, dtype=complex) for m in generator_matrices],
                             axis=0)
    null = null_space_basis(stacked, tol=rank_tol)
    if not null:
        return None
    if sector_basis is not None:
        null = [sum(c * b for c, b in zip(v, sector_basis)).reshape(-1) for v in null]
    herm = _hermitian_null_basis(null, d)
    if not herm:
        return None
    states = None
    commuting = False
    if len(herm) > 1:
        extremes = _extremal_states(herm)
        if extremes is not None:
            commuting = True
            states = extremes
    if states is None:
        try:
            states = [_psd_representative(herm)]
        except NoPSDRepresentative:
            return None
    out = []
    for s in states:
        s = _fix_phase(s)
        out.append(LocalState.from_matrix(s, space=space))
    return SteadyFamily(states=tuple(out), null_dim=len(herm), residual=0.0,
                        commuting=commuting)


def _fix_phase(rho):
    """Largest-magnitude diagonal entry made real positive (it already is for
    a density matrix; kept as the documented normalization)."""
    return (rho + dagger(rho)) / 2


def meanfield_steady_state(model, rank_tol=RANK_TOL):
    """Fixed points of the single-site generators, common across sites.

    Under number superselection the generators are restricted to the number
    commutant first. Returns a SteadyFamily (None when the sites share no
    fixed point). The family residual reports max_i ||L_i(rho)|| over the
    returned representatives.
    """
    d = model.space.dim
    decomposition = decompose_hamiltonian(model)
    gens = [single_site_generator(model, i, decomposition) for i in range(model.n)]
    sector = None
    mats = []
    if model.space.superselection:
        sector = number_commutant_basis(model.space)
        for g in gens:
            m, _ = g.matrix_on(sector)
            mats.append(m)
    else:
        mats = [g.matrix() for g in gens]
    family = fixed_point_family(mats, d, space=model.space, sector_basis=sector,
                                rank_tol=rank_tol)
    if family is None:
        return None
    residual = max(
        max(frobenius(g.apply(st.rho)) for g in gens) for st in family.states)
    family.residual = float(residual)
    return family


@dataclass
class SteadyStateResult:
    """Null space of the full vectorized generator."""

    basis: np.ndarray         # dim² x k, orthonormal columns
    null_dim: int
    dim: int

    def projection_residual(self, rho_global):
        """Distance of the normalized state vector from the null space."""
        v = vec(rho_global)
        v = v / np.linalg.norm(v)
        coeff = dagger(self.basis) @ v
        return float(np.linalg.norm(v - self.basis @ coeff))

    def contains(self, rho_global, tol=1e-8):
        return self.projection_residual(rho_global) < tol


def full_steady_states(model, rank_tol=RANK_TOL):
    """Brute-force steady-state space of the full generator."""
    ensure_dim(model.dim, "full steady-state solve")
    lmat = liouvillian_matrix(model)
    null = null_space_basis(lmat, tol=rank_tol)
    if null:
        basis = np.stack(null, axis=1)
    else:
        basis = np.zeros((model.dim**2, 0), dtype=complex)
    return SteadyStateResult(basis=basis, null_dim=len(null), dim=model.dim)


def iid_vector(rho_loc, n):
    """Row-major vec of the n-fold tensor power of a local state."""
    rho = np.array([[1.0 + 0j]])
    for _ in range(n):
        rho = np.kron(rho, np.asarray(rho_loc, dtype=complex))
    return vec(rho)


def verify_iid(model, rho_loc):
    """Frobenius norm of the generator applied to the product state.

    Direct application (no vectorization) for speed.
    """
    rho = np.array([[1.0 + 0j]])
    for _ in range(model.n):
        rho = np.kron(rho, np.asarray(rho_loc, dtype=complex))
    ensure_dim(model.dim, "product-state residual")
    return frobenius(apply_lindbladian(model, rho))
