"""Lattice model representation and generator machinery.

A model is n identical local spaces, two-site Hamiltonian terms on ordered
pairs i < j, one-site terms, and 1-local Lindblad channels with rates. The
evolution is

    d rho/dt = -i[H, rho] + sum_k ( L_k rho L_k† - {L_k† L_k, rho}/2 ).

Rates are folded into the Lindblad matrices exactly once (sqrt(rate) at the
single access point), so every formula downstream uses unit-rate operators.

Fermionic bookkeeping: two-site matrices are given in the ordered pair
occupation basis (the inter-site string is absorbed, all built-in pair terms
conserve the pair particle number). The global assembly used by the
brute-force paths reconstructs full string-carrying operators by
transporting the adjacent-pair embedding with a signed permutation, and
attaches explicit parity strings to odd single-site operators; agreement of
the two routes is part of the test suite.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .algebra import (
    dagger, embed_local, embed_pair, frobenius, hs_inner, left_right_action,
    partial_trace, traceless_part,
)
from .errors import InvalidDimension, InvalidParams, ensure_dim
from .permutations import permutation_operator
from .spaces import LocalSpace

__all__ = [
    "LatticeModel", "build_model",
    "scaled_lindblads", "site_lindblad_table",
    "embed_site_operator", "embed_pair_operator",
    "hamiltonian_matrix", "lindblad_matrices", "effective_hamiltonian",
    "apply_dissipator", "apply_lindbladian", "liouvillian_matrix",
    "HamiltonianDecomposition", "decompose_hamiltonian",
    "extract_irreducible_pair", "extract_local",
    "pair_shadows", "irreducible_pair_part",
    "LocalGenerator", "single_site_generator",
    "number_commutant_basis", "number_sector_projector_defect",
]


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """n sites, two-site and one-site Hermitian terms, 1-local Lindblads.

    ``pair_terms``: tuples (i, j, matrix d²×d²) with i < j, matrix ordered
    (site i, site j). ``site_terms``: tuples (i, matrix d×d).
    ``lindblads``: tuples (site, label, matrix d×d, rate >= 0); the stored
    matrix is the bare channel operator, the rate is applied on access.
    """

    n: int
    space: LocalSpace
    pair_terms: tuple = ()
    site_terms: tuple = ()
    lindblads: tuple = ()
    name: str = ""

    @property
    def dim(self):
        return self.space.dim**self.n


def build_model(n, space, pair_terms=(), site_terms=(), lindblads=(), name="",
                hermiticity_tol=1e-12):
    """Validate and freeze a LatticeModel."""
    if n < 1:
        raise InvalidParams(f"need at least one site, got n={n}")
    d = space.dim
    pt = []
    for (i, j, m) in pair_terms:
        m = np.asarray(m, dtype=complex)
        if not (0 <= i < j < n):
            raise InvalidParams(f"pair ({i}, {j}) invalid for n={n}")
        if m.shape != (d * d, d * d):
            raise InvalidDimension(f"pair term on ({i},{j}) has shape {m.shape}")
        if frobenius(m - dagger(m)) > hermiticity_tol * max(1.0, frobenius(m)):
            raise InvalidParams(f"pair term on ({i},{j}) is not Hermitian")
        pt.append((int(i), int(j), m))
    st = []
    for (i, m) in site_terms:
        m = np.asarray(m, dtype=complex)
        if not 0 <= i < n:
            raise InvalidParams(f"site {i} invalid for n={n}")
        if m.shape != (d, d):
            raise InvalidDimension(f"site term on {i} has shape {m.shape}")
        if frobenius(m - dagger(m)) > hermiticity_tol * max(1.0, frobenius(m)):
            raise InvalidParams(f"site term on {i} is not Hermitian")
        st.append((int(i), m))
    lb = []
    for (i, label, m, rate) in lindblads:
        m = np.asarray(m, dtype=complex)
        if not 0 <= i < n:
            raise InvalidParams(f"Lindblad site {i} invalid for n={n}")
        if m.shape != (d, d):
            raise InvalidDimension(f"Lindblad on {i} has shape {m.shape}")
        if rate < 0:
            raise InvalidParams(f"negative rate {rate} on site {i}")
        lb.append((int(i), str(label), m, float(rate)))
    return LatticeModel(n=n, space=space, pair_terms=tuple(pt), site_terms=tuple(st),
                        lindblads=tuple(lb), name=name)


def scaled_lindblads(model, site=None):
    """(site, label, sqrt(rate) * L) triples; the single rate-folding point."""
    out = []
    for (i, label, m, rate) in model.lindblads:
        if site is None or i == site:
            out.append((i, label, np.sqrt(rate) * m))
    return out


def site_lindblad_table(model):
    """site -> sorted list of (label, scaled matrix)."""
    table = {i: [] for i in range(model.n)}
    for (i, label, m) in scaled_lindblads(model):
        table[i].append((label, m))
    for i in table:
        table[i].sort(key=lambda pair: pair[0])
    return table


# ---------------------------------------------------------------------------
# Global assembly (brute-force / oracle path)

def _string_diag(model, site):
    """Diagonal of the parity string over sites < site, on the full basis."""
    d = model.space.dim
    par = model.space.parity_diag()
    diag = np.ones(1)
    for _ in range(site):
        diag = np.kron(diag, par)
    diag = np.kron(diag, np.ones(d ** (model.n - site)))
    return diag


def _parity_split(op, space):
    """Split a local operator into parity-even and parity-odd blocks."""
    par = space.parity_diag()
    even_mask = np.equal.outer(par, par)
    op = np.asarray(op, dtype=complex)
    return np.where(even_mask, op, 0.0), np.where(even_mask, 0.0, op)


def embed_site_operator(op, site, model):
    """Embed a single-site operator globally, with a parity string on the
    odd part for fermionic models."""
    n, d = model.n, model.space.dim
    ensure_dim(d**n)
    if not model.space.fermionic:
        return embed_local(op, site, n, d)
    even, odd = _parity_split(op, model.space)
    out = embed_local(even, site, n, d)
    if frobenius(odd) > 0.0:
        out = out + _string_diag(model, site)[:, None] * embed_local(odd, site, n, d)
    return out


def embed_pair_operator(op, i, j, model):
    """Embed a two-site operator given in the ordered pair basis at (i, j).

    Spin/boson: plain tensor embedding. Fermion: embed at the leading
    adjacent pair and transport with the signed permutation taking (0, 1) to
    (i, j), which regenerates the inter-site strings.
    """
    n, d = model.n, model.space.dim
    ensure_dim(d**n)
    if not model.space.fermionic:
        return embed_pair(op, i, j, n, d)
    base = np.kron(np.asarray(op, dtype=complex), np.eye(d ** (n - 2)))
    if (i, j) == (0, 1):
        return base
    sigma = _pair_placement(i, j, n)
    return permutation_operator(sigma, n, model.space).conjugate(base)


def _pair_placement(i, j, n):
    """Permutation sending 0 -> i, 1 -> j, remaining slots in order."""
    rest_targets = [k for k in range(n) if k not in (i, j)]
    sigma = [0] * n
    sigma[0], sigma[1] = i, j
    for slot, target in zip(range(2, n), rest_targets):
        sigma[slot] = target
    return tuple(sigma)


def hamiltonian_matrix(model):
    h = np.zeros((model.dim, model.dim), dtype=complex)
    for (i, j, m) in model.pair_terms:
        h += embed_pair_operator(m, i, j, model)
    for (i, m) in model.site_terms:
        h += embed_site_operator(m, i, model)
    return h


def lindblad_matrices(model):
    """Global sqrt(rate)-scaled Lindblad operators."""
    return [(i, label, embed_site_operator(m, i, model))
            for (i, label, m) in scaled_lindblads(model)]


_ASSEMBLY_CACHE = weakref.WeakKeyDictionary()


def _assembled(model):
    cached = _ASSEMBLY_CACHE.get(model)
    if cached is None:
        h = hamiltonian_matrix(model)
        ls = [m for (_, _, m) in lindblad_matrices(model)]
        cached = (h, ls)
        _ASSEMBLY_CACHE[model] = cached
    return cached


def effective_hamiltonian(model):
    """H - (i/2) sum L†L, the non-Hermitian no-jump generator."""
    h, ls = _assembled(model)
    out = h.astype(complex).copy()
    for l in ls:
        out -= 0.5j * (dagger(l) @ l)
    return out


def apply_dissipator(l, rho):
    l = np.asarray(l, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if l.shape != rho.shape:
        raise InvalidDimension(f"operator {l.shape} vs state {rho.shape}")
    ldl = dagger(l) @ l
    return l @ rho @ dagger(l) - 0.5 * (ldl @ rho + rho @ ldl)


def apply_lindbladian(model, rho):
    """Direct application of the full generator (no vectorization)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (model.dim, model.dim):
        raise InvalidDimension(f"state has shape {rho.shape}, expected {model.dim}")
    h, ls = _assembled(model)
    out = -1j * (h @ rho - rho @ h)
    for l in ls:
        out += apply_dissipator(l, rho)
    return out


def liouvillian_matrix(model):
    """Matrix of the generator on row-major vectorized states."""
    h, ls = _assembled(model)
    dim = model.dim
    ensure_dim(dim, "vectorized generator (dim² rows)")
    eye = np.eye(dim)
    m = -1j * (left_right_action(h, eye) - left_right_action(eye, h))
    for l in ls:
        ldl = dagger(l) @ l
        m += left_right_action(l, dagger(l))
        m -= 0.5 * (left_right_action(ldl, eye) + left_right_action(eye, ldl))
    return m


# ---------------------------------------------------------------------------
# Hamiltonian decomposition into irreducible pieces

def pair_shadows(m, d):
    """Traceless one-site shadows (left, right) and scalar part of a pair matrix."""
    m = np.asarray(m, dtype=complex)
    t4 = m.reshape(d, d, d, d)
    tr_right = np.einsum("ikjk->ij", t4)
    tr_left = np.einsum("kikj->ij", t4)
    c = np.trace(m) / (d * d)
    left = tr_right / d - c * np.eye(d)
    right = tr_left / d - c * np.eye(d)
    return left, right, c


def irreducible_pair_part(m, d):
    """Part of a pair matrix with vanishing partial trace on either slot."""
    left, right, c = pair_shadows(m, d)
    eye = np.eye(d)
    return (np.asarray(m, dtype=complex)
            - np.kron(left, eye) - np.kron(eye, right) - c * np.eye(d * d))


@dataclass
class HamiltonianDecomposition:
    """Unique split H = sum_ij H_ij + sum_i H_i + constant.

    Pair parts are partial-traceless on both slots, site parts traceless.
    For fermionic models this is the term-level (pair-basis) decomposition,
    matching the fermionic-locality convention of the checks.
    """

    pair_parts: dict          # (i, j) -> d²×d² matrix
    site_parts: dict          # i -> d×d matrix
    constant: float


def decompose_hamiltonian(model):
    d = model.space.dim
    summed = {}
    for (i, j, m) in model.pair_terms:
        key = (i, j)
        summed[key] = summed.get(key, 0) + m
    pair_parts = {}
    site_acc = {i: np.zeros((d, d), dtype=complex) for i in range(model.n)}
    constant = 0.0
    for (i, j), m in summed.items():
        left, right, c = pair_shadows(m, d)
        pair_parts[(i, j)] = irreducible_pair_part(m, d)
        site_acc[i] += left
        site_acc[j] += right
        constant += c.real
    for (i, m) in model.site_terms:
        site_acc[i] += traceless_part(m)
        constant += np.trace(m).real / d
    return HamiltonianDecomposition(pair_parts=pair_parts, site_parts=site_acc,
                                    constant=constant)


def extract_irreducible_pair(h, i, j, n, d):
    """Irreducible two-site part of a global Hamiltonian matrix.

    Literal partial-trace formula; coincides with the term-level pair parts
    for string-free (spin/boson) operators.
    """
    if not (0 <= i < j < n):
        raise InvalidDimension(f"need 0 <= i < j < n, got ({i}, {j})")
    pair = partial_trace(h, [i, j], n, d) / d ** (n - 2)
    left = partial_trace(h, [i], n, d) / d ** (n - 1)
    right = partial_trace(h, [j], n, d) / d ** (n - 1)
    c = np.trace(h) / d**n
    eye = np.eye(d)
    return pair - np.kron(left, eye) - np.kron(eye, right) + c * np.eye(d * d)


def extract_local(h, i, n, d):
    """Traceless one-site part of a global Hamiltonian matrix."""
    if not 0 <= i < n:
        raise InvalidDimension(f"site {i} out of range")
    return partial_trace(h, [i], n, d) / d ** (n - 1) - (np.trace(h) / d**n) * np.eye(d)


# ---------------------------------------------------------------------------
# Single-site generators

@dataclass
class LocalGenerator:
    """Single-site generator -i[h, .] + sum_a D_{L_a}(.) on d x d matrices."""

    h: np.ndarray
    lindblads: tuple

    @property
    def dim(self):
        return self.h.shape[0]

    def apply(self, rho):
        rho = np.asarray(rho, dtype=complex)
        out = -1j * (self.h @ rho - rho @ self.h)
        for l in self.lindblads:
            out += apply_dissipator(l, rho)
        return out

    def matrix(self):
        d = self.dim
        eye = np.eye(d)
        m = -1j * (left_right_action(self.h, eye) - left_right_action(eye, self.h))
        for l in self.lindblads:
            ldl = dagger(l) @ l
            m += left_right_action(l, dagger(l))
            m -= 0.5 * (left_right_action(ldl, eye) + left_right_action(eye, ldl))
        return m

    def matrix_on(self, basis):
        """Representation on an operator basis; returns (matrix, defect).

        ``defect`` is the norm of the component of the image falling outside
        span(basis) — zero when the span is invariant.
        """
        cols = []
        defect = 0.0
        for b in basis:
            image = self.apply(b)
            coeffs = np.array([hs_inner(e, image) for e in basis])
            recon = sum(c * e for c, e in zip(coeffs, basis))
            defect = max(defect, frobenius(image - recon))
            cols.append(coeffs)
        return np.stack(cols, axis=1), defect


def single_site_generator(model, i, decomposition=None):
    """Generator with the site's unique traceless Hamiltonian part
    (including shadows of the pair terms) and its scaled Lindblads."""
    if decomposition is None:
        decomposition = decompose_hamiltonian(model)
    ls = tuple(m for (_, _, m) in scaled_lindblads(model, i))
    return LocalGenerator(h=decomposition.site_parts[i], lindblads=ls)


# ---------------------------------------------------------------------------
# Number-superselection sector

def number_commutant_basis(space):
    """Orthonormal basis (matrix units) of {X : [X, n] = 0} on one site."""
    diag = np.asarray(space.number_diag)
    d = space.dim
    basis = []
    for k in range(d):
        for l in range(d):
            if diag[k] == diag[l]:
                unit = np.zeros((d, d), dtype=complex)
                unit[k, l] = 1.0
                basis.append(unit)
    return basis


def number_sector_projector_defect(gen, basis=None, space=None):
    """How far a local generator leaks out of the number commutant."""
    if basis is None:
        basis = number_commutant_basis(space)
    _, defect = gen.matrix_on(basis)
    return defect
