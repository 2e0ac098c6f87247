"""Site-permutation operators with statistics-correct signs.

The permutation operator for sigma relabels sites, P X_i P† = X_sigma(i).
For spins and bosons it is the plain index shuffle. For fermions a
transposition (i, j) acting on an occupation basis state picks up the sign
(-1)^(n_i n_j + n_between (n_i + n_j)), with n_between the particle count
strictly between the two sites; general permutations are composed from
transpositions and the result is decomposition-independent.

Also here: the symmetrizer over the full group, the commutant-algebra
generator families (permutations, optionally with number-operator
monomials), a deterministic membership test with residual certificate, and
a brute-force commutant dimension for cross-checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .algebra import frobenius, vec
from .errors import CapExceeded, DEFAULT_GROUP_CAP, InvalidDimension, InvalidPermutation
from .spaces import LocalSpace

__all__ = [
    "PermutationOperator", "permutation_operator", "transposition_operator",
    "pair_swap_matrix", "symmetrize", "BcomBasis", "bcom_basis",
    "pair_commutant_generators", "bcom_membership", "commutant_dimension",
    "basis_occupations",
]


def basis_occupations(n, d):
    """(d**n, n) table of local basis indices, site 0 most significant."""
    idx = np.unravel_index(np.arange(d**n), (d,) * n)
    return np.stack(idx, axis=1)


@dataclass(frozen=True)
class PermutationOperator:
    """Signed permutation of the product basis: P|b> = sign[b] |index[b]>."""

    sigma: tuple
    n: int
    space: LocalSpace
    index: np.ndarray
    sign: np.ndarray

    def matrix(self):
        dim = len(self.index)
        m = np.zeros((dim, dim), dtype=complex)
        m[self.index, np.arange(dim)] = self.sign
        return m

    def conjugate(self, x):
        """P x P† without forming the dense permutation matrix."""
        x = np.asarray(x, dtype=complex)
        out = np.empty_like(x)
        out[np.ix_(self.index, self.index)] = (self.sign[:, None] * self.sign[None, :]) * x
        return out

    def compose_after(self, other):
        """Operator product self @ other (apply ``other`` first)."""
        if self.n != other.n or self.space is not other.space and self.space != other.space:
            raise InvalidPermutation("composition of operators on different spaces")
        sigma = tuple(self.sigma[other.sigma[k]] for k in range(self.n))
        return PermutationOperator(
            sigma=sigma,
            n=self.n,
            space=self.space,
            index=self.index[other.index],
            sign=other.sign * self.sign[other.index],
        )


def _identity_operator(n, space):
    dim = space.dim**n
    return PermutationOperator(
        sigma=tuple(range(n)), n=n, space=space,
        index=np.arange(dim), sign=np.ones(dim),
    )


def transposition_operator(i, j, n, space):
    """Permutation operator for the transposition (i, j)."""
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise InvalidPermutation(f"bad transposition ({i}, {j}) for n={n}")
    if i > j:
        i, j = j, i
    d = space.dim
    occ = basis_occupations(n, d)
    swapped = occ.copy()
    swapped[:, [i, j]] = occ[:, [j, i]]
    weights = d ** np.arange(n - 1, -1, -1)
    index = swapped @ weights
    if space.fermionic:
        nvals = np.asarray(space.number_diag)[occ]
        ni, nj = nvals[:, i], nvals[:, j]
        between = nvals[:, i + 1:j].sum(axis=1) if j > i + 1 else np.zeros(len(occ), dtype=int)
        sign = (-1.0) ** (ni * nj + between * (ni + nj))
    else:
        sign = np.ones(len(occ))
    sigma = list(range(n))
    sigma[i], sigma[j] = j, i
    return PermutationOperator(sigma=tuple(sigma), n=n, space=space, index=index, sign=sign)


def _cycle_transpositions(sigma):
    """Canonical transposition word for sigma, first-applied first."""
    n = len(sigma)
    seen = [False] * n
    word = []
    for start in range(n):
        if seen[start] or sigma[start] == start:
            seen[start] = True
            continue
        cycle = [start]
        seen[start] = True
        k = sigma[start]
        while k != start:
            cycle.append(k)
            seen[k] = True
            k = sigma[k]
        word.extend((cycle[0], c) for c in cycle[1:])
    return word


def permutation_operator(sigma, n, space):
    """Permutation operator for sigma, built from its canonical cycle word.

    For fermions the result does not depend on the transposition
    decomposition (tested), so products of these operators obey the exact
    group law.
    """
    sigma = tuple(int(s) for s in sigma)
    if len(sigma) != n or sorted(sigma) != list(range(n)):
        raise InvalidPermutation(f"{sigma} is not a permutation of 0..{n-1}")
    op = _identity_operator(n, space)
    for (i, j) in _cycle_transpositions(sigma):
        op = transposition_operator(i, j, n, space).compose_after(op)
    return op


def pair_swap_matrix(space):
    """Two-site swap in the ordered pair basis (strings absorbed)."""
    return transposition_operator(0, 1, 2, space).matrix()


def symmetrize(x, space, n=None, cap=DEFAULT_GROUP_CAP):
    """Group average (1/n!) sum_sigma P x P†; a projector onto the
    permutation-symmetric operators."""
    x = np.asarray(x, dtype=complex)
    d = space.dim
    if n is None:
        n = round(np.log(x.shape[0]) / np.log(d))
    if d**n != x.shape[0]:
        raise InvalidDimension(f"operator dimension {x.shape[0]} is not {d}**n")
    if n > cap:
        raise CapExceeded(f"symmetrizer over {n}! permutations exceeds cap n<={cap}", dim=n)
    acc = np.zeros_like(x)
    count = 0
    for sigma in itertools.permutations(range(n)):
        acc += permutation_operator(sigma, n, space).conjugate(x)
        count += 1
    return acc / count


@dataclass
class BcomBasis:
    """Generators spanning the algebra commuting with every product state."""

    generators: list          # dense matrices
    labels: list              # human-readable tags
    gram: np.ndarray
    rank: int
    n: int
    space: LocalSpace


def _number_monomials(n, space):
    """Diagonal vectors of prod_i n_i^{k_i} over the product basis."""
    occ = basis_occupations(n, space.dim)
    nvals = np.asarray(space.number_diag, dtype=float)[occ]
    exponents = itertools.product(range(space.n_max + 1), repeat=n)
    out = []
    for ks in exponents:
        diag = np.ones(len(occ))
        for site, k in enumerate(ks):
            if k:
                diag = diag * nvals[:, site] ** k
        out.append((ks, diag))
    return out


def bcom_basis(n, space, cap=DEFAULT_GROUP_CAP, rank_tol=1e-10):
    """Generator family for the product-state commutant.

    Spin (no superselection): the permutation operators alone. Under number
    superselection: monomials in the site number operators times permutation
    operators, closed because P n_i = n_sigma(i) P.
    """
    if n > cap:
        raise CapExceeded(f"group enumeration needs n <= {cap}, got {n}", dim=n)
    use_numbers = space.superselection and space.number_diag is not None
    if use_numbers:
        total = math.factorial(n) * (space.n_max + 1) ** n
        if total > 20000:
            raise CapExceeded(f"{total} commutant generators exceed the cap", dim=total)
    generators, labels = [], []
    for sigma in itertools.permutations(range(n)):
        pmat = permutation_operator(sigma, n, space).matrix()
        if use_numbers:
            for ks, diag in _number_monomials(n, space):
                generators.append(diag[:, None] * pmat)
                labels.append(f"n^{list(ks)}·P{list(sigma)}")
        else:
            generators.append(pmat)
            labels.append(f"P{list(sigma)}")
    stacked = np.stack([vec(g) for g in generators], axis=1)
    gram = np.conjugate(stacked.T) @ stacked
    eigs = np.linalg.eigvalsh(gram)
    rank = int(np.sum(eigs > rank_tol * max(eigs.max(), 1e-300)))
    return BcomBasis(generators=generators, labels=labels, gram=gram,
                     rank=rank, n=n, space=space)


def pair_commutant_generators(space):
    """Two-site commutant generators in the ordered pair basis."""
    return bcom_basis(2, space).generators


def bcom_membership(x, basis, tol=1e-10):
    """Least-squares projection of x onto span(generators).

    Returns (member, relative residual). Deterministic, with the residual as
    certificate; the projection is taken in the Hilbert-Schmidt norm.
    """
    gens = basis.generators if isinstance(basis, BcomBasis) else list(basis)
    x = np.asarray(x, dtype=complex)
    scale = frobenius(x)
    if scale == 0.0:
        return True, 0.0
    a = np.stack([vec(g) for g in gens], axis=1)
    coeff, *_ = np.linalg.lstsq(a, vec(x), rcond=None)
    residual = frobenius(vec(x) - a @ coeff) / scale
    return bool(residual < tol), float(residual)


def commutant_dimension(family, dim, rank_tol=1e-10):
    """Dimension of {Y : [Y, X] = 0 for all X in family}.

    Solved as the null space of the stacked commutation system; used as a
    randomized cross-check of the generator-based commutant bases.
    """
    if dim**4 > 4096**2:
        raise CapExceeded(f"commutation system for dim {dim} too large", dim=dim)
    eye = np.eye(dim)
    rows = []
    for x in family:
        x = np.asarray(x, dtype=complex)
        if x.shape != (dim, dim):
            raise InvalidDimension(f"family member has shape {x.shape}, expected {(dim, dim)}")
        rows.append(np.kron(x, eye) - np.kron(eye, x.T))
    stacked = np.concatenate(rows, axis=0)
    svals = np.linalg.svd(stacked, compute_uv=False)
    smax = svals.max(initial=0.0)
    rank = int(np.sum(svals > rank_tol * max(smax, 1e-300))) if smax > 0 else 0
    return dim * dim - rank
