import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from iidsteady import permutations as perms
from iidsteady.algebra import embed_local, partial_trace
from iidsteady.errors import CapExceeded, InvalidPermutation
from iidsteady.spaces import (
    electron_fermion, hardcore_boson, spin, spin_half, spinless_fermion,
)

from conftest import random_density, random_hermitian, random_superselected_density

SPACES = [spin_half(), spinless_fermion(), hardcore_boson(), electron_fermion()]


def test_identity_permutation():
    for space in SPACES:
        op = perms.permutation_operator(tuple(range(3)), 3, space)
        assert_allclose(op.matrix(), np.eye(space.dim**3))


def test_invalid_permutation():
    with pytest.raises(InvalidPermutation):
        perms.permutation_operator((0, 0, 1), 3, spin_half())


def test_fermionic_swap_explicit_form():
    # two-site swap equals 1 - (c0† - c1†)(c0 - c1) for spinless fermions
    space = spinless_fermion()
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    zp = np.diag([1.0, -1.0])
    c0, c1 = np.kron(a, np.eye(2)), np.kron(zp, a)
    explicit = np.eye(4) - (c0.conj().T - c1.conj().T) @ (c0 - c1)
    assert_allclose(perms.pair_swap_matrix(space), explicit, atol=1e-14)


def test_hardcore_boson_swap_explicit_form():
    space = hardcore_boson()
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    b0, b1 = np.kron(a, np.eye(2)), np.kron(np.eye(2), a)
    n0, n1 = b0.conj().T @ b0, b1.conj().T @ b1
    explicit = np.eye(4) - (b0.conj().T - b1.conj().T) @ (b0 - b1) + 2 * n0 @ n1
    assert_allclose(perms.pair_swap_matrix(space), explicit, atol=1e-14)


def test_spin_half_fermion_swap_explicit_form():
    # product over both modes of (1 - (c_i† - c_j†)(c_i - c_j))
    from iidsteady.lattice import build_model, embed_site_operator
    from iidsteady.spaces import annihilators
    space = electron_fermion()
    model = build_model(2, space)
    cs = [embed_site_operator(c, i, model)
          for i in range(2) for c in annihilators(space)]
    c0u, c0d, c1u, c1d = cs
    explicit = ((np.eye(16) - (c0u.conj().T - c1u.conj().T) @ (c0u - c1u))
                @ (np.eye(16) - (c0d.conj().T - c1d.conj().T) @ (c0d - c1d)))
    swap = perms.transposition_operator(0, 1, 2, space).matrix()
    assert_allclose(swap, explicit, atol=1e-13)


def test_unitarity_and_inverse():
    for space in SPACES:
        for sigma in [(1, 0, 2), (2, 0, 1), (1, 2, 0)]:
            p = perms.permutation_operator(sigma, 3, space).matrix()
            assert_allclose(p.conj().T @ p, np.eye(space.dim**3), atol=1e-14)
            inv = tuple(np.argsort(sigma))
            pinv = perms.permutation_operator(inv, 3, space).matrix()
            assert_allclose(p.conj().T, pinv, atol=1e-14)


def test_conjugation_law(rng):
    # P X_i P† = X_sigma(i) for every statistics
    for space in SPACES:
        n = 3
        x = random_hermitian(rng, space.dim)
        from iidsteady.lattice import build_model, embed_site_operator
        model = build_model(n, space)
        for sigma in itertools.permutations(range(n)):
            p = perms.permutation_operator(sigma, n, space)
            for i in range(n):
                lhs = p.conjugate(embed_site_operator(x, i, model))
                rhs = embed_site_operator(x, sigma[i], model)
                assert np.linalg.norm(lhs - rhs) < 1e-12


def test_group_law_all_statistics(rng):
    n = 4
    for space in [spin_half(), spinless_fermion(), electron_fermion()]:
        for _ in range(6):
            s = tuple(rng.permutation(n))
            t = tuple(rng.permutation(n))
            ps = perms.permutation_operator(s, n, space)
            pt = perms.permutation_operator(t, n, space)
            st = tuple(s[t[k]] for k in range(n))
            pst = perms.permutation_operator(st, n, space)
            assert_allclose(ps.compose_after(pt).matrix(), pst.matrix())
            assert_allclose(ps.matrix() @ pt.matrix(), pst.matrix())


def test_decomposition_independence_fermion():
    # same transposition word in two different orders realizing one sigma
    space = spinless_fermion()
    n = 4
    sigma = (1, 2, 3, 0)       # 4-cycle
    canonical = perms.permutation_operator(sigma, n, space).matrix()
    # alternative word realizing the same cycle, first-applied first
    word = [(2, 3), (1, 2), (0, 1)]
    op = perms.permutation_operator(tuple(range(n)), n, space)
    for (i, j) in word:
        op = perms.transposition_operator(i, j, n, space).compose_after(op)
    assert op.sigma == sigma
    assert_allclose(op.matrix(), canonical)


def test_partial_trace_identities():
    # Tr_i[P_ij] = identity for spin/boson, parity for fermions
    for space in [spin_half(), hardcore_boson()]:
        p = perms.pair_swap_matrix(space)
        assert_allclose(partial_trace(p, [1], 2, space.dim), np.eye(space.dim))
    for space in [spinless_fermion(), electron_fermion()]:
        p = perms.pair_swap_matrix(space)
        parity = np.diag(space.parity_diag())
        assert_allclose(partial_trace(p, [1], 2, space.dim), parity)


def test_symmetrize_idempotent_and_orbit(rng):
    space = spin_half()
    z0 = embed_local(np.diag([1.0, -1.0]), 0, 2, 2)
    z1 = embed_local(np.diag([1.0, -1.0]), 1, 2, 2)
    assert_allclose(perms.symmetrize(z0, space), (z0 + z1) / 2, atol=1e-14)
    x = random_hermitian(rng, 8)
    s1 = perms.symmetrize(x, space, n=3)
    s2 = perms.symmetrize(s1, space, n=3)
    assert_allclose(s1, s2, atol=1e-13)
    for sigma in itertools.permutations(range(3)):
        p = perms.permutation_operator(sigma, 3, space).matrix()
        assert np.linalg.norm(p @ s1 - s1 @ p) < 1e-12


def test_symmetrize_cap():
    with pytest.raises(CapExceeded):
        perms.symmetrize(np.eye(2**7), spin_half(), n=7)


def test_bcom_ranks_spin():
    assert perms.bcom_basis(2, spin_half()).rank == 2
    assert perms.bcom_basis(3, spin_half()).rank == 5
    assert perms.bcom_basis(2, spin(3)).rank == 2


def test_commutant_dimension_trivial():
    assert perms.commutant_dimension([np.eye(4)], 4) == 16


def test_commutant_matches_gram_rank_spin(rng):
    # randomized product-state commutants against the generator ranks
    for (d, n, expected) in [(2, 2, 2), (2, 3, 5), (3, 2, 2)]:
        space = spin(d)
        family = []
        for _ in range(2 * d * d):
            rho = random_density(rng, d)
            power = np.array([[1.0 + 0j]])
            for _ in range(n):
                power = np.kron(power, rho)
            family.append(power)
        dim = perms.commutant_dimension(family, d**n)
        assert dim == expected == perms.bcom_basis(n, space).rank


def test_commutant_matches_gram_rank_superselected(rng):
    space = spinless_fermion()
    family = []
    for _ in range(12):
        rho = random_superselected_density(rng, space)
        family.append(np.kron(rho, rho))
    dim = perms.commutant_dimension(family, 4)
    assert dim == perms.bcom_basis(2, space).rank == 6


def test_schur_weyl_consistency_small(rng):
    # commutant of random n-fold powers equals the permutation span rank
    for d, n in [(2, 4), (3, 3)]:
        space = spin(d)
        family = []
        for _ in range(2 * d * d):
            rho = random_density(rng, d)
            power = np.array([[1.0 + 0j]])
            for _ in range(n):
                power = np.kron(power, rho)
            family.append(power)
        assert perms.commutant_dimension(family, d**n) == perms.bcom_basis(n, space).rank


def test_membership_heisenberg(rng):
    from iidsteady.spaces import SPIN_X, SPIN_Y, SPIN_Z
    gens = perms.pair_commutant_generators(spin_half())
    heis = sum(np.kron(s, s) for s in (SPIN_X, SPIN_Y, SPIN_Z))
    member, residual = perms.bcom_membership(2 * heis + 0.5 * np.eye(4), gens)
    assert member and residual < 1e-12


def test_membership_rejects_cross_coupling():
    from iidsteady.spaces import SPIN_Y, SPIN_Z
    gens = perms.pair_commutant_generators(spin_half())
    cross = np.kron(SPIN_Y, SPIN_Z) + np.kron(SPIN_Z, SPIN_Y)
    member, residual = perms.bcom_membership(cross, gens)
    assert not member and residual > 0.5


def test_membership_rejects_bare_hopping():
    from iidsteady.models import _hop_pair
    space = electron_fermion()
    gens = perms.pair_commutant_generators(space)
    member, residual = perms.bcom_membership(_hop_pair(space), gens)
    assert not member and residual > 0.1


def test_bcom_basis_caps():
    from iidsteady.spaces import truncated_boson
    with pytest.raises(CapExceeded):
        perms.bcom_basis(7, spin_half())
    with pytest.raises(CapExceeded):
        perms.bcom_basis(6, truncated_boson(3))
