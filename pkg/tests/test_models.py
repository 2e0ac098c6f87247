import numpy as np
import pytest
from numpy.testing import assert_allclose

from iidsteady import checker, lattice, steady
from iidsteady.algebra import frobenius
from iidsteady.errors import InvalidParams
from iidsteady.models import (
    ExampleSpec, all_pairs, build_example, expected_values,
)
from iidsteady.permutations import bcom_membership, pair_commutant_generators


def _draw_params(rng, eid):
    u = lambda lo=0.3, hi=1.8: float(rng.uniform(lo, hi))
    if eid == 1:
        return {"j": u(), "b": u(), "gamma": u()}
    if eid == 2:
        r, gamma = u(0.5, 1.5), u()
        return {"j": u(), "r": r, "gamma": gamma, "b": r * gamma / 2}
    if eid in (3, 6):
        return {"t": u(), "v": u(), "mu": u(), "gamma_minus": u(), "gamma_plus": u()}
    if eid == 4:
        return {"t": u(), "j": u(), "bx": u(), "bz": u(), "gamma": u()}
    if eid == 5:
        return {"t": u(), "u": u(), "v": u(), "bx": u(), "bz": u(),
                "gamma_plus_up": u(), "gamma_minus_up": u(),
                "gamma_plus_down": u(), "gamma_minus_down": u()}
    raise AssertionError(eid)


def _n_for(eid):
    return 2 if eid == 5 else 3


def test_unknown_example_and_param():
    with pytest.raises(InvalidParams):
        build_example(ExampleSpec(id=9))
    with pytest.raises(InvalidParams):
        build_example(ExampleSpec(id=1, params={"zeta": 1.0}))
    with pytest.raises(InvalidParams):
        build_example(ExampleSpec(id=1, n=2, pairs=((0, 2),)))


def test_geometry_override():
    chain = build_example(ExampleSpec(id=1, n=4, pairs=((0, 1), (1, 2), (2, 3))))
    assert len(chain.pair_terms) == 3
    full = build_example(ExampleSpec(id=1, n=4))
    assert len(full.pair_terms) == len(all_pairs(4))


def test_meanfield_matches_closed_forms(rng):
    # five random draws per catalog entry: the mean-field solution equals
    # the closed form and its product annihilates the full generator
    for eid in (1, 2, 3, 4, 5, 6):
        for _ in range(5):
            spec = ExampleSpec(id=eid, n=_n_for(eid), params=_draw_params(rng, eid))
            model = build_example(spec)
            ev = expected_values(spec)
            family = steady.meanfield_steady_state(model)
            assert family is not None, (eid, spec.params)
            if ev.rho_loc_family is not None:
                for r in (0.0, 0.5, 1.0):
                    ok, residual = family.contains(ev.rho_loc_family(r))
                    assert ok, (eid, r, residual)
                rho = ev.rho_loc_family(1.0)
            else:
                rho = family.representative().rho
                assert frobenius(rho - ev.rho_loc) < 1e-10, (eid, spec.params)
            assert steady.verify_iid(model, rho) < 1e-10, (eid, spec.params)


def test_magnetization_and_number_totals(rng):
    from iidsteady.spaces import spin_operators
    for eid in (1, 4, 5):
        for _ in range(3):
            spec = ExampleSpec(id=eid, n=_n_for(eid), params=_draw_params(rng, eid))
            model = build_example(spec)
            ev = expected_values(spec)
            rho_loc = (ev.rho_loc_family(1.0) if ev.rho_loc_family is not None
                       else ev.rho_loc)
            rho = np.array([[1.0 + 0j]])
            for _ in range(model.n):
                rho = np.kron(rho, rho_loc)
            if eid == 1:
                from iidsteady.spaces import SPIN_X, SPIN_Y, SPIN_Z
                sx, sy, sz = SPIN_X, SPIN_Y, SPIN_Z
            else:
                sx, sy, sz = spin_operators(model.space)
            mag = np.array([
                sum(np.trace(lattice.embed_site_operator(s, i, model) @ rho).real
                    for i in range(model.n)) for s in (sx, sy, sz)])
            assert_allclose(mag, ev.magnetization, atol=1e-10)
            if ev.total_number is not None:
                nop = model.space.number_operator()
                total = sum(np.trace(
                    lattice.embed_site_operator(nop, i, model) @ rho).real
                    for i in range(model.n))
                assert abs(total - ev.total_number) < 1e-10


def test_hubbard_constraint_random_draws(rng):
    for _ in range(5):
        spec = ExampleSpec(id=5, n=2, params=_draw_params(rng, 5))
        ev = expected_values(spec)
        assert ev.constraint_residual < 1e-12
        model = build_example(spec)
        family = steady.meanfield_steady_state(model)
        assert frobenius(family.representative().rho - ev.rho_loc) < 1e-10


def test_threshold_formula(rng):
    for _ in range(3):
        params = _draw_params(rng, 2)
        spec = ExampleSpec(id=2, n=3, params=params)
        ev = expected_values(spec)
        assert abs(ev.threshold_field - params["r"] * params["gamma"] / 2) < 1e-15
        model = build_example(spec)    # built at the threshold field
        assert checker.check_qubit_model(model).overall


def test_tj_family_endpoints():
    spec = ExampleSpec(id=4, n=2)
    ev = expected_values(spec)
    vacuum = ev.rho_loc_family(0.0)
    assert_allclose(vacuum, np.diag([1.0, 0.0, 0.0]), atol=1e-14)
    model = build_example(spec)
    result = steady.full_steady_states(model)
    assert result.null_dim > 1
    for r in (0.0, 0.5, 1.0):
        rho = ev.rho_loc_family(r)
        assert result.projection_residual(np.kron(rho, rho)) < 1e-8


def test_hardcore_boson_hamiltonian_in_commutant(example6):
    gens = pair_commutant_generators(example6.space)
    for (_, _, m) in example6.pair_terms:
        member, residual = bcom_membership(m, gens)
        assert member and residual < 1e-12


def test_spin_exchange_passes_split_any_geometry(rng):
    model = build_example(ExampleSpec(
        id=1, n=4, params=_draw_params(rng, 1), pairs=((0, 2), (1, 3), (0, 3))))
    assert checker.check_commutant_split(model).overall
    family = steady.meanfield_steady_state(model)
    assert steady.verify_iid(model, family.representative().rho) < 1e-10


def test_cross_coupling_fails_stability_every_field(rng):
    for b in (0.0, 0.5, 1.3):
        model = build_example(ExampleSpec(
            id=2, n=3, params={"b": b, "r": 1.0, "gamma": 1.0}))
        assert not checker.check_product_stability(model).overall
