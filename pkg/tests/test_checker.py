import numpy as np
from numpy.testing import assert_allclose

from iidsteady import checker, lattice, steady
from iidsteady.algebra import frobenius
from iidsteady.models import ExampleSpec, build_example
from iidsteady.permutations import pair_swap_matrix
from iidsteady.spaces import (
    PAULI, SPIN_MINUS, SPIN_PLUS, SPIN_X, SPIN_Z, spin_half,
)
from iidsteady.steady import LocalState, meanfield_steady_state

from conftest import random_density


def _state(model):
    return meanfield_steady_state(model).representative()


# ---------------------------------------------------------------------------
# individual conditions

def test_channel_image_full_rank_trivial(example1):
    v = checker.condition_channel_image(example1, _state(example1))
    assert v.passed and v.residual < 1e-14


def test_channel_image_dark_state():
    model = build_example(ExampleSpec(id=1, n=2, params={"b": 0.0}))
    down = LocalState.from_matrix(np.diag([0.0, 1.0]))
    assert checker.condition_channel_image(model, down).passed
    up = LocalState.from_matrix(np.diag([1.0, 0.0]))
    v = checker.condition_channel_image(model, up)
    assert not v.passed and v.residual > 0.5


def test_effective_invariance_paths(example2):
    # regular state: trivially invariant
    assert checker.condition_effective_invariance(example2, _state(example2)).passed
    # all-down product is not an effective-Hamiltonian eigenvector here
    down = LocalState.from_matrix(np.diag([0.0, 1.0]))
    v = checker.condition_effective_invariance(example2, down)
    assert not v.passed and v.residual > 1e-3


def test_effective_invariance_dephasing_pass():
    # pure dephasing keeps the all-up product invariant under pure exchange
    space = spin_half()
    model = lattice.build_model(
        3, space,
        pair_terms=[(i, j, 0.8 * pair_swap_matrix(space))
                    for i in range(3) for j in range(i + 1, 3)],
        lindblads=[(i, "dephase", np.diag([1.0, -1.0]), 0.5) for i in range(3)])
    up = LocalState.from_matrix(np.diag([1.0, 0.0]))
    assert checker.condition_channel_image(model, up).passed
    assert checker.condition_effective_invariance(model, up).passed
    report = checker.check_fixed_point_conditions(model, up)
    assert report.overall and report.data["oracle_residual"] < 1e-12


def test_projected_fixed_point_regular_reduces(example1):
    st = _state(example1)
    assert checker.condition_projected_fixed_point(example1, st).passed


def test_projected_fixed_point_stale_state():
    model = build_example(ExampleSpec(id=1, n=3, params={"b": 1.0, "gamma": 2.0}))
    stale = _state(build_example(ExampleSpec(id=1, n=3, params={"b": 1.1, "gamma": 2.0})))
    v = checker.condition_projected_fixed_point(model, stale)
    assert not v.passed and v.residual > 1e-3


def test_projected_conditions_trivial_for_pure():
    # rank-1 image: the projected space is one-dimensional
    model = build_example(ExampleSpec(id=2, n=3))
    down = LocalState.from_matrix(np.diag([0.0, 1.0]))
    assert checker.condition_projected_fixed_point(model, down).passed
    assert checker.condition_projected_pair_commutation(model, down).passed


def test_pair_commutation_threshold(example1):
    assert checker.condition_projected_pair_commutation(example1, _state(example1)).passed
    off = build_example(ExampleSpec(id=2, n=3, params={"b": 0.3, "r": 1.0, "gamma": 1.0}))
    v = checker.condition_projected_pair_commutation(off, _state(off))
    assert not v.passed and v.residual > 1e-3
    on = build_example(ExampleSpec(id=2, n=3, params={"b": 0.5, "r": 1.0, "gamma": 1.0}))
    assert checker.condition_projected_pair_commutation(on, _state(on)).passed


# ---------------------------------------------------------------------------
# assembled checks

def test_fixed_point_conditions_oracle_agreement(example1, example5):
    for model in (example1, example5):
        report = checker.check_fixed_point_conditions(model, _state(model))
        assert report.overall
        assert report.data["oracle_residual"] < 1e-10
        assert not any("disagreement" in note for note in report.notes)


def test_fixed_point_conditions_failure(example2):
    report = checker.check_fixed_point_conditions(example2, _state(example2))
    assert not report.overall
    assert report.data["oracle_residual"] > 1e-8


def test_regular_conditions(example1, example3):
    for model in (example1, example3):
        report = checker.check_regular_conditions(model, _state(model))
        assert report.overall
        assert report.data["equivalence_mode"]


def test_regular_conditions_sufficient_only_flag():
    model = build_example(ExampleSpec(id=1, n=2, params={"b": 0.0}))
    down = LocalState.from_matrix(np.diag([0.0, 1.0]))
    report = checker.check_regular_conditions(model, down)
    assert report.overall
    assert not report.data["equivalence_mode"]
    assert any("sufficient" in note for note in report.notes)


def test_qubit_search_threshold_scan():
    hits = []
    for b in np.arange(0.0, 2.0001, 0.1):
        model = build_example(ExampleSpec(
            id=2, n=3, params={"b": float(b), "r": 1.0, "gamma": 1.0}))
        report = checker.check_qubit_model(model)
        if report.overall:
            hits.append(round(float(b), 10))
    assert hits == [0.5]


def test_qubit_search_pure_branch():
    # pure loss without a field: the dark product state is steady
    space = spin_half()
    model = lattice.build_model(
        2, space,
        pair_terms=[(0, 1, 0.6 * pair_swap_matrix(space))],
        lindblads=[(i, "loss", SPIN_MINUS, 1.0) for i in range(2)])
    report = checker.check_qubit_model(model)
    assert report.overall
    witness = report.data["witnesses"][0]
    assert_allclose(witness.rho, np.diag([0.0, 1.0]), atol=1e-12)


# ---------------------------------------------------------------------------
# allowed pair couplings for qubits

def test_allowed_pair_basis_north_pole():
    state = LocalState.from_matrix(np.diag([1.0, 0.0]))
    ops, _ = checker.allowed_pair_coupling_basis(state)
    assert len(ops) == 2
    heis = sum(np.kron(PAULI[k], PAULI[k]) for k in "xyz")
    zz = np.kron(PAULI["z"], PAULI["z"])
    span = np.stack([op.reshape(-1) for op in ops], axis=1)
    for target in (heis, zz):
        coeff, *_ = np.linalg.lstsq(span, target.reshape(-1), rcond=None)
        assert np.linalg.norm(span @ coeff - target.reshape(-1)) < 1e-10


def test_allowed_pair_basis_matched_axis():
    b, gamma, r = 0.5, 1.0, 1.0
    den = 2 * b**2 + gamma**2
    s = np.array([0.0, -2 * gamma * b / den, -gamma**2 / den])
    rho = 0.5 * (np.eye(2) + s[0] * PAULI["x"] + s[1] * PAULI["y"] + s[2] * PAULI["z"])
    state = LocalState.from_matrix(rho)
    ops, _ = checker.allowed_pair_coupling_basis(state)
    axis = r * PAULI["y"] + PAULI["z"]
    target = np.kron(axis, axis).reshape(-1)
    span = np.stack([op.reshape(-1) for op in ops], axis=1)
    coeff, *_ = np.linalg.lstsq(span, target, rcond=None)
    assert np.linalg.norm(span @ coeff - target) < 1e-10


def test_allowed_pair_basis_defining_properties(rng):
    swap = pair_swap_matrix(spin_half())
    for _ in range(5):
        rho = random_density(rng, 2)
        state = LocalState.from_matrix(rho)
        ops, _ = checker.allowed_pair_coupling_basis(state)
        assert len(ops) >= 2
        rho2 = np.kron(rho, rho)
        for op in ops:
            assert frobenius(op @ rho2 - rho2 @ op) < 1e-10
            assert frobenius(op @ swap - swap @ op) < 1e-10
            left, right, _ = lattice.pair_shadows(op, 2)
            assert frobenius(left) < 1e-10 and frobenius(right) < 1e-10


def test_allowed_pair_basis_fully_mixed():
    state = LocalState.from_matrix(np.eye(2) / 2)
    ops, _ = checker.allowed_pair_coupling_basis(state)
    assert len(ops) == 6   # the whole symmetric partial-traceless sector


# ---------------------------------------------------------------------------
# commutant split (sufficient condition) and its per-site variant

def test_commutant_split_builtins(example1, example3, example4, example6):
    for model in (example1, example3, example4, example6):
        report = checker.check_commutant_split(model)
        assert report.overall, (model.name, report.to_dict())
        family = report.data["family"]
        assert family is not None
        gen = report.data["generator"]
        st = family.representative()
        assert frobenius(gen.apply(st.rho)) < 1e-12


def test_commutant_split_fails_for_cross_coupling(example2):
    report = checker.check_commutant_split(example2)
    assert not report.overall
    assert not report.verdicts["pair_terms_in_commutant"].passed


def test_commutant_split_fails_for_bare_hopping(example5):
    report = checker.check_commutant_split(example5)
    assert not report.overall
    assert not report.verdicts["pair_terms_in_commutant"].passed
    # yet the model does have a product steady state (regular-state route)
    st = _state(example5)
    assert checker.check_regular_conditions(example5, st).overall


def test_commutant_split_golden_fixed_point(example1):
    report = checker.check_commutant_split(example1)
    golden = np.array([[1.0, 2.0j], [-2.0j, 5.0]]) / 6.0
    assert_allclose(report.data["family"].representative().rho, golden, atol=1e-12)


def test_split_absorbs_nonuniform_number_terms():
    # site-dependent chemical potentials live in the commutant algebra under
    # superselection: the split must still pass
    spec = ExampleSpec(id=3, n=3)
    base = build_example(spec)
    extra = [(i, (0.3 + 0.4 * i) * base.space.number_operator()) for i in range(3)]
    model = lattice.build_model(
        base.n, base.space, base.pair_terms,
        tuple(base.site_terms) + tuple(extra), base.lindblads)
    report = checker.check_commutant_split(model)
    assert report.overall


def test_split_rejects_nonuniform_fields():
    spec = ExampleSpec(id=1, n=3)
    base = build_example(spec)
    extra = [(0, 0.7 * SPIN_Z)]
    model = lattice.build_model(
        base.n, base.space, base.pair_terms,
        tuple(base.site_terms) + tuple(extra), base.lindblads)
    report = checker.check_commutant_split(model)
    assert not report.verdicts["uniform_local_remainder"].passed


def test_shared_fixed_point_single_driven_site():
    space = spin_half()
    model = lattice.build_model(
        3, space,
        pair_terms=[(i, j, 0.8 * pair_swap_matrix(space))
                    for i in range(3) for j in range(i + 1, 3)],
        lindblads=[(0, "loss", SPIN_MINUS, 1.3)])
    report = checker.check_shared_fixed_point_split(model)
    assert report.overall
    st = report.data["family"].representative()
    assert_allclose(st.rho, np.diag([0.0, 1.0]), atol=1e-10)
    assert steady.verify_iid(model, st.rho) < 1e-12


def test_shared_fixed_point_uniform_reduces(example1):
    assert checker.check_shared_fixed_point_split(example1).overall


def test_shared_fixed_point_incompatible_sites():
    space = spin_half()
    model = lattice.build_model(
        2, space,
        pair_terms=[(0, 1, 0.8 * pair_swap_matrix(space))],
        lindblads=[(0, "loss", SPIN_MINUS, 1.0), (1, "gain", SPIN_PLUS, 1.0)])
    report = checker.check_shared_fixed_point_split(model)
    assert not report.overall


# ---------------------------------------------------------------------------
# dynamical stability

def test_product_stability_builtins(example1, example3, example4, example5, example6):
    assert checker.check_product_stability(example1).overall
    assert checker.check_product_stability(example3).overall
    assert checker.check_product_stability(example4).overall
    assert checker.check_product_stability(example6).overall
    # Hubbard: hopping is outside the commutant algebra
    report5 = checker.check_product_stability(example5)
    assert not report5.overall
    assert not report5.verdicts["pair_parts_in_commutant"].passed


def test_product_stability_fails_cross_coupling(example2):
    report = checker.check_product_stability(example2)
    assert not report.overall
    assert report.verdicts["pair_parts_in_commutant"].residual > 1e-2


def test_split_implies_stability_for_builtins_and_random(rng):
    # two-body models passing the split also pass the stability check
    candidates = []
    for eid in (1, 3, 4, 6):
        candidates.append(build_example(ExampleSpec(id=eid, n=3)))
    space = spin_half()
    for _ in range(5):
        # random commutant pair coefficients + uniform local term + channel
        pair_coeffs = rng.normal(size=3)
        pairs = []
        for k, (i, j) in enumerate([(0, 1), (0, 2), (1, 2)]):
            pairs.append((i, j, pair_coeffs[k] * pair_swap_matrix(space)))
        h = rng.normal() * SPIN_X + rng.normal() * SPIN_Z
        chan = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        model = lattice.build_model(
            3, space, pairs, [(i, h) for i in range(3)],
            [(i, "c", chan, 0.7) for i in range(3)])
        candidates.append(model)
    for model in candidates:
        split = checker.check_commutant_split(model)
        stability = checker.check_product_stability(model)
        assert split.overall, model.name
        assert stability.overall, model.name


def test_find_iid_steady_state(example1, example2):
    state, report = checker.find_iid_steady_state(example1)
    assert state is not None and report.overall
    state2, report2 = checker.find_iid_steady_state(example2)
    assert state2 is None and not report2.overall


def test_report_serialization(example1):
    report = checker.check_product_stability(example1)
    doc = report.to_dict()
    assert doc["overall"] is True
    assert set(doc["conditions"]) == {"pair_parts_in_commutant",
                                      "uniform_single_site_generator"}
    for entry in doc["conditions"].values():
        assert isinstance(entry["pass"], bool)
        assert isinstance(entry["residual"], float)


def test_allowed_pair_matrix_closed_form(rng):
    # hand-derived coefficient matrix of the commutator map in the
    # site-symmetric basis (x, y, z, xx, yy, zz, xy, zx, yz); the map is
    # antisymmetric, which pins every sign
    for _ in range(3):
        s = rng.uniform(-0.5, 0.5, size=3)
        sx, sy, sz = s
        rho = 0.5 * (np.eye(2) + sx * PAULI["x"] + sy * PAULI["y"]
                     + sz * PAULI["z"])
        _, mrep = checker.allowed_pair_coupling_basis(
            steady.LocalState.from_matrix(rho))
        r2 = np.sqrt(2)
        closed = 0.5 * np.array([
            [0, sz, -sy, 0, r2*sy*sz, -r2*sy*sz, sx*sz, -sx*sy, -sy**2 + sz**2],
            [-sz, 0, sx, -r2*sx*sz, 0, r2*sx*sz, -sy*sz, sx**2 - sz**2, sx*sy],
            [sy, -sx, 0, r2*sx*sy, -r2*sx*sy, 0, -sx**2 + sy**2, sy*sz, -sx*sz],
            [0, r2*sx*sz, -r2*sx*sy, 0, 0, 0, r2*sz, -r2*sy, 0],
            [-r2*sy*sz, 0, r2*sx*sy, 0, 0, 0, -r2*sz, 0, r2*sx],
            [r2*sy*sz, -r2*sx*sz, 0, 0, 0, 0, 0, r2*sy, -r2*sx],
            [-sx*sz, sy*sz, sx**2 - sy**2, -r2*sz, r2*sz, 0, 0, sx, -sy],
            [sx*sy, -sx**2 + sz**2, -sy*sz, r2*sy, 0, -r2*sy, -sx, 0, sz],
            [sy**2 - sz**2, -sx*sy, sx*sz, 0, -r2*sx, r2*sx, sy, -sz, 0]])
        assert np.abs(mrep - 4.0 * closed.T).max() < 1e-12
        assert np.abs(mrep + mrep.T).max() < 1e-13   # exact antisymmetry


def test_effective_invariance_cross_term_cancellation():
    # the per-term certificate is only sufficient: a pair piece and a site
    # term can cancel globally; the global test decides and the report
    # records the disagreement
    space = spin_half()
    x = PAULI["x"]
    pair = np.kron(np.eye(2), x).astype(complex)     # Hermitian, not irreducible
    model = lattice.build_model(
        2, space, pair_terms=[(0, 1, pair)], site_terms=[(1, -x)],
        lindblads=[(i, "loss", SPIN_MINUS, 1.0) for i in range(2)])
    up = LocalState.from_matrix(np.diag([1.0, 0.0]))
    verdict = checker.condition_effective_invariance(model, up)
    assert verdict.passed                      # global Hamiltonian cancels
    assert any("disagree" in n for n in verdict.notes)


def test_qubit_threshold_moves_with_axis_tilt():
    # the matched field scales with the tilt and the loss rate
    r, gamma = 0.8, 1.2
    b_star = r * gamma / 2
    for b, expect in [(b_star, True), (b_star + 0.07, False),
                      (b_star - 0.07, False), (0.0, False)]:
        model = build_example(ExampleSpec(
            id=2, n=3, params={"b": b, "r": r, "gamma": gamma}))
        assert checker.check_qubit_model(model).overall is expect, b
