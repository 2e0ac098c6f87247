"""Time evolution, spectra, correlation and response functions.

Evolution is dense and exact at desk scale: the vectorized generator is
exponentiated (one matrix exponential per distinct time step, then
stepping), so there is no ODE-tolerance ambiguity.

For models whose product form is dynamically stable, the same dynamics is
available in closed form on a single site, and two-time correlation
functions of uniform 1-local sums propagate with the small matrix
representing the single-site generator on the traceless sector. Exactness
note: the adjoint single-site generator is unital but not
trace-annihilating, so the propagation law for the full (unconnected)
correlator carries an affine term proportional to tr[X ℒ(I)]; it is
included here, cancels for connected correlators at the steady state, and
is cross-checked against the brute-force regression path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    dagger, eigen_decomposition, frobenius, hs_inner, matrix_exponential,
    trace_norm, unvec, vec,
)
from .errors import (
    ConditionViolation, InsufficientDecay, STRUCTURAL_TOL, ensure_dim,
)
from .lattice import (
    embed_site_operator, liouvillian_matrix, number_commutant_basis,
    single_site_generator,
)
from .checker import check_product_stability

__all__ = [
    "evolve_full", "evolve_iid", "SpectrumReport", "spectrum",
    "decay_fit", "LieBasis", "lie_basis", "lie_generator_matrix",
    "CorrelationSeries", "equal_time_matrix", "correlate_analytic",
    "correlate_bruteforce", "total_basis_operators",
    "response_function", "response_step_integral",
    "response_finite_difference", "iid_distance", "fit_transfer_rates",
]


# ---------------------------------------------------------------------------
# Evolution

def _step_series(generator_matrix, v0, times):
    """exp(G t_k) v0 on a sorted grid, one exponential per distinct gap."""
    order = np.argsort(times)
    sorted_times = np.asarray(times, dtype=float)[order]
    props = {}
    out = [None] * len(times)
    v = np.asarray(v0, dtype=complex)
    t_prev = 0.0
    for pos, t in zip(order, sorted_times):
        gap = t - t_prev
        if abs(gap) > 0:
            key = round(gap, 15)
            if key not in props:
                props[key] = matrix_exponential(generator_matrix, gap)
            v = props[key] @ v
            t_prev = t
        out[pos] = v
    return out


def evolve_full(model, rho0, times):
    """Density matrices at the requested times under the full generator."""
    ensure_dim(model.dim, "full evolution")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dim, model.dim):
        raise ConditionViolation(
            f"initial state has shape {rho0.shape}, expected {model.dim}")
    lmat = liouvillian_matrix(model)
    return [unvec(v, model.dim) for v in _step_series(lmat, vec(rho0), times)]


def _uniform_local_generator(model, require_stability=True, override=False,
                             tol=STRUCTURAL_TOL):
    if require_stability and not override:
        report = check_product_stability(model, tol)
        if not report.overall:
            raise ConditionViolation(
                "product form is not dynamically stable for this model "
                "(pass override=True to force)")
    return single_site_generator(model, 0)


def evolve_iid(model, rho_loc0, times, override=False):
    """Closed-form product evolution: the local state under the uniform
    single-site generator; its n-fold power solves the full equation when
    the product form is dynamically stable (enforced unless overridden)."""
    gen = _uniform_local_generator(model, override=override)
    d = model.space.dim
    if model.space.superselection:
        sector = number_commutant_basis(model.space)
        gmat, _ = gen.matrix_on(sector)
        rho0 = np.asarray(rho_loc0, dtype=complex)
        coords0 = np.array([hs_inner(b, rho0) for b in sector])
        leak = frobenius(rho0 - sum(c * b for c, b in zip(coords0, sector)))
        if leak > 1e-10:
            raise ConditionViolation(
                f"initial local state violates superselection ({leak:.2e})")
        series = _step_series(gmat, coords0, times)
        return [sum(c * b for c, b in zip(coords, sector)) for coords in series]
    gmat = gen.matrix()
    return [unvec(v, d) for v in _step_series(gmat, vec(rho_loc0), times)]


# ---------------------------------------------------------------------------
# Spectrum

@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    spectral_gap: float
    zero_multiplicity: int
    purely_imaginary_flag: bool
    defective_flag: bool

    @property
    def max_real(self):
        return float(self.eigenvalues.real.max())


def spectrum(model, zero_tol=1e-10, imag_tol=1e-8):
    """Eigenvalues of the vectorized generator with decay diagnostics."""
    ensure_dim(model.dim, "generator spectrum")
    eig = eigen_decomposition(liouvillian_matrix(model))
    values = eig.values
    nonzero = values[np.abs(values) > zero_tol]
    gap = float(-nonzero.real.max()) if len(nonzero) else 0.0
    purely_imag = bool(np.any(
        (np.abs(nonzero.real) < zero_tol) & (np.abs(nonzero.imag) > imag_tol)))
    return SpectrumReport(
        eigenvalues=values,
        spectral_gap=gap,
        zero_multiplicity=int(np.sum(np.abs(values) <= zero_tol)),
        purely_imaginary_flag=purely_imag,
        defective_flag=eig.defective,
    )


# ---------------------------------------------------------------------------
# Decay fitting

def decay_fit(times, values, floor=1e-13, min_efold=3.0, tail_fraction=1/3):
    """Tail log-slope fit of |values|; returns (rate, r_squared).

    Raises InsufficientDecay when fewer than 10 usable samples remain or
    the signal reaches the floor before decaying by min_efold e-foldings.
    """
    times = np.asarray(times, dtype=float)
    mags = np.abs(np.asarray(values))
    mask = mags > floor
    if mask.sum() < 10:
        raise InsufficientDecay("fewer than 10 samples above the floor")
    t, y = times[mask], np.log(mags[mask])
    total = y.max() - y[-1]
    if total < min_efold:
        raise InsufficientDecay(
            f"signal decays only {total:.2f} e-foldings before the floor")
    start = int(len(t) * (1 - tail_fraction))
    tt, yy = t[start:], y[start:]
    slope, intercept = np.polyfit(tt, yy, 1)
    fitted = slope * tt + intercept
    ss_res = float(np.sum((yy - fitted) ** 2))
    ss_tot = float(np.sum((yy - yy.mean()) ** 2))
    quality = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(-slope), float(quality)


def fit_transfer_rates(taus, series, rank_tol=1e-12):
    """Continuous-time rates from a matrix-valued series on a uniform grid.

    Fits the single transfer matrix T with C(tau_{k+1}) ≈ T C(tau_k) in
    least squares and returns log(eig(T))/dtau. Exact for series of the
    form exp(G tau) C0, including defective G (polynomial-in-tau terms).
    """
    taus = np.asarray(taus, dtype=float)
    gaps = np.diff(taus)
    if len(gaps) < 2 or not np.allclose(gaps, gaps[0], rtol=1e-9, atol=1e-12):
        raise InsufficientDecay("transfer fit needs a uniform grid")
    dtau = gaps[0]
    blocks = [np.atleast_2d(np.asarray(c, dtype=complex)) for c in series]
    a = np.concatenate(blocks[:-1], axis=1)
    b = np.concatenate(blocks[1:], axis=1)
    t, *_ = np.linalg.lstsq(a.T, b.T, rcond=rank_tol)
    values = np.linalg.eigvals(t.T)
    values = values[np.abs(values) > 1e-300]
    return np.log(values) / dtau


# ---------------------------------------------------------------------------
# Lie bases and the single-site generator on them

@dataclass
class LieBasis:
    """Orthonormal Hermitian traceless basis; mode 'su' (full traceless
    sector) or 'number' (traceless sector commuting with n)."""

    elements: list
    labels: list
    mode: str

    @property
    def dim(self):
        return len(self.elements)


def _gellmann(d):
    ops, labels = [], []
    for a in range(d):
        for b in range(a + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[a, b] = sym[b, a] = 1.0
            ops.append(sym / np.sqrt(2))
            labels.append(f"re{a}{b}")
            asym = np.zeros((d, d), dtype=complex)
            asym[a, b] = -1j
            asym[b, a] = 1j
            ops.append(asym / np.sqrt(2))
            labels.append(f"im{a}{b}")
    for k in range(1, d):
        diag = np.zeros(d)
        diag[:k] = 1.0
        diag[k] = -k
        op = np.diag(diag).astype(complex)
        ops.append(op / frobenius(op))
        labels.append(f"diag{k}")
    return ops, labels


def lie_basis(space, mode="auto"):
    """Orthonormal traceless Hermitian basis for correlation work.

    For qubit spin spaces the basis is the Pauli triple over sqrt(2) with
    labels x, y, z. Under number superselection (mode 'number' or 'auto')
    only elements commuting with the number operator are kept.
    """
    d = space.dim
    if mode == "auto":
        mode = "number" if space.superselection else "su"
    if mode == "su" and d == 2 and space.statistics == "spin":
        from .spaces import PAULI
        els = [PAULI[k] / np.sqrt(2) for k in "xyz"]
        return LieBasis(elements=els, labels=["x", "y", "z"], mode="su")
    ops, labels = _gellmann(d)
    if mode == "number":
        nop = space.number_operator()
        keep = [(o, l) for o, l in zip(ops, labels)
                if frobenius(o @ nop - nop @ o) < 1e-12]
        ops = [o for o, _ in keep]
        labels = [l for _, l in keep]
    elif mode != "su":
        raise ConditionViolation(f"unknown basis mode {mode!r}")
    return LieBasis(elements=ops, labels=labels, mode=mode)


def lie_generator_matrix(model, basis=None, override=False, imag_tol=1e-12):
    """Real matrix of the uniform single-site generator on the basis.

    Requires dynamical stability of the product form (overridable). The
    representation is provably real for Hermitian orthonormal bases; the
    imaginary part is asserted below ``imag_tol``.
    """
    gen = _uniform_local_generator(model, override=override)
    if basis is None:
        basis = lie_basis(model.space)
    mat = np.empty((basis.dim, basis.dim), dtype=complex)
    for b, xb in enumerate(basis.elements):
        image = gen.apply(xb)
        for a, xa in enumerate(basis.elements):
            mat[a, b] = np.trace(xa @ image)
    max_imag = float(np.abs(mat.imag).max()) if mat.size else 0.0
    if max_imag > imag_tol:
        raise ConditionViolation(
            f"generator matrix has imaginary part {max_imag:.2e} on a "
            "Hermitian basis; model outside the stable class")
    return mat.real, gen


# ---------------------------------------------------------------------------
# Correlation functions

@dataclass
class CorrelationSeries:
    """Two-time correlation samples C[k] with basis labels."""

    times: np.ndarray
    values: np.ndarray        # (T, k, k) complex
    basis_labels: list

    def component(self, a, b):
        ia = self.basis_labels.index(a)
        ib = self.basis_labels.index(b)
        return self.values[:, ia, ib]


def _local_expectations(basis, rho_loc):
    return np.array([np.trace(x @ rho_loc) for x in basis.elements])


def equal_time_matrix(basis, rho_loc, n):
    """C_{ab}(t,t) = <X^a X^b> for total sums X^a, on a product state."""
    x = _local_expectations(basis, rho_loc)
    second = np.empty((basis.dim, basis.dim), dtype=complex)
    for a, xa in enumerate(basis.elements):
        for b, xb in enumerate(basis.elements):
            second[a, b] = np.trace(xa @ xb @ rho_loc)
    return n * (n - 1) * np.outer(x, x) + n * second


def correlate_analytic(model, rho_loc_t, taus, basis=None, connected=False,
                       override=False):
    """Closed-form two-time correlations of the total basis sums.

    Starting from the product state rho_loc_t^(⊗n) at the earlier time, the
    correlation matrix propagates as

        C(tau) = exp(G tau) C(0) + (∫_0^tau exp(G s) ds) v g^T,

    with G the generator matrix on the traceless basis, v the unitality
    defect of the adjoint, and g the initial expectations; ``connected``
    subtracts <X^a(t+tau)><X^b(t)>.
    """
    gmat, gen = lie_generator_matrix(model, basis, override=override)
    if basis is None:
        basis = lie_basis(model.space)
    n = model.n
    rho_loc_t = np.asarray(rho_loc_t, dtype=complex)
    c0 = equal_time_matrix(basis, rho_loc_t, n)
    k = basis.dim
    d = model.space.dim
    lin = gen.apply(np.eye(d, dtype=complex))
    v = np.array([np.trace(x @ lin) for x in basis.elements]).real * (n / d)
    g = n * _local_expectations(basis, rho_loc_t)
    # augmented exponential gives exp(G t) and its integral in one call
    aug = np.zeros((2 * k, 2 * k))
    aug[:k, :k] = gmat
    aug[:k, k:] = np.eye(k)
    taus = np.asarray(taus, dtype=float)
    values = np.empty((len(taus), k, k), dtype=complex)
    if connected:
        local_states = evolve_iid(model, rho_loc_t, taus, override=override)
    for idx, tau in enumerate(taus):
        eaug = matrix_exponential(aug, tau)
        prop, integ = eaug[:k, :k], eaug[:k, k:]
        c = prop @ c0 + np.outer(integ @ v, g)
        if connected:
            u = n * _local_expectations(basis, local_states[idx])
            c = c - np.outer(u, g)
        values[idx] = c
    return CorrelationSeries(times=taus, values=values, basis_labels=list(basis.labels))


def correlate_bruteforce(model, rho0, ops_a, ops_b, taus, t=0.0, labels=None,
                         connected=False):
    """Regression evaluation Tr[A exp(L tau)(B rho(t))] on the full space.

    ``ops_a``/``ops_b`` are lists of global operators; the result carries
    one matrix entry per (a, b) pair. Serves as the oracle for the analytic
    path.
    """
    ensure_dim(model.dim, "regression correlation")
    lmat = liouvillian_matrix(model)
    if t != 0.0:
        rho_t = evolve_full(model, rho0, [t])[0]
    else:
        rho_t = np.asarray(rho0, dtype=complex)
    taus = np.asarray(taus, dtype=float)
    ka, kb = len(ops_a), len(ops_b)
    values = np.empty((len(taus), ka, kb), dtype=complex)
    for b, xb in enumerate(ops_b):
        seeds = _step_series(lmat, vec(xb @ rho_t), taus)
        for idx, v in enumerate(seeds):
            sigma = unvec(v, model.dim)
            for a, xa in enumerate(ops_a):
                values[idx, a, b] = np.trace(xa @ sigma)
    if connected:
        states = _step_series(lmat, vec(rho_t), taus)
        b_expect = np.array([np.trace(xb @ rho_t) for xb in ops_b])
        for idx, v in enumerate(states):
            state = unvec(v, model.dim)
            a_expect = np.array([np.trace(xa @ state) for xa in ops_a])
            values[idx] -= np.outer(a_expect, b_expect)
    if labels is None:
        labels = [str(k) for k in range(max(ka, kb))]
    return CorrelationSeries(times=taus, values=values, basis_labels=list(labels))


def total_basis_operators(model, basis):
    """Global operators for the site-summed basis elements."""
    return [sum(embed_site_operator(x, i, model) for i in range(model.n))
            for x in basis.elements]


# ---------------------------------------------------------------------------
# Linear response

def response_function(model, rho0, op_observe, op_kick, t, taus):
    """First-order response of <op_observe> at time t to a Hamiltonian kick
    with op_kick at time tau: phi(t, tau) = -2 Im Tr[A e^{L(t-tau)} B e^{L tau} rho0].

    The perturbed Hamiltonian is H - xi(t) op_kick; an impulse xi of weight
    xi0 at time tau shifts the observable by xi0 * phi(t, tau), a constant
    step by its integral over tau (see response_step_integral).

    The observable is propagated adjointly on the same grid, so a dense
    uniform tau grid costs one exponential per distinct gap.
    """
    ensure_dim(model.dim, "response function")
    taus = np.asarray(taus, dtype=float)
    if np.any(taus < 0) or np.any(taus > t + 1e-12):
        raise ConditionViolation("kick times must lie in [0, t]")
    lmat = liouvillian_matrix(model)
    states = _step_series(lmat, vec(np.asarray(rho0, dtype=complex)), taus)
    # Tr[A e^{L u} X] = <unvec(e^{L† u} vec(A)), X>_HS for Hermitian A
    gaps = t - taus
    observers = _step_series(dagger(lmat), vec(np.asarray(op_observe, dtype=complex)),
                             gaps)
    kick = np.asarray(op_kick, dtype=complex)
    out = np.empty(len(taus))
    for idx, (obs_v, state_v) in enumerate(zip(observers, states)):
        seed = vec(kick @ unvec(state_v, model.dim))
        c = np.vdot(obs_v, seed)
        out[idx] = -2.0 * c.imag
    return CorrelationSeries(times=taus, values=out.reshape(-1, 1, 1),
                             basis_labels=["phi"])


def response_step_integral(model, rho0, op_observe, op_kick, t, steps=200):
    """Response to a constant-step drive switched on at time zero:
    the observable shift per unit drive strength, trapezoid over the
    response kernel on [0, t]."""
    taus = np.linspace(0.0, t, steps)
    series = response_function(model, rho0, op_observe, op_kick, t, taus)
    return float(np.trapezoid(series.values[:, 0, 0].real, taus))


def response_finite_difference(model, rho0, op_observe, op_kick, t, tau, xi=1e-4):
    """Central-difference oracle: impulse kick e^{i xi B} rho e^{-i xi B}
    at time tau, evolve to t, read the observable; O(xi²) accurate."""
    lmat = liouvillian_matrix(model)
    rho_tau = unvec(matrix_exponential(lmat, tau) @ vec(np.asarray(rho0, dtype=complex)),
                    model.dim)
    prop = matrix_exponential(lmat, t - tau)

    def read(sign):
        u = matrix_exponential(1j * sign * xi * np.asarray(op_kick, dtype=complex))
        kicked = u @ rho_tau @ dagger(u)
        final = unvec(prop @ vec(kicked), model.dim)
        return np.trace(np.asarray(op_observe, dtype=complex) @ final).real

    return (read(+1) - read(-1)) / (2 * xi)


# ---------------------------------------------------------------------------
# Product-form distance witness

def iid_distance(rho, n, d):
    """Trace distance between a state and the product of its first-site
    marginal; zero exactly on product-of-identical states."""
    from .algebra import partial_trace
    marg = partial_trace(rho, [0], n, d)
    prod = np.array([[1.0 + 0j]])
    for _ in range(n):
        prod = np.kron(prod, marg)
    return 0.5 * trace_norm(rho - prod)
