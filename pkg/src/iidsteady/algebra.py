"""Dense complex linear-algebra kernel.

Everything here operates on plain ``numpy.ndarray`` matrices (complex128,
row-major). Sites of a lattice are ordered left to right by ascending index,
so an operator ``op`` embedded at ``site`` is ``I⊗...⊗op⊗...⊗I`` with
``site`` identity factors on the left.

Superoperators are represented on row-major flattened matrices:
``vec(rho) = rho.reshape(-1)`` and ``vec(A @ rho @ B) = kron(A, B.T) @ vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, InvalidDimension, NonFinite, RANK_TOL

__all__ = [
    "dagger", "is_hermitian", "hs_inner", "frobenius", "trace_norm",
    "vec", "unvec", "left_right_action", "vectorize_superoperator",
    "embed_local", "embed_pair", "partial_trace",
    "matrix_exponential", "null_space_basis",
    "EigenDecomposition", "eigen_decomposition",
    "orthonormalize_operators", "traceless_part",
]


def dagger(x):
    return np.conjugate(np.transpose(x))


def is_hermitian(x, tol=1e-12):
    x = np.asarray(x)
    return np.linalg.norm(x - dagger(x)) <= tol * max(1.0, np.linalg.norm(x))


def hs_inner(a, b):
    """Hilbert-Schmidt inner product Tr[a† b]."""
    return complex(np.tensordot(np.conjugate(a), b, axes=2))


def frobenius(x):
    return float(np.linalg.norm(x))


def trace_norm(x):
    return float(np.sum(scipy.linalg.svdvals(x)))


def traceless_part(x):
    x = np.asarray(x, dtype=complex)
    d = x.shape[0]
    return x - (np.trace(x) / d) * np.eye(d)


def vec(rho):
    """Row-major flattening of a matrix."""
    return np.asarray(rho, dtype=complex).reshape(-1)


def unvec(v, dim):
    return np.asarray(v, dtype=complex).reshape(dim, dim)


def left_right_action(a, b):
    """Matrix of the map rho -> a @ rho @ b on row-major vec."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex).T)


def vectorize_superoperator(apply, dim):
    """Matrix representation of a linear map on dim x dim matrices.

    ``apply`` is probed on every matrix unit; linearity is the caller's
    responsibility (violations surface in the consistency tests).
    """
    m = np.zeros((dim * dim, dim * dim), dtype=complex)
    for k in range(dim * dim):
        unit = np.zeros((dim, dim), dtype=complex)
        unit.flat[k] = 1.0
        m[:, k] = np.asarray(apply(unit), dtype=complex).reshape(-1)
    return m


def _check_square(x, name="matrix"):
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise InvalidDimension(f"{name} must be square, got shape {x.shape}")
    return x


def embed_local(op, site, n, d=None):
    """I^(⊗site) ⊗ op ⊗ I^(⊗(n-site-1)) on a d**n-dimensional space."""
    op = _check_square(op, "local operator")
    if d is None:
        d = op.shape[0]
    if op.shape[0] != d:
        raise InvalidDimension(f"local operator is {op.shape[0]}x{op.shape[0]}, expected {d}")
    if not 0 <= site < n:
        raise InvalidDimension(f"site {site} out of range for n={n}")
    left = d**site
    right = d ** (n - site - 1)
    return np.kron(np.kron(np.eye(left), op), np.eye(right)).astype(complex)


def embed_pair(op, i, j, n, d):
    """Embed a two-site operator (d² x d², ordered (i, j)) at sites i < j.

    Plain tensor embedding: correct for spin and boson statistics. Fermionic
    models need string-aware embedding, handled in the lattice module.
    """
    op = _check_square(op, "pair operator")
    if op.shape[0] != d * d:
        raise InvalidDimension(f"pair operator is {op.shape[0]}-dim, expected {d*d}")
    if not (0 <= i < j < n):
        raise InvalidDimension(f"need 0 <= i < j < n, got ({i}, {j}) with n={n}")
    full = np.kron(op, np.eye(d ** (n - 2)))
    order = [i, j] + [k for k in range(n) if k not in (i, j)]
    perm = np.argsort(order)
    t = full.reshape((d,) * (2 * n))
    t = np.transpose(t, axes=[*perm, *(perm + n)])
    return np.ascontiguousarray(t.reshape(d**n, d**n))


def partial_trace(x, keep, n, d):
    """Trace out every site not in ``keep``; preserves the total trace."""
    x = _check_square(x, "operator")
    if x.shape[0] != d**n:
        raise InvalidDimension(f"operator is {x.shape[0]}-dim, expected {d**n}")
    keep = sorted(keep)
    if any(not 0 <= s < n for s in keep):
        raise InvalidDimension(f"keep={keep} out of range for n={n}")
    t = x.reshape((d,) * (2 * n))
    row = list(range(n))
    col = [n + s if s in keep else s for s in range(n)]
    out = [s for s in keep] + [n + s for s in keep]
    dk = d ** len(keep)
    return np.einsum(t, row + col, out).reshape(dk, dk)


def matrix_exponential(m, t=1.0):
    """exp(m*t) by scaling-and-squaring Padé (scipy backend)."""
    m = _check_square(m)
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix exponential input contains non-finite entries")
    out = scipy.linalg.expm(m * t)
    if not np.all(np.isfinite(out)):
        raise NonFinite("matrix exponential overflowed")
    return out


def null_space_basis(m, tol=RANK_TOL):
    """Orthonormal basis of the numerical (right) null space of ``m``.

    Singular directions with s < tol * s_max are kept; an all-zero matrix is
    entirely null. Accepts rectangular matrices (stacked systems).
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise InvalidDimension(f"expected a matrix, got shape {m.shape}")
    if tol <= 0:
        raise InvalidDimension("tolerance must be positive")
    _, s, vh = np.linalg.svd(m)
    smax = s[0] if len(s) else 0.0
    if smax == 0.0:
        mask = np.ones(m.shape[1], dtype=bool)
    else:
        mask = np.concatenate([s < tol * smax, np.ones(m.shape[1] - len(s), dtype=bool)])
    return [np.conjugate(vh[k]) for k in range(m.shape[1]) if mask[k]]


@dataclass
class EigenDecomposition:
    values: np.ndarray        # (k,)
    vectors: np.ndarray       # columns are right eigenvectors
    defective: bool           # eigenvector matrix badly conditioned
    max_residual: float       # max ||M v - lambda v|| over unit eigenvectors


def eigen_decomposition(m):
    """Full right eigendecomposition with a defectiveness flag.

    A numerical Jordan form is deliberately avoided: defective spectra are
    reported through the flag (eigenvector condition number above 1e8).
    """
    m = _check_square(m)
    try:
        values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    residuals = np.linalg.norm(m @ vectors - vectors * values[None, :], axis=0)
    cond = np.linalg.cond(vectors) if m.shape[0] else 1.0
    return EigenDecomposition(
        values=values,
        vectors=vectors,
        defective=bool(cond > 1e8),
        max_residual=float(residuals.max()) if len(residuals) else 0.0,
    )


def orthonormalize_operators(ops, tol=1e-12):
    """Gram-Schmidt a list of matrices in the Hilbert-Schmidt inner product.

    Near-dependent members are dropped.
    """
    basis = []
    for op in ops:
        v = np.asarray(op, dtype=complex).copy()
        for b in basis:
            v -= hs_inner(b, v) * b
        norm = frobenius(v)
        if norm > tol:
            basis.append(v / norm)
    return basis
