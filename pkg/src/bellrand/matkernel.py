"""Dense complex-matrix kernel.

Tensor products, subsystem permutations, partial traces, Hermitian
eigendecompositions, trace norms and joint null spaces, over plain numpy
arrays (complex128, row-major).  Every operation is a pure function and safe
to call concurrently.

Subsystem ordering convention used throughout the package:
(A-qubit, A'-ancilla, B-qubit, B'-ancilla), nested as ((A x A') x (B x B')).
All reorderings go through :func:`permute_subsystems`.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

# Absolute tolerances; every quantity handled by this package is O(1).
HERM_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-10
NULLSPACE_TOL = 1e-9


def as_matrix(m) -> np.ndarray:
    """Coerce input to a 2-d complex array (no copy when already one)."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    return a


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def is_hermitian(m, tol: float = HERM_TOL) -> bool:
    a = as_matrix(m)
    return a.shape[0] == a.shape[1] and float(np.max(np.abs(a - a.conj().T))) <= tol


def kron(a, b) -> np.ndarray:
    """Tensor product: (a x b)[i*rb+k, j*cb+l] = a[i,j] * b[k,l]."""
    return np.kron(as_matrix(a), as_matrix(b))


def check_shape(m, dims: Sequence[int]) -> None:
    """Raise unless the square matrix dimension equals prod(dims)."""
    a = as_matrix(m)
    d = int(np.prod(dims)) if len(dims) else 1
    if a.shape != (d, d):
        raise ValueError(
            f"subsystem dims {tuple(dims)} inconsistent with matrix shape {a.shape}"
        )


def permute_subsystems(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so output slot j carries input subsystem perm[j]."""
    a = as_matrix(m)
    check_shape(a, dims)
    n = len(dims)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"perm {perm} is not a permutation of 0..{n - 1}")
    t = a.reshape(tuple(dims) * 2)
    axes = perm + [n + p for p in perm]
    d = int(np.prod(dims))
    return np.transpose(t, axes).reshape(d, d)


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in `keep`.

    Kept factors stay in their original relative order; the total trace is
    preserved.  An empty keep set yields the 1x1 matrix [[Tr m]].
    """
    a = as_matrix(m)
    check_shape(a, dims)
    n = len(dims)
    keep_set = {int(k) for k in keep}
    if not keep_set <= set(range(n)):
        raise ValueError(f"keep indices {sorted(keep_set)} out of range for {n} subsystems")
    t = a.reshape(tuple(dims) * 2)
    cur = list(dims)
    for idx in sorted(set(range(n)) - keep_set, reverse=True):
        t = np.trace(t, axis1=idx, axis2=idx + len(cur))
        del cur[idx]
    d = int(np.prod(cur)) if cur else 1
    return np.asarray(t, dtype=complex).reshape(d, d)


def eigh(m, tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition with eigenvalues sorted descending.

    Returns (w, v) such that m = v @ diag(w) @ v^dagger with orthonormal
    eigenvector columns.  Non-Hermitian input (beyond `tol`) is a contract
    error.
    """
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        raise ValueError("eigh requires a Hermitian matrix")
    w, v = np.linalg.eigh(a)
    return w[::-1].copy(), v[:, ::-1].copy()


def trace_norm(m) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(as_matrix(m), compute_uv=False).sum())


def null_space(mats: Sequence[np.ndarray], tol: float = NULLSPACE_TOL) -> list[np.ndarray]:
    """Orthonormal basis of {c : sum_a c_a mats[a] = 0}.

    Each matrix is flattened into one column of a single matrix whose
    singular values are thresholded at `tol`; the returned coefficient
    vectors are the right-singular vectors past the numerical rank.  An
    empty list means the matrices are linearly independent.
    """
    if len(mats) == 0:
        return []
    shape = as_matrix(mats[0]).shape
    cols = []
    for m in mats:
        a = as_matrix(m)
        if a.shape != shape:
            raise ValueError("null_space requires matrices of equal shape")
        cols.append(a.reshape(-1))
    stacked = np.stack(cols, axis=1)
    _, svals, vh = np.linalg.svd(stacked)
    n = stacked.shape[1]
    rank = int(np.sum(svals > tol))
    return [vh[i].conj() for i in range(rank, n)]


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR of a complex Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def expval(op, rho) -> float:
    """Real part of Tr[op @ rho] (all observables here are Hermitian)."""
    return float(np.real(np.trace(as_matrix(op) @ as_matrix(rho))))
