"""Dense complex linear algebra used by every other module.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``.
Matrix norms are Frobenius norms, vector norms are 2-norms.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NoConvergence, NotHermitian, Singular

# Tolerances, overridable in one place.
HERMITIAN_TOL = 1e-10
JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TOL = 1e-14
PIVOT_TOL = 1e-13
PHASE_TIE_TOL = 1e-9


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def as_vector(v) -> np.ndarray:
    x = np.asarray(v, dtype=np.complex128)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {x.shape}")
    return x


def matrix_norm(a) -> float:
    return float(np.linalg.norm(a))


def hermitian_deviation(h) -> float:
    """Largest entry of ``|h - h^dagger|``."""
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        return float("inf")
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def is_hermitian(h, tol: float = HERMITIAN_TOL) -> bool:
    return hermitian_deviation(h) <= tol


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``a`` indexes the slow (outer) factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude component real and nonnegative, ties -> lowest index
    out = vecs.copy()
    for k in range(out.shape[1]):
        mags = np.abs(out[:, k])
        top = mags.max()
        if top == 0.0:
            continue
        idx = int(np.flatnonzero(mags >= top * (1.0 - PHASE_TIE_TOL))[0])
        out[:, k] *= np.conj(out[idx, k]) / mags[idx]
        out[idx, k] = mags[idx]
    return out


def _jacobi(h: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    a = h.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = matrix_norm(a)
    if n < 2 or scale == 0.0:
        return a.diagonal().real.copy(), v
    target = JACOBI_OFF_TOL * scale
    negligible = np.finfo(float).eps * scale
    mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[mask]) ** 2))
        if off <= target:
            return a.diagonal().real.copy(), v
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b <= negligible:
                    continue
                rotated = True
                phase = apq / b
                alpha = a[p, p].real
                beta = a[q, q].real
                tau = (beta - alpha) / (2.0 * b)
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # unitary acting on the (p, q) plane; removes the phase then rotates
                rot = np.array([[c * phase, s * phase], [-s, c]], dtype=np.complex128)
                cols = a[:, [p, q]] @ rot
                a[:, p] = cols[:, 0]
                a[:, q] = cols[:, 1]
                rows = rot.conj().T @ a[[p, q], :]
                a[p, :] = rows[0]
                a[q, :] = rows[1]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = alpha - t * b
                a[q, q] = beta + t * b
                vc = v[:, [p, q]] @ rot
                v[:, p] = vc[:, 0]
                v[:, q] = vc[:, 1]
        if not rotated:
            return a.diagonal().real.copy(), v
    raise NoConvergence(f"Jacobi sweeps exceeded {max_sweeps}")


def eig_hermitian(h, method: str = "jacobi", max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    h : array_like
        Square Hermitian matrix.
    method : {"jacobi", "lapack"}
        ``"jacobi"`` runs the cyclic Jacobi solver in this module; ``"lapack"``
        defers to ``numpy.linalg.eigh`` and is meant for hot paths and for
        cross-checking.

    Returns
    -------
    eigenvalues : ndarray of float, ascending
    eigenvectors : ndarray, columns are orthonormal eigenvectors with the
        largest-magnitude component made real and nonnegative.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise NotHermitian(f"matrix is not square: {h.shape}")
    if hermitian_deviation(h) > HERMITIAN_TOL:
        raise NotHermitian(f"max |h - h^dagger| = {hermitian_deviation(h):.3e}")
    h = 0.5 * (h + h.conj().T)
    if method == "jacobi":
        w, v = _jacobi(h, max_sweeps)
    elif method == "lapack":
        w, v = np.linalg.eigh(h)
        v = v.astype(np.complex128)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(w, kind="stable")
    return w[order], _fix_phases(v[:, order])


def solve_linear(m, rhs) -> np.ndarray:
    """Solve ``m x = rhs`` by LU factorisation with partial pivoting.

    Raises
    ------
    Singular
        If a pivot falls below ``PIVOT_TOL * ||m||``.
    """
    m = as_matrix(m)
    rhs = as_vector(rhs)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix is not square: {m.shape}")
    if rhs.shape[0] != m.shape[0]:
        raise DimensionMismatch(f"rhs length {rhs.shape[0]} != {m.shape[0]}")
    norm = matrix_norm(m)
    if norm == 0.0:
        raise Singular("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=True)
    smallest = float(np.min(np.abs(lu.diagonal())))
    if smallest < PIVOT_TOL * norm:
        raise Singular(f"pivot {smallest:.3e} below {PIVOT_TOL:g} * ||m|| = {PIVOT_TOL * norm:.3e}")
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def expm_hermitian(h, t: float, method: str = "jacobi") -> np.ndarray:
    """``exp(-i h t)`` through the eigendecomposition of ``h``."""
    w, v = eig_hermitian(h, method=method)
    return (v * np.exp(-1j * w * t)) @ v.conj().T
