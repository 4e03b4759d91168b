"""Liouvillian construction, steady states and cavity photon statistics.

Density matrices are vectorised by stacking columns (``order="F"``), so
``vec(A rho B) = (B^T (x) A) vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NoPhotons,
    PositivityViolation,
    StepTooLarge,
    TruncationTooSmall,
)
from .linop import (
    as_matrix,
    eig_hermitian,
    hermitian_deviation,
    is_hermitian,
    matrix_norm,
    solve_linear,
)
from .model import FockTruncation, ModelParams, build_h_full, joint_operators

MAX_LIOUVILLE_DIM = 4096
STATE_TOL = 1e-9
POSITIVITY_TOL = 1e-8
POSITIVITY_FAIL = 1e-6
RESIDUAL_TOL = 1e-8
TRACE_DRIFT_TOL = 1e-7
PHOTON_FLOOR = 1e-12


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


@dataclass(frozen=True)
class DensityMatrix:
    """A state on the joint atom-field space.

    Construction checks Hermiticity and unit trace; positivity is exposed
    via :attr:`min_eigenvalue` and :meth:`is_physical`.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
        if hermitian_deviation(m) > STATE_TOL:
            raise ValueError(f"density matrix not Hermitian ({hermitian_deviation(m):.2e})")
        if abs(np.trace(m) - 1.0) > STATE_TOL:
            raise ValueError(f"density matrix trace {np.trace(m).real!r} != 1")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_max(self) -> int:
        if self.dim % 2:
            raise DimensionMismatch("dimension is not 2(N+1)")
        return self.dim // 2 - 1

    @property
    def min_eigenvalue(self) -> float:
        return float(eig_hermitian(self.matrix, method="lapack")[0][0])

    def is_physical(self) -> bool:
        return self.min_eigenvalue >= -POSITIVITY_TOL

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=np.complex128)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis_state(cls, index: int, dim: int) -> "DensityMatrix":
        m = np.zeros((dim, dim), dtype=np.complex128)
        m[index, index] = 1.0
        return cls(m)


@dataclass(frozen=True)
class Liouvillian:
    """Superoperator acting on column-stacked density matrices."""

    matrix: np.ndarray
    hilbert_dim: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, rho) -> np.ndarray:
        rho = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        return unvec(self.matrix @ vec(rho), self.hilbert_dim)

    @property
    def norm(self) -> float:
        return matrix_norm(self.matrix)


def build_liouvillian(h, collapse_ops) -> Liouvillian:
    """Generator of ``rho' = -i[H, rho] + sum_k rate_k D[C_k] rho``.

    Parameters
    ----------
    h : array_like
        Hermitian Hamiltonian, shape (D, D).
    collapse_ops : iterable of (rate, op)
        Dissipators ``(rate/2)(2 C rho C^dag - C^dag C rho - rho C^dag C)``.
    """
    h = as_matrix(h)
    d = h.shape[0]
    if h.shape != (d, d):
        raise DimensionMismatch(f"Hamiltonian must be square, got {h.shape}")
    if not is_hermitian(h):
        raise ValueError("Hamiltonian is not Hermitian")
    eye = np.eye(d, dtype=np.complex128)
    lmat = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, op in collapse_ops:
        c = as_matrix(op)
        if c.shape != (d, d):
            raise DimensionMismatch(f"collapse operator shape {c.shape} != {(d, d)}")
        if rate < 0:
            raise ValueError(f"negative rate {rate}")
        if rate == 0:
            continue
        cdc = c.conj().T @ c
        lmat += 0.5 * rate * (2.0 * np.kron(c.conj(), c) - np.kron(eye, cdc) - np.kron(cdc.T, eye))
    return Liouvillian(lmat, d)


def model_liouvillian(p: ModelParams, t: FockTruncation) -> Liouvillian:
    """Liouvillian of the cavity-driven model with cavity and atomic decay."""
    ops = joint_operators(t)
    return build_liouvillian(build_h_full(p, t), [(p.kappa, ops["a"]), (p.gamma, ops["sm"])])


def steady_state_residual(l: Liouvillian, rho) -> float:
    """``||L vec(rho)|| / ||L||``."""
    rho = rho.matrix if isinstance(rho, DensityMatrix) else rho
    return float(np.linalg.norm(l.matrix @ vec(rho)) / l.norm)


def steady_state(l: Liouvillian, trace_row: int = 0) -> DensityMatrix:
    """Unique stationary state of ``l``.

    One row of ``L`` (``trace_row``, default the ``(0, 0)`` element) is
    replaced by the trace functional so that the linear system has a unique
    solution of unit trace.

    Raises
    ------
    Singular
        The stationary manifold is degenerate (for example no dissipation).
    PositivityViolation
        The solution has an eigenvalue below ``-1e-6``.
    """
    if l.dim > MAX_LIOUVILLE_DIM:
        raise ValueError(
            f"Liouville dimension {l.dim} exceeds dense limit {MAX_LIOUVILLE_DIM}; lower the truncation"
        )
    d = l.hilbert_dim
    m = l.matrix.copy()
    m[trace_row, :] = vec(np.eye(d))
    rhs = np.zeros(l.dim, dtype=np.complex128)
    rhs[trace_row] = 1.0
    rho = unvec(solve_linear(m, rhs), d)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    lowest = float(eig_hermitian(rho, method="lapack")[0][0])
    if lowest < -POSITIVITY_FAIL:
        raise PositivityViolation(f"steady state has eigenvalue {lowest:.3e}; increase the truncation")
    return DensityMatrix(rho)


def rk4_step_matrix(gen: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step for the linear ODE ``y' = gen y``, as a matrix."""
    z = dt * gen
    eye = np.eye(gen.shape[0], dtype=gen.dtype)
    z2 = z @ z
    return eye + z + z2 / 2 + z2 @ z / 6 + z2 @ z2 / 24


def apply_power(mat: np.ndarray, k: int, y: np.ndarray) -> np.ndarray:
    """``mat**k @ y`` by binary powering."""
    out = y.copy()
    base = mat
    while k:
        if k & 1:
            out = base @ out
        k >>= 1
        if k:
            base = base @ base
    return out


def evolve(l: Liouvillian, rho0: DensityMatrix, t_final: float, dt: float, direct: bool = False) -> DensityMatrix:
    """Fixed-step RK4 integration of ``vec(rho)' = L vec(rho)``.

    ``dt`` is shrunk so that it divides ``t_final``. The RK4 update of a
    linear autonomous system is a fixed matrix, so by default the steps are
    applied by repeated squaring; ``direct=True`` loops step by step
    instead.
    """
    if dt <= 0:
        raise StepTooLarge("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")
    # the induced 1-norm bounds the spectral radius
    gen_scale = float(np.max(np.sum(np.abs(l.matrix), axis=0)))
    if dt * gen_scale > 0.1:
        raise StepTooLarge(f"dt*||L|| = {dt * gen_scale:.3g} > 0.1")
    if rho0.dim != l.hilbert_dim:
        raise DimensionMismatch("initial state does not match the Liouvillian")
    if t_final == 0:
        return rho0
    steps = int(np.ceil(t_final / dt - 1e-9))
    h = t_final / steps
    y = vec(rho0.matrix).astype(np.complex128)
    if direct:
        gen = l.matrix
        for _ in range(steps):
            k1 = gen @ y
            k2 = gen @ (y + 0.5 * h * k1)
            k3 = gen @ (y + 0.5 * h * k2)
            k4 = gen @ (y + h * k3)
            y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        y = apply_power(rk4_step_matrix(l.matrix, h), steps, y)
    rho = unvec(y, l.hilbert_dim)
    drift = abs(np.trace(rho) - 1.0)
    if drift > TRACE_DRIFT_TOL:
        raise ArithmeticError(f"trace drifted by {drift:.2e}")
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def trace_distance(r1, r2) -> float:
    """Trace norm ``||r1 - r2||_1``."""
    a = r1.matrix if isinstance(r1, DensityMatrix) else np.asarray(r1)
    b = r2.matrix if isinstance(r2, DensityMatrix) else np.asarray(r2)
    w = eig_hermitian(a - b, method="lapack")[0]
    return float(np.sum(np.abs(w)))


# --- observables ------------------------------------------------------------


def photon_number_dist(rho: DensityMatrix, n: int) -> float:
    """Probability of ``n`` photons, summed over the atomic states."""
    nf = rho.n_max + 1
    if not 0 <= n < nf:
        raise ValueError(f"n={n} outside 0..{nf - 1}")
    val = rho.matrix[n, n] + rho.matrix[nf + n, nf + n]
    return float(min(max(val.real, 0.0), 1.0))


def photon_distribution(rho: DensityMatrix) -> np.ndarray:
    nf = rho.n_max + 1
    diag = np.real(np.diag(rho.matrix))
    return np.clip(diag[:nf] + diag[nf:], 0.0, 1.0)


def _field_moments(rho: DensityMatrix) -> tuple[float, float]:
    ops = joint_operators(FockTruncation(rho.n_max))
    a = ops["a"]
    ad = a.conj().T
    n1 = np.trace(ad @ a @ rho.matrix)
    n2 = np.trace(ad @ ad @ a @ a @ rho.matrix)
    return float(n1.real), float(n2.real)


def mean_photon_number(rho: DensityMatrix) -> float:
    return _field_moments(rho)[0]


def g2_zero(rho: DensityMatrix) -> float:
    """Equal-time second-order correlation ``<a^dag^2 a^2> / <a^dag a>^2``."""
    n1, n2 = _field_moments(rho)
    if n1 <= PHOTON_FLOOR:
        raise NoPhotons(f"<a^dag a> = {n1:.3e}; g2(0) undefined")
    return max(n2, 0.0) / n1**2


def g2_weak_drive_estimate(rho: DensityMatrix) -> float:
    """``2 P_2 / P_1^2``, the few-photon approximation to g2(0)."""
    p1 = photon_number_dist(rho, 1)
    p2 = photon_number_dist(rho, 2)
    if p1 <= PHOTON_FLOOR:
        raise NoPhotons(f"P_1 = {p1:.3e}; estimate undefined")
    return 2.0 * p2 / p1**2



def check_truncation(p: ModelParams, t: FockTruncation, rel_tol: float = 1e-4, extra: int = 4) -> float:
    """Compare g2(0) at ``n_max`` and ``n_max + extra``.

    Returns the relative change; raises :class:`TruncationTooSmall` when it
    exceeds ``rel_tol``.
    """
    g_small = g2_zero(steady_state(model_liouvillian(p, t)))
    g_large = g2_zero(steady_state(model_liouvillian(p, FockTruncation(t.n_max + extra))))
    shift = abs(g_small - g_large) / abs(g_large)
    if shift > rel_tol:
        raise TruncationTooSmall(
            f"g2(0) moves by {shift:.2e} (relative) from N={t.n_max} to N={t.n_max + extra}"
        )
    return shift
