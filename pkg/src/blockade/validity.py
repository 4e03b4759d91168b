"""Closed-system check of the dispersive approximation.

Two pure states start from the same initial condition: ``psi`` evolves
under the effective Hamiltonian of the largely detuned JC model (which
keeps the atom-conditioned cavity drive), ``phi`` under the dispersive JC
Hamiltonian. Their overlap ``F(t) = |<psi(t)|phi(t)>|^2`` measures how well
the dispersive model holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, StepTooLarge, TruncationTooSmall
from .lindblad import apply_power, rk4_step_matrix
from .model import FockTruncation, ModelParams

NORM_DRIFT_TOL = 1e-7
COHERENT_TAIL_TOL = 1e-10
MAX_STEP_PHASE = 0.05
DT_FLOOR = 1e-12


@dataclass
class AmplitudeState:
    """Amplitudes ``A_n`` on ``|e, n>`` and ``B_n`` on ``|g, n>``."""

    excited: np.ndarray
    ground: np.ndarray

    def __post_init__(self):
        self.excited = np.asarray(self.excited, dtype=np.complex128)
        self.ground = np.asarray(self.ground, dtype=np.complex128)
        if self.excited.shape != self.ground.shape or self.excited.ndim != 1:
            raise DimensionMismatch("excited and ground amplitudes must be 1-D of equal length")

    @property
    def n_max(self) -> int:
        return self.excited.shape[0] - 1

    def as_vector(self) -> np.ndarray:
        """Joint-space vector in the atom-first basis."""
        return np.concatenate([self.excited, self.ground])

    @classmethod
    def from_vector(cls, v) -> "AmplitudeState":
        v = np.asarray(v, dtype=np.complex128)
        if v.ndim != 1 or v.shape[0] % 2:
            raise DimensionMismatch("vector length must be 2(N+1)")
        half = v.shape[0] // 2
        return cls(v[:half].copy(), v[half:].copy())

    def norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.excited) ** 2) + np.sum(np.abs(self.ground) ** 2)))


@dataclass(frozen=True)
class ValidityParams:
    """Model parameters together with the ratio ``g / Delta``.

    ``Delta`` and ``g`` follow from ``chi = g**2 / Delta``.
    """

    model: ModelParams
    g_over_delta: float

    def __post_init__(self):
        if self.g_over_delta != 0 and self.model.chi != 0:
            # chi = g^2 / Delta must hold for the derived pair
            assert math.isclose(self.g**2 / self.delta, self.model.chi, rel_tol=1e-12)

    @property
    def delta(self) -> float:
        return self.model.chi / self.g_over_delta**2

    @property
    def g(self) -> float:
        return self.model.chi / self.g_over_delta

    @classmethod
    def dispersive_recipe(
        cls,
        g_over_delta: float,
        chi: float = 1.0,
        omega_ratio: float = 2.0,
        delta_0: float = 0.0,
    ) -> "ValidityParams":
        """Parameters with ``delta_c' = delta_0 - chi - Delta``.

        Equivalent to ``delta_c' / chi = -1 - (Delta / g)**2`` when
        ``delta_0 = 0``.
        """
        if g_over_delta <= 0:
            raise ValueError("g_over_delta must be positive")
        delta = chi / g_over_delta**2
        model = ModelParams(
            delta_c=delta_0 - chi - delta,
            delta_c_prime=delta_0 - chi - delta,
            delta_0=delta_0,
            chi=chi,
            omega_r=omega_ratio * chi,
            eta=0.0,
        )
        return cls(model, g_over_delta)


def _diag_terms(p: ModelParams, n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    freq_e = n * p.delta_c_prime + p.delta_0 / 2 + n * p.chi
    freq_g = n * p.delta_c_prime - p.delta_0 / 2 - n * p.chi
    return freq_e, freq_g


def _ladder(x: np.ndarray) -> np.ndarray:
    # sqrt(n) x_{n-1} + sqrt(n+1) x_{n+1}, zero beyond both ends
    n = np.arange(x.shape[0])
    out = np.zeros_like(x)
    out[1:] += np.sqrt(n[1:]) * x[:-1]
    out[:-1] += np.sqrt(n[1:]) * x[1:]
    return out


def amp_derivs_ddjc(s: AmplitudeState, p: ModelParams) -> AmplitudeState:
    """Time derivative of the amplitudes under the dispersive JC model."""
    n = np.arange(s.n_max + 1, dtype=float)
    freq_e, freq_g = _diag_terms(p, n)
    half_rabi = 0.5 * p.omega_r
    da = -1j * freq_e * s.excited - 1j * half_rabi * s.ground
    db = -1j * freq_g * s.ground - 1j * half_rabi * s.excited
    return AmplitudeState(da, db)


def amp_derivs_eff(s: AmplitudeState, p: ValidityParams) -> AmplitudeState:
    """Time derivative under the effective Hamiltonian.

    Adds the conditional drive to :func:`amp_derivs_ddjc`; it enters the
    excited and ground sectors with opposite signs.
    """
    base = amp_derivs_ddjc(s, p.model)
    drive = 0.5 * p.model.omega_r * p.g_over_delta
    return AmplitudeState(
        base.excited - 1j * drive * _ladder(s.excited),
        base.ground + 1j * drive * _ladder(s.ground),
    )


def _deriv_fn(kind: str, p):
    if kind == "eff":
        if not isinstance(p, ValidityParams):
            raise TypeError("kind 'eff' needs ValidityParams")
        return lambda s: amp_derivs_eff(s, p)
    if kind == "ddjc":
        model = p.model if isinstance(p, ValidityParams) else p
        return lambda s: amp_derivs_ddjc(s, model)
    raise ValueError(f"unknown derivative kind {kind!r}")


def generator_matrix(kind: str, p, n_max: int) -> np.ndarray:
    """Matrix ``G`` with ``d/dt vec(s) = G vec(s)``, read off the derivative
    functions column by column."""
    f = _deriv_fn(kind, p)
    dim = 2 * (n_max + 1)
    gen = np.empty((dim, dim), dtype=np.complex128)
    for j in range(dim):
        e = np.zeros(dim, dtype=np.complex128)
        e[j] = 1.0
        gen[:, j] = f(AmplitudeState.from_vector(e)).as_vector()
    return gen


def max_frequency(p: ModelParams, n_max: int) -> float:
    return max(abs(p.delta_c_prime) * n_max, p.omega_r, abs(p.delta_0) + 2 * n_max * abs(p.chi))


def default_step(p: ModelParams, n_max: int) -> float:
    """Step size keeping the RK4 local error far below the norm budget."""
    wmax = max_frequency(p, n_max)
    return max(1e-3 / wmax, DT_FLOOR) if wmax > 0 else 1e-3


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[AmplitudeState] = field(default_factory=list)

    def norm_drift(self) -> float:
        return max(abs(s.norm() - self.states[0].norm()) for s in self.states)


def integrate_amps(
    kind: str,
    initial: AmplitudeState,
    p,
    t_final: float,
    dt: float,
    sample_every: int = 1,
    direct: bool = False,
) -> Trajectory:
    """Fixed-step RK4 integration of the amplitude equations.

    Parameters
    ----------
    kind : {"eff", "ddjc"}
    initial : AmplitudeState
    p : ValidityParams or ModelParams
        ``"eff"`` requires :class:`ValidityParams`.
    t_final, dt : float
        ``dt`` is shrunk so that ``t_final`` is a whole number of
        ``sample_every``-step blocks.
    sample_every : int
        Record the state every this many steps.
    direct : bool
        Step the derivative functions one by one instead of applying powers
        of the (identical) RK4 step matrix.

    Raises
    ------
    StepTooLarge
        If ``dt`` times the largest generator frequency exceeds 0.05.
    """
    if dt <= 0:
        raise StepTooLarge("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    n_max = initial.n_max
    if t_final == 0:
        return Trajectory(np.array([0.0]), [AmplitudeState(initial.excited.copy(), initial.ground.copy())])
    gen = generator_matrix(kind, p, n_max)
    # Gershgorin bound on the largest frequency
    spread = float(np.max(np.sum(np.abs(gen), axis=1)))
    if dt * spread > MAX_STEP_PHASE:
        raise StepTooLarge(f"dt * max frequency = {dt * spread:.3g} > {MAX_STEP_PHASE}")
    blocks = max(1, int(math.ceil(t_final / (dt * sample_every) - 1e-9)))
    h = t_final / (blocks * sample_every)
    times = np.arange(blocks + 1) * (h * sample_every)
    y = initial.as_vector().copy()
    states = [AmplitudeState.from_vector(y)]
    if direct:
        f = _deriv_fn(kind, p)

        def rhs(v):
            return f(AmplitudeState.from_vector(v)).as_vector()

        for _ in range(blocks):
            for _ in range(sample_every):
                k1 = rhs(y)
                k2 = rhs(y + 0.5 * h * k1)
                k3 = rhs(y + 0.5 * h * k2)
                k4 = rhs(y + h * k3)
                y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            states.append(AmplitudeState.from_vector(y))
    else:
        block = np.eye(gen.shape[0], dtype=np.complex128)
        block = apply_power(rk4_step_matrix(gen, h), sample_every, block)
        for _ in range(blocks):
            y = block @ y
            states.append(AmplitudeState.from_vector(y))
    traj = Trajectory(times, states)
    drift = traj.norm_drift()
    if drift > NORM_DRIFT_TOL:
        raise ArithmeticError(f"norm drifted by {drift:.2e}; reduce dt")
    return traj


def coherent_initial_state(alpha: complex, t: FockTruncation) -> AmplitudeState:
    """``|alpha> (|g> + |e>) / sqrt(2)`` truncated to ``t`` and renormalised.

    Raises
    ------
    TruncationTooSmall
        If more than ``1e-10`` of the Poisson weight lies above ``n_max``.
    """
    n = np.arange(t.n_max + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    mod2 = abs(alpha) ** 2
    if alpha == 0:
        amps = np.zeros(t.n_max + 1, dtype=np.complex128)
        amps[0] = 1.0
    else:
        amps = np.exp(-mod2 / 2 + n * np.log(complex(alpha)) - 0.5 * log_fact)
    kept = float(np.sum(np.abs(amps) ** 2))
    if 1.0 - kept > COHERENT_TAIL_TOL:
        raise TruncationTooSmall(f"Poisson tail {1.0 - kept:.2e} above n_max={t.n_max}")
    amps = amps / math.sqrt(2.0 * kept)
    return AmplitudeState(amps.copy(), amps.copy())


def fidelity(psi: AmplitudeState, phi: AmplitudeState) -> float:
    """``|sum_n (A_n^* a_n + B_n^* b_n)|^2`` clamped to ``[0, 1]``."""
    if psi.n_max != phi.n_max:
        raise DimensionMismatch(f"n_max {psi.n_max} != {phi.n_max}")
    overlap = np.vdot(psi.excited, phi.excited) + np.vdot(psi.ground, phi.ground)
    return float(min(max(abs(overlap) ** 2, 0.0), 1.0))


def fidelity_curve(
    params: ValidityParams,
    initial: AmplitudeState,
    t_final: float,
    samples: int,
    dt: float | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """F(t) at ``samples`` equally spaced times in ``[0, t_final]``.

    Returns ``(times, fidelities, worst norm drift)``.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    n_max = initial.n_max
    dt = default_step(params.model, n_max) if dt is None else dt
    interval = t_final / (samples - 1)
    per_sample = max(1, int(math.ceil(interval / dt - 1e-9)))
    dt = interval / per_sample
    psi = integrate_amps("eff", initial, params, t_final, dt, sample_every=per_sample)
    phi = integrate_amps("ddjc", initial, params, t_final, dt, sample_every=per_sample)
    fids = np.array([fidelity(a, b) for a, b in zip(psi.states, phi.states)])
    return psi.times, fids, max(psi.norm_drift(), phi.norm_drift())
