"""Parameters, Hamiltonians and the closed-form spectrum of the driven
dispersive Jaynes-Cummings model.

All frequencies are in units of the cavity decay rate (``kappa == 1``).
The joint space is atom (x) field with the atom factor first; the atomic
basis is ``{|e>, |g>}`` so that ``sigma_z = diag(1, -1)``, and the field
basis is the Fock ladder ``|0>, ..., |N>``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import ZeroChi
from .linop import kron

NMAX_ENV = "BLOCKADE_NMAX"
DEFAULT_NMAX = 12


@dataclass(frozen=True)
class ModelParams:
    """Rotating-frame parameters, all in units of kappa.

    The defaults are the photon-blockade working point: ``gamma = 0.5``,
    ``chi = 15``, ``omega_r = 2 chi``, ``delta_0 = 0``, ``eta = 0.1``.

    ``delta_c`` is the cavity detuning seen in the driven Hamiltonian and
    ``delta_c_prime`` the one entering the undriven model and its spectrum.
    """

    delta_c: float = 0.0
    delta_c_prime: float = 0.0
    delta_0: float = 0.0
    chi: float = 15.0
    omega_r: float = 30.0
    eta: float = 0.1
    kappa: float = 1.0
    gamma: float = 0.5

    def __post_init__(self):
        if self.kappa != 1.0:
            raise ValueError("kappa is the frequency unit and must equal 1")
        for name in ("eta", "omega_r", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")
        for name in ("delta_c", "delta_c_prime", "delta_0", "chi", "omega_r", "eta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class FockTruncation:
    """Photon-number cutoff; keeps Fock states ``0..n_max``."""

    n_max: int = DEFAULT_NMAX

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ValueError(f"n_max must be an integer >= 2, got {self.n_max}")

    @property
    def field_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    @classmethod
    def from_env(cls, default: int = DEFAULT_NMAX) -> "FockTruncation":
        """Truncation from ``$BLOCKADE_NMAX`` if set, else ``default``."""
        raw = os.environ.get(NMAX_ENV, "").strip()
        return cls(int(raw)) if raw else cls(default)


@dataclass(frozen=True)
class EigenPair:
    m: int
    branch: str  # "+" or "-"
    energy: float
    theta_m: float


# --- operators on the joint space -------------------------------------------

SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)  # |e><g|
SIGMA_MINUS = SIGMA_PLUS.T.copy()  # |g><e|


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(np.complex128)


def basis_index(atom: str, n: int, t: FockTruncation) -> int:
    """Position of ``|atom, n>`` in the joint basis (``atom`` is "e" or "g")."""
    if atom not in ("e", "g"):
        raise ValueError(f"atom must be 'e' or 'g', got {atom!r}")
    if not 0 <= n <= t.n_max:
        raise ValueError(f"photon number {n} outside 0..{t.n_max}")
    return (0 if atom == "e" else 1) * t.field_dim + n


def field_op(op: np.ndarray) -> np.ndarray:
    return kron(np.eye(2), op)


def atom_op(op: np.ndarray, t: FockTruncation) -> np.ndarray:
    return kron(op, np.eye(t.field_dim))


def joint_operators(t: FockTruncation) -> dict[str, np.ndarray]:
    """The operators used by the model, embedded in the joint space."""
    a = field_op(annihilation(t.n_max))
    num = a.conj().T @ a
    return {
        "a": a,
        "n": num,
        "sz": atom_op(SIGMA_Z, t),
        "sx": atom_op(SIGMA_X, t),
        "sm": atom_op(SIGMA_MINUS, t),
        "sp": atom_op(SIGMA_PLUS, t),
    }


# --- Hamiltonians -----------------------------------------------------------


def _h_common(cavity_detuning: float, p: ModelParams, ops) -> np.ndarray:
    return (
        cavity_detuning * ops["n"]
        + 0.5 * p.delta_0 * ops["sz"]
        + p.chi * ops["n"] @ ops["sz"]
        + 0.5 * p.omega_r * ops["sx"]
    )


def build_h_ddjc(p: ModelParams, t: FockTruncation) -> np.ndarray:
    """Undriven dispersive JC Hamiltonian with a transversally driven atom.

    Uses ``delta_c_prime``; ``eta`` does not enter.
    """
    return _h_common(p.delta_c_prime, p, joint_operators(t))


def build_h_full(p: ModelParams, t: FockTruncation) -> np.ndarray:
    """Hamiltonian including the coherent cavity drive ``eta (a^dag + a)``.

    Uses ``delta_c``.
    """
    ops = joint_operators(t)
    a = ops["a"]
    return _h_common(p.delta_c, p, ops) + p.eta * (a + a.conj().T)


def build_h_eff(p: ModelParams, t: FockTruncation, g_over_delta: float) -> np.ndarray:
    """Effective Hamiltonian of the largely detuned driven JC model.

    Equal to :func:`build_h_ddjc` plus the atom-conditioned cavity drive
    ``(omega_r / 2) (g / Delta) sigma_z (a^dag + a)``.
    """
    ops = joint_operators(t)
    a = ops["a"]
    cond = 0.5 * p.omega_r * g_over_delta * ops["sz"] @ (a + a.conj().T)
    return _h_common(p.delta_c_prime, p, ops) + cond


# --- closed-form spectrum ---------------------------------------------------


def mixing_angle(p: ModelParams, m: int) -> float:
    """theta_m with ``2 theta_m = atan2(omega_r, delta_0 + 2 m chi)``."""
    return 0.5 * math.atan2(p.omega_r, p.delta_0 + 2 * m * p.chi)


def eigen_energy(p: ModelParams, m: int, branch: str, delta_c_prime: float | None = None) -> float:
    dc = p.delta_c_prime if delta_c_prime is None else delta_c_prime
    sign = {"+": 1.0, "-": -1.0}[branch]
    return m * dc + sign * 0.5 * math.hypot(p.delta_0 + 2 * m * p.chi, p.omega_r)


def analytic_spectrum(p: ModelParams, m_max: int = 2) -> list[EigenPair]:
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    out = []
    for m in range(m_max + 1):
        theta = mixing_angle(p, m)
        for branch in ("+", "-"):
            out.append(EigenPair(m, branch, eigen_energy(p, m, branch), theta))
    return out


def dressed_states(p: ModelParams, m: int, t: FockTruncation) -> tuple[np.ndarray, np.ndarray]:
    """``|m>|+(m)>`` and ``|m>|-(m)>`` as vectors on the joint space."""
    if not 0 <= m <= t.n_max:
        raise ValueError(f"m={m} outside 0..{t.n_max}")
    theta = mixing_angle(p, m)
    c, s = math.cos(theta), math.sin(theta)
    ie, ig = basis_index("e", m, t), basis_index("g", m, t)
    plus = np.zeros(t.dim, dtype=np.complex128)
    minus = np.zeros(t.dim, dtype=np.complex128)
    plus[ie], plus[ig] = c, s
    minus[ie], minus[ig] = -s, c
    return plus, minus


# --- resonance conditions ---------------------------------------------------

# (label, photons k, dressed ground branch s, target branch) in the order of
# the four single-photon panels: 0,- -> 1,+ ; 0,- -> 1,- ; 0,+ -> 1,+ ; 0,+ -> 1,-
_RESONANCE_ORDER = (("-", "+"), ("-", "-"), ("+", "+"), ("+", "-"))


@dataclass(frozen=True)
class Resonance:
    label: str
    photons: int
    ground_branch: str
    target_branch: str
    delta_c: float

    @property
    def transition(self) -> str:
        k = self.photons
        return f"|ε_{{0,{self.ground_branch}}}⟩→|ε_{{{k},{self.target_branch}}}⟩"


def resonance_detuning(p: ModelParams, photons: int, ground: str, target: str) -> float:
    """Cavity detuning making ``|e_{0,ground}> -> |e_{k,target}>`` resonant."""
    if p.chi == 0:
        raise ZeroChi("resonance conditions need chi != 0")
    if photons not in (1, 2):
        raise ValueError("photons must be 1 or 2")
    upper = math.hypot(p.delta_0 + 2 * photons * p.chi, p.omega_r)
    lower = math.hypot(p.delta_0, p.omega_r)
    sign_t = -1.0 if target == "+" else 1.0
    sign_g = 1.0 if ground == "+" else -1.0
    return (sign_t * upper + sign_g * lower) / (2 * photons)


def resonance_detunings(p: ModelParams) -> list[Resonance]:
    """Single-photon (d1..d4) and two-photon (p1..p4) resonant detunings.

    Only ``delta_0``, ``chi`` and ``omega_r`` matter.
    """
    if p.chi == 0:
        raise ZeroChi("resonance conditions need chi != 0")
    table = []
    for prefix, k in (("d", 1), ("p", 2)):
        for i, (g, tb) in enumerate(_RESONANCE_ORDER, start=1):
            table.append(Resonance(f"{prefix}{i}", k, g, tb, resonance_detuning(p, k, g, tb)))
    return table


def resonance_by_label(p: ModelParams, label: str) -> float:
    for r in resonance_detunings(p):
        if r.label == label:
            return r.delta_c
    raise ValueError(f"unknown resonance label {label!r}; expected d1..d4 or p1..p4")
