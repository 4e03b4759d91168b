"""Parameter sweeps over the steady state and the dispersive-model fidelity.

Every sweep point is an independent task. With ``workers > 1`` points are
farmed out to a process pool and gathered back in axis order; each solve is
pinned to a single BLAS thread so serial and parallel runs produce the same
bytes.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import BlockadeError, ConfigError, NoPhotons
from .lindblad import (
    RESIDUAL_TOL,
    g2_weak_drive_estimate,
    g2_zero,
    mean_photon_number,
    model_liouvillian,
    photon_number_dist,
    steady_state,
    steady_state_residual,
)
from .model import FockTruncation, ModelParams, Resonance, resonance_by_label, resonance_detunings
from .validity import ValidityParams, coherent_initial_state, fidelity_curve

KINDS = ("detuning", "omega_ratio", "chi_ratio", "fidelity")
SINGLE_PHOTON_LABELS = ("d1", "d2", "d3", "d4")
DEFAULT_G_OVER_DELTA = (0.05, 0.1, 0.2, 0.3)

STEADY_HEADER = ("axis", "p0", "p1", "p2", "mean_n", "g2", "g2_weak", "residual", "flag")
FIDELITY_HEADER = ("g_over_delta", "chi_t", "fidelity")
RESONANCE_HEADER = ("label", "transition", "delta_c")

FLAG_NO_PHOTONS = "no_photons"
FLAG_RESIDUAL = "residual"


@dataclass(frozen=True)
class SweepSpec:
    """Description of one sweep.

    ``start``/``stop``/``points`` span the axis: ``delta_c`` for
    ``detuning``, ``omega_r / chi`` for ``omega_ratio``, ``chi`` for
    ``chi_ratio`` and ``chi * t`` for ``fidelity`` (which must start at 0).
    ``omega_ratio`` fixes ``omega_r / chi`` for the chi and fidelity sweeps.
    """

    kind: str
    start: float
    stop: float
    points: int
    fixed: ModelParams = field(default_factory=ModelParams)
    resonance_branch: str | None = None
    truncation: FockTruncation = field(default_factory=FockTruncation.from_env)
    output_path: str | None = None
    scale: str = "linear"
    omega_ratio: float = 2.0
    g_over_delta: tuple[float, ...] = DEFAULT_G_OVER_DELTA
    alpha: complex = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError(f"points must be an integer >= 2, got {self.points}")
        if not self.start < self.stop:
            raise ConfigError(f"need start < stop, got {self.start} >= {self.stop}")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and self.start <= 0:
            raise ConfigError("log-spaced axis needs start > 0")
        if self.kind in ("omega_ratio", "chi_ratio"):
            if self.resonance_branch not in SINGLE_PHOTON_LABELS:
                raise ConfigError(
                    f"{self.kind} sweeps need resonance_branch in {SINGLE_PHOTON_LABELS}, "
                    f"got {self.resonance_branch!r}"
                )
        elif self.resonance_branch is not None and self.resonance_branch not in SINGLE_PHOTON_LABELS:
            raise ConfigError(f"unknown resonance branch {self.resonance_branch!r}")
        if self.kind == "fidelity":
            if self.start != 0:
                raise ConfigError("fidelity sweeps start at chi*t = 0")
            if not self.g_over_delta or any(r <= 0 for r in self.g_over_delta):
                raise ConfigError("g_over_delta values must be positive")
            if self.fixed.chi == 0:
                raise ConfigError("fidelity sweeps need chi != 0")

    def axis(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)

    @classmethod
    def default(cls, kind: str, **overrides) -> "SweepSpec":
        """Spec pre-filled with the default recipe for each sweep kind."""
        base = {
            "detuning": dict(start=-45.0, stop=45.0, points=901),
            "omega_ratio": dict(start=1e-3, stop=1e2, points=61, scale="log", resonance_branch="d2"),
            "chi_ratio": dict(start=0.5, stop=30.0, points=60, resonance_branch="d2"),
            "fidelity": dict(start=0.0, stop=10.0, points=1001),
        }[kind]
        base.update(overrides)
        return cls(kind=kind, **base)


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    p0: float | None = None
    p1: float | None = None
    p2: float | None = None
    mean_n: float | None = None
    g2: float | None = None
    g2_weak: float | None = None
    solver_residual: float | None = None
    flag: str = ""

    @property
    def failed(self) -> bool:
        """True when the solve itself failed or missed the residual bound."""
        return self.flag not in ("", FLAG_NO_PHOTONS)


# --- per-point work ---------------------------------------------------------


def point_params(spec: SweepSpec, x: float) -> ModelParams:
    """Model parameters at axis value ``x``."""
    f = spec.fixed
    if spec.kind == "detuning":
        return f.replace(delta_c=float(x), delta_c_prime=float(x))
    if spec.kind == "omega_ratio":
        p = f.replace(omega_r=float(x) * f.chi)
    elif spec.kind == "chi_ratio":
        p = f.replace(chi=float(x), omega_r=spec.omega_ratio * float(x))
    else:
        raise ValueError(f"no steady-state parameters for kind {spec.kind!r}")
    dc = resonance_by_label(p, spec.resonance_branch)
    return p.replace(delta_c=dc, delta_c_prime=dc)


def steady_point(p: ModelParams, t: FockTruncation, axis_value: float) -> SweepRow:
    """Steady-state observables at one parameter point; never raises on
    solver trouble, the row is flagged instead."""
    l = model_liouvillian(p, t)
    try:
        rho = steady_state(l)
    except BlockadeError as exc:
        return SweepRow(axis_value, flag=type(exc).__name__)
    residual = steady_state_residual(l, rho)
    flag = FLAG_RESIDUAL if residual > RESIDUAL_TOL else ""
    try:
        g2 = g2_zero(rho)
    except NoPhotons:
        g2 = None
        flag = flag or FLAG_NO_PHOTONS
    try:
        g2w = g2_weak_drive_estimate(rho)
    except NoPhotons:
        g2w = None
    return SweepRow(
        axis_value,
        photon_number_dist(rho, 0),
        photon_number_dist(rho, 1),
        photon_number_dist(rho, 2),
        mean_photon_number(rho),
        g2,
        g2w,
        residual,
        flag,
    )


def _steady_task(args) -> SweepRow:
    spec, x = args
    with threadpool_limits(limits=1):
        return steady_point(point_params(spec, x), spec.truncation, float(x))


def _fidelity_task(args):
    spec, ratio = args
    params = ValidityParams.dispersive_recipe(
        ratio, chi=spec.fixed.chi, omega_ratio=spec.omega_ratio, delta_0=spec.fixed.delta_0
    )
    init = coherent_initial_state(spec.alpha, spec.truncation)
    with threadpool_limits(limits=1):
        times, fids, drift = fidelity_curve(params, init, spec.stop / spec.fixed.chi, spec.points)
    return ratio, times * spec.fixed.chi, fids, drift


def _run(task, items, workers: int):
    if workers <= 1 or len(items) < 2:
        return [task(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, items))


def _require(spec: SweepSpec, kind: str):
    if spec.kind != kind:
        raise ConfigError(f"expected a {kind!r} spec, got {spec.kind!r}")


def run_detuning_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Observables versus the cavity detuning ``delta_c``."""
    _require(spec, "detuning")
    return _run(_steady_task, [(spec, x) for x in spec.axis()], workers)


def run_omega_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Observables versus ``omega_r / chi``, with ``delta_c`` kept on the
    chosen single-photon resonance at every point."""
    _require(spec, "omega_ratio")
    return _run(_steady_task, [(spec, x) for x in spec.axis()], workers)


def run_chi_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Observables versus ``chi`` at fixed ``omega_r / chi``, on resonance."""
    _require(spec, "chi_ratio")
    return _run(_steady_task, [(spec, x) for x in spec.axis()], workers)


@dataclass(frozen=True)
class FidelityRun:
    g_over_delta: float
    chi_t: np.ndarray
    fidelity: np.ndarray
    norm_drift: float


def run_fidelity_sweep(spec: SweepSpec, workers: int = 1) -> list[FidelityRun]:
    """F(t) on ``points`` samples of ``chi*t`` for each ``g / Delta``."""
    _require(spec, "fidelity")
    results = _run(_fidelity_task, [(spec, r) for r in spec.g_over_delta], workers)
    return [FidelityRun(r, ct, f, d) for r, ct, f, d in results]


def annotate_resonances(p: ModelParams) -> list[Resonance]:
    return resonance_detunings(p)


# --- analysis helpers -------------------------------------------------------


def local_extrema(x, y, kind: str = "min") -> list[tuple[float, float]]:
    """Strict interior local extrema of sampled ``y(x)``, each refined by a
    parabola through the extremal sample and its two neighbours."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = 1.0 if kind == "min" else -1.0
    out = []
    for i in range(1, len(y) - 1):
        if not (np.isfinite(y[i - 1]) and np.isfinite(y[i]) and np.isfinite(y[i + 1])):
            continue
        if s * y[i] < s * y[i - 1] and s * y[i] < s * y[i + 1]:
            out.append(_parabola_vertex(x[i - 1 : i + 2], y[i - 1 : i + 2]))
    return out


def _parabola_vertex(xs, ys) -> tuple[float, float]:
    c2, c1, c0 = np.polyfit(xs, ys, 2)
    if c2 == 0:
        return float(xs[1]), float(ys[1])
    xv = -c1 / (2 * c2)
    xv = min(max(xv, xs[0]), xs[2])
    return float(xv), float(c0 + c1 * xv + c2 * xv**2)


# --- CSV --------------------------------------------------------------------


def fmt(x) -> str:
    """17 significant digits, scientific notation; ``None`` -> empty."""
    if x is None:
        return ""
    return f"{float(x):.16e}"


def _to_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def rows_to_csv(rows: list[SweepRow]) -> str:
    return _to_text(
        STEADY_HEADER,
        (
            (fmt(r.axis_value), fmt(r.p0), fmt(r.p1), fmt(r.p2), fmt(r.mean_n),
             fmt(r.g2), fmt(r.g2_weak), fmt(r.solver_residual), r.flag)
            for r in rows
        ),
    )


def fidelity_to_csv(runs: list[FidelityRun]) -> str:
    return _to_text(
        FIDELITY_HEADER,
        ((fmt(run.g_over_delta), fmt(ct), fmt(f)) for run in runs for ct, f in zip(run.chi_t, run.fidelity)),
    )


def resonances_to_csv(table: list[Resonance]) -> str:
    return _to_text(RESONANCE_HEADER, ((r.label, r.transition, fmt(r.delta_c)) for r in table))


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_resonances.csv")
