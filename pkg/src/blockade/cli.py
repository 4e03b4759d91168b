"""Command-line entry point: ``blockade <subcommand> [options]``.

Settings come from (lowest to highest precedence) built-in defaults,
``$BLOCKADE_NMAX``, an optional ``--config`` file and explicit flags.

Exit codes: 0 success, 2 invalid configuration, 3 solver failure in at
least one row (the CSV is still written, with the row flagged).
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys

from .errors import BlockadeError, ConfigError
from .model import FockTruncation, ModelParams, analytic_spectrum
from .sweep import (
    SweepSpec,
    annotate_resonances,
    fidelity_to_csv,
    fmt,
    resonances_to_csv,
    rows_to_csv,
    run_chi_sweep,
    run_detuning_sweep,
    run_fidelity_sweep,
    run_omega_sweep,
    sidecar_path,
    write_text,
)

log = logging.getLogger("blockade")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

SUBCOMMAND_KIND = {
    "sweep-detuning": "detuning",
    "sweep-omega": "omega_ratio",
    "sweep-chi": "chi_ratio",
    "fidelity": "fidelity",
}

# config key -> value parser
_KEYS = {
    "kind": str,
    "start": float,
    "stop": float,
    "points": int,
    "scale": str,
    "chi": float,
    "omega_ratio": float,
    "eta": float,
    "gamma": float,
    "delta0": float,
    "delta_c_prime": float,
    "branch": str,
    "nmax": int,
    "out": str,
    "g_over_delta": str,
    "alpha": float,
    "workers": int,
    "m_max": int,
}


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI-style key = value file")
    p.add_argument("--kind", choices=("detuning", "omega_ratio", "chi_ratio", "fidelity"))
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--scale", choices=("linear", "log"))
    p.add_argument("--chi", type=float, help="dispersive coupling / kappa")
    p.add_argument("--omega-ratio", dest="omega_ratio", type=float, help="omega_r / chi")
    p.add_argument("--eta", type=float, help="cavity drive / kappa")
    p.add_argument("--gamma", type=float, help="atomic decay / kappa")
    p.add_argument("--delta0", type=float, help="atomic detuning / kappa")
    p.add_argument("--delta-c-prime", dest="delta_c_prime", type=float)
    p.add_argument("--branch", choices=("d1", "d2", "d3", "d4"))
    p.add_argument("--nmax", type=int, help="Fock cutoff (default $BLOCKADE_NMAX or 12)")
    p.add_argument("--out", help="output CSV path (stdout if omitted)")
    p.add_argument("--g-over-delta", dest="g_over_delta", help="comma-separated g/Delta values")
    p.add_argument("--alpha", type=float, help="coherent amplitude for the fidelity run")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--m-max", dest="m_max", type=int, help="highest photon number in the spectrum table")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="blockade", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    helps = {
        "sweep-detuning": "photon statistics versus cavity detuning",
        "sweep-omega": "g2(0) versus omega_r/chi on a single-photon resonance",
        "sweep-chi": "g2(0) versus chi on a single-photon resonance",
        "fidelity": "fidelity of the dispersive model versus chi*t",
        "resonances": "single- and two-photon resonant detunings",
        "spectrum": "closed-form eigenenergies E_{m,+-}",
    }
    for name, text in helps.items():
        _add_common(sub.add_parser(name, help=text, description=text))
    return parser


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; a section header is optional."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text if text.lstrip().startswith("[") else "[sweep]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    out = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            key = key.replace("-", "_")
            if key not in _KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                out[key] = _KEYS[key](raw.strip())
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return out


def _settings(args) -> dict:
    settings = read_config(args.config) if args.config else {}
    for key in _KEYS:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    return settings


def _model(settings) -> ModelParams:
    chi = settings.get("chi", 15.0)
    ratio = settings.get("omega_ratio", 2.0)
    return ModelParams(
        delta_c_prime=settings.get("delta_c_prime", 0.0),
        delta_0=settings.get("delta0", 0.0),
        chi=chi,
        omega_r=ratio * chi,
        eta=settings.get("eta", 0.1),
        gamma=settings.get("gamma", 0.5),
    )


def _truncation(settings) -> FockTruncation:
    if "nmax" in settings:
        return FockTruncation(settings["nmax"])
    return FockTruncation.from_env()


def _spec(kind: str, settings) -> SweepSpec:
    overrides = {}
    for key in ("start", "stop", "points", "scale", "omega_ratio", "alpha"):
        if key in settings:
            overrides[key] = settings[key]
    if "branch" in settings:
        overrides["resonance_branch"] = settings["branch"]
    if "g_over_delta" in settings:
        raw = settings["g_over_delta"]
        try:
            overrides["g_over_delta"] = tuple(float(v) for v in str(raw).split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"bad g_over_delta list {raw!r}") from exc
    return SweepSpec.default(
        kind,
        fixed=_model(settings),
        truncation=_truncation(settings),
        output_path=settings.get("out"),
        **overrides,
    )


def _emit(text: str, path: str | None):
    if path:
        write_text(path, text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


def _spectrum_text(p: ModelParams, m_max: int) -> str:
    lines = ["m,branch,energy,theta_m"]
    for e in analytic_spectrum(p, m_max):
        lines.append(f"{e.m},{e.branch},{fmt(e.energy)},{fmt(e.theta_m)}")
    return "\n".join(lines) + "\n"


def run(args) -> int:
    settings = _settings(args)
    command = args.command
    workers = settings.get("workers", 1)
    if command == "resonances":
        _emit(resonances_to_csv(annotate_resonances(_model(settings))), settings.get("out"))
        return EXIT_OK
    if command == "spectrum":
        _emit(_spectrum_text(_model(settings), settings.get("m_max", 2)), settings.get("out"))
        return EXIT_OK

    kind = SUBCOMMAND_KIND[command]
    if settings.get("kind", kind) != kind:
        raise ConfigError(f"config kind {settings['kind']!r} does not match subcommand {command!r}")
    spec = _spec(kind, settings)
    if kind == "fidelity":
        _emit(fidelity_to_csv(run_fidelity_sweep(spec, workers=workers)), spec.output_path)
        return EXIT_OK

    runner = {"detuning": run_detuning_sweep, "omega_ratio": run_omega_sweep, "chi_ratio": run_chi_sweep}[kind]
    rows = runner(spec, workers=workers)
    _emit(rows_to_csv(rows), spec.output_path)
    if kind == "detuning" and spec.output_path:
        write_text(sidecar_path(spec.output_path), resonances_to_csv(annotate_resonances(spec.fixed)))
    failed = sum(r.failed for r in rows)
    if failed:
        log.error("%d of %d rows failed to solve", failed, len(rows))
        return EXIT_SOLVER
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return run(args)
    except (ConfigError, ValueError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    except BlockadeError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
