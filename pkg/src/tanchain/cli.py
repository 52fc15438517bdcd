"""Command-line interface.

Every run first prints the fully resolved configuration as ``key = value``
lines; that block is itself a valid ``--config`` file.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from .dynamics import (
    TruncationWarning,
    evolve_chebyshev,
    evolve_spectral,
    fidelity,
    fidelity_series,
    find_max_fidelity,
    gaussian_packet,
)
from .errors import TanchainError
from .experiments import ScenarioId, SweepSpec, default_scenario, run_scenario, sweep, write_csv
from .experiments.sweep import peak_window
from .model import ChainConfig, PotentialKind, build_hamiltonian
from .spectral import diagonalize, level_spacings, spmc_check

CHAIN_KEYS = ("j", "lambda", "b0", "l-eff", "n-half", "potential", "hopping-ratio")
RUN_KEYS = ("delta", "center", "t", "t-max", "samples", "n-max", "propagator", "window", "distance", "grid")
CONFIG_KEYS = CHAIN_KEYS + RUN_KEYS
GRID_NAMES = {"lambda": "lam", "b0": "b0", "l-eff": "l_eff", "delta": "delta", "distance": "distance"}


class UsageError(Exception):
    """Bad arguments; reported with exit status 2."""


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unrecognized config line {raw.strip()!r}")
        values[key] = value.strip()
    return values


def _add_chain_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("chain (energies in units of J, lengths in sites)")
    S = argparse.SUPPRESS
    g.add_argument("--config", default=S, metavar="PATH", help="key = value file; flags override its entries")
    g.add_argument("--j", type=float, default=S, help="exchange coupling J, the energy unit (default 1)")
    g.add_argument("--lambda", dest="lambda", type=float, default=S, help="dimensionless field strength lambda (default 1 unless --b0 given)")
    g.add_argument("--b0", type=float, default=S, help="field amplitude B0 in units of J (alternative to --lambda)")
    g.add_argument("--l-eff", dest="l-eff", type=float, default=S, help="effective length L_eff in sites (default 500)")
    g.add_argument("--n-half", dest="n-half", type=int, default=S, help="half-length N, chain has 2N+1 sites (default ceil(L_eff/2)-1)")
    g.add_argument("--potential", choices=[k.value for k in PotentialKind], default=S, help="on-site potential shape (default tangent)")
    g.add_argument("--hopping-ratio", dest="hopping-ratio", type=float, default=S, help="hopping amplitude in units of J (default 1)")
    g.add_argument("--out", default="results", help="output directory (default ./results)")


def _add_packet_flags(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--delta", type=float, default=S, help="packet width Delta (FWHM of |psi|^2) in sites (default 24)")
    p.add_argument("--center", type=int, default=S, help="packet center N_A in sites; the target is -N_A (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tanchain",
        description="Single-magnon wave-packet transfer in a tan^2-confined Heisenberg chain. "
        "Energies in units of J, times in 1/J (hbar = 1), lengths in sites.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    S = argparse.SUPPRESS

    p = sub.add_parser("spectrum", help="energies, spacings, parities and SPMC fit")
    _add_chain_flags(p)
    p.add_argument("--n-max", dest="n-max", type=int, default=S, help="highest level in the SPMC fit (default 80)")

    p = sub.add_parser("evolve", help="packet snapshot at one time")
    _add_chain_flags(p)
    _add_packet_flags(p)
    p.add_argument("--t", type=float, default=S, help="evolution time in 1/J (default 2 pi / B0)")
    p.add_argument("--propagator", choices=["spectral", "chebyshev"], default=S, help="time-evolution method (default spectral)")

    p = sub.add_parser("fidelity", help="fidelity time series")
    _add_chain_flags(p)
    _add_packet_flags(p)
    p.add_argument("--t-max", dest="t-max", type=float, default=S, help="end of the time grid in 1/J (default 3 * 2 pi / B0)")
    p.add_argument("--samples", type=int, default=S, help="number of grid points including t = 0 (default 3001)")

    p = sub.add_parser("sweep", help="maximal fidelity over a parameter grid")
    _add_chain_flags(p)
    p.add_argument("--delta", type=float, default=S, help="packet width Delta in sites (default 24)")
    p.add_argument("--distance", type=int, default=S, help="transfer distance L = 2 N_A in sites (default 400)")
    p.add_argument(
        "--grid",
        default=S,
        help="NAME=START:STOP:STEP or NAME=v1,v2,...; NAME one of lambda, b0, l-eff, delta, distance",
    )
    p.add_argument("--window", choices=["revival", "harmonic"], default=S, help="peak window: [tau/2, 3tau/2] or one harmonic period (default revival)")
    p.add_argument("--workers", type=int, default=None, help="parallel worker processes (default: all CPUs)")

    p = sub.add_parser("reproduce", help="regenerate one figure's data and plot")
    p.add_argument("figure", choices=[s.value for s in ScenarioId if s is not ScenarioId.CUSTOM])
    p.add_argument("--out", default="results", help="output directory (default ./results)")
    p.add_argument("--workers", type=int, default=None, help="parallel worker processes for sweeps (default: all CPUs)")
    return parser


def resolve(args: argparse.Namespace) -> tuple[ChainConfig, dict]:
    """Merge defaults, config file and flags into a chain config and run settings."""
    flags = {k: v for k, v in vars(args).items() if k in CONFIG_KEYS}
    values: dict[str, str] = read_config_file(args.config) if hasattr(args, "config") else {}
    # a flag naming one field parameter replaces both entries of the file
    if "lambda" in flags and "b0" not in flags:
        values.pop("b0", None)
    if "b0" in flags and "lambda" not in flags:
        values.pop("lambda", None)
    if "l-eff" in flags and "n-half" not in flags:
        values.pop("n-half", None)
    merged = {**values, **{k: str(v) for k, v in flags.items()}}

    def get(key, cast, default=None):
        if key not in merged:
            return default
        try:
            return cast(merged[key])
        except ValueError:
            raise UsageError(f"invalid value for {key}: {merged[key]!r}") from None

    lam = get("lambda", float)
    b0 = get("b0", float)
    potential = get("potential", str, "tangent")
    if lam is None and b0 is None and potential != "zero":
        lam = 1.0
    try:
        config = ChainConfig(
            l_eff=get("l-eff", float, 500.0),
            lam=lam,
            b0=b0,
            j_coupling=get("j", float, 1.0),
            n_half=get("n-half", int),
            potential=potential,
            hopping_ratio=get("hopping-ratio", float, 1.0),
        )
    except TanchainError as exc:
        raise UsageError(str(exc)) from exc

    tau = config.revival_time
    run = {}
    cmd = args.command
    if cmd in ("evolve", "fidelity", "sweep"):
        run["delta"] = get("delta", float, 24.0)
    if cmd in ("evolve", "fidelity"):
        run["center"] = get("center", int, 0)
    if cmd == "evolve":
        run["t"] = get("t", float, tau)
        run["propagator"] = get("propagator", str, "spectral")
    if cmd == "fidelity":
        run["t-max"] = get("t-max", float, 3.0 * tau)
        run["samples"] = get("samples", int, 3001)
    if cmd == "spectrum":
        run["n-max"] = get("n-max", int, min(80, config.size - 1))
    if cmd == "sweep":
        run["distance"] = get("distance", int, 400)
        run["window"] = get("window", str, "revival")
        run["grid"] = get("grid", str)
        if run["grid"] is None:
            raise UsageError("sweep needs --grid NAME=START:STOP:STEP or NAME=v1,v2,...")
    for key in ("t", "t-max"):
        if key in run and not math.isfinite(run[key]):
            raise UsageError(f"--{key} has no default for a field-free chain; give it explicitly")
    return config, run


def banner(config: ChainConfig, run: dict) -> str:
    lines = ["# resolved configuration"]
    lines += [f"{k} = {v}" for k, v in config.as_items()]
    for k, v in run.items():
        lines.append(f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}")
    return "\n".join(lines)


def parse_grid(text: str) -> tuple[str, list]:
    name, sep, spec = text.partition("=")
    name = name.strip()
    if not sep or name not in GRID_NAMES:
        raise UsageError(f"--grid must look like NAME=..., NAME in {sorted(GRID_NAMES)}; got {text!r}")
    try:
        if ":" in spec:
            start, stop, step = (float(x) for x in spec.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + k * step, 12) for k in range(count)]
        else:
            values = [float(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid values {spec!r}") from None
    if not values:
        raise UsageError("empty --grid")
    if name == "distance":
        values = [int(v) for v in values]
    return GRID_NAMES[name], values


def _cmd_spectrum(config, run, out) -> None:
    s = diagonalize(build_hamiltonian(config))
    D = np.append(level_spacings(s), math.nan) if s.size > 1 else np.array([math.nan])
    path = write_csv(
        os.path.join(out, "spectrum.csv"),
        ["n", "E", "D", "parity", "parity_confidence"],
        zip(range(s.size), s.energies, D, s.parities.tolist(), s.parity_confidence),
        config.as_items(),
    )
    print(f"wrote {path}")
    n_max = run["n-max"]
    for model in ("quadratic", "linear"):
        if n_max < (2 if model == "quadratic" else 1):
            continue
        rep = spmc_check(s, n_max, model)
        c2, c1, c0 = rep.fit_coefficients
        print(
            f"spmc {model}: n_max={rep.n_max} c2={c2:.6g} c1={c1:.6g} c0={c0:.6g} "
            f"residual={rep.max_relative_residual:.4g} extent={rep.quadratic_extent} "
            f"parity_alternation={'ok' if rep.parity_alternation_ok else 'broken'}"
        )


def _cmd_evolve(config, run, out) -> None:
    psi = gaussian_packet(config, run["center"], run["delta"])
    h = build_hamiltonian(config)
    if run["propagator"] == "chebyshev":
        half_width = 0.5 * (h.gershgorin_bounds()[1] - h.gershgorin_bounds()[0])
        steps = max(1, int(math.ceil(abs(half_width * run["t"]) / 1000.0)))
        phi = evolve_chebyshev(h, psi, run["t"], steps=steps)
    else:
        phi = evolve_spectral(diagonalize(h), psi, run["t"])
    a = phi.amplitudes
    path = write_csv(
        os.path.join(out, "evolve.csv"),
        ["site", "re", "im", "abs"],
        zip(config.sites.tolist(), a.real, a.imag, np.abs(a)),
        config.as_items() + list(run.items()),
    )
    print(f"wrote {path}")
    print(f"F(t={run['t']:.6g}) = {fidelity(psi, phi):.12f}")


def _cmd_fidelity(config, run, out) -> None:
    psi = gaussian_packet(config, run["center"], run["delta"])
    s = diagonalize(build_hamiltonian(config))
    n = run["samples"]
    times = np.linspace(0.0, run["t-max"], n) if n > 1 else np.array([run["t-max"]])
    series = fidelity_series(config, psi, times, spectral=s)
    rows = [[t, f, run["delta"], 2 * run["center"], float(config.l_eff), config.lam] for t, f in series.samples]
    path = write_csv(
        os.path.join(out, "fidelity.csv"),
        ["t", "F", "delta", "L", "L_eff", "lambda"],
        rows,
        config.as_items() + list(run.items()) + [("fingerprint", series.fingerprint)],
    )
    print(f"wrote {path}")
    k = int(np.argmax(series.values))
    print(f"max sampled F = {series.values[k]:.12f} at t = {series.times[k]:.10g}")
    if run["t-max"] > 0 and math.isfinite(config.revival_time):
        t_star, f_star = find_max_fidelity(config, psi, peak_window(config, s, "revival"), spectral=s)
        print(f"refined peak in [tau/2, 3tau/2]: F = {f_star:.12f} at t = {t_star:.10g}")


def _cmd_sweep(config, run, out, workers) -> None:
    key, values = parse_grid(run["grid"])
    spec = SweepSpec.grid(config, key, values, delta=run["delta"], distance=run["distance"], window=run["window"])
    table = sweep(spec, workers=workers)
    path = write_csv(
        os.path.join(out, "sweep.csv"),
        table.columns,
        table.as_rows(),
        config.as_items() + list(run.items()) + [("fingerprint", table.fingerprint)],
    )
    print(f"wrote {path}")
    for row in table.rows:
        print(f"{key}={dict(row.params).get('lambda' if key == 'lam' else key)}  t*={row.t_star:.10g}  F*={row.f_star:.10f}  {row.diagnostics}")


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "reproduce":
            print(f"# reproduce {args.figure}")
            scenario = default_scenario(args.figure)
            print(banner(scenario.config, {}))
            paths = run_scenario(scenario, args.out, workers=args.workers)
            for p in paths:
                print(f"wrote {p}")
            return 0
        config, run = resolve(args)
    except UsageError as exc:
        print(f"tanchain: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"tanchain: error: {exc}", file=sys.stderr)
        return 2
    except (TanchainError, OSError) as exc:
        print(f"tanchain: {exc}", file=sys.stderr)
        return 1

    print(banner(config, run))
    out = args.out
    try:
        os.makedirs(out, exist_ok=True)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            if args.command == "spectrum":
                _cmd_spectrum(config, run, out)
            elif args.command == "evolve":
                _cmd_evolve(config, run, out)
            elif args.command == "fidelity":
                _cmd_fidelity(config, run, out)
            else:
                _cmd_sweep(config, run, out, args.workers)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except (UsageError, ValueError) as exc:
        print(f"tanchain: error: {exc}", file=sys.stderr)
        return 2
    except (TanchainError, OSError) as exc:
        print(f"tanchain: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
