"""Registry of the figure scenarios and the runner that writes their files.

Output layout is ``<out>/<scenario-id>/<series-name>.{csv,svg}``. Every CSV
starts with ``# key = value`` lines holding the complete configuration.
"""

from __future__ import annotations

import enum
import math
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .. import __version__
from ..dynamics import fidelity_series, find_max_fidelity, gaussian_packet, TruncationWarning
from ..errors import BoundaryTruncationError, InvalidConfigError
from ..model import ChainConfig, analytic_energy, analytic_strong_field_energy, build_hamiltonian
from ..spectral import diagonalize, level_spacings, spmc_check
from .csvio import write_csv
from .svg import Series, render_svg
from .sweep import SweepSpec, harmonic_period, peak_window, sweep

__all__ = ["ScenarioId", "Scenario", "default_scenario", "run_scenario", "STRONG_FIELD_B0"]

STRONG_FIELD_B0 = 6.33
FIDELITY_COLUMNS = ["t", "F", "delta", "L", "L_eff", "lambda"]


class ScenarioId(str, enum.Enum):
    FIG2 = "fig2"
    FIG3 = "fig3"
    FIG4 = "fig4"
    FIG5 = "fig5"
    FIG6 = "fig6"
    FIG7 = "fig7"
    FIG8 = "fig8"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Scenario:
    """One reproducible experiment.

    ``t_max`` is in units of 1/J; ``None`` picks the scenario default
    (three revival times for the tan^2 runs, three harmonic periods in the
    strong field). ``center`` is used by custom runs only.
    """

    id: ScenarioId
    config: ChainConfig
    widths: tuple[float, ...] = ()
    distances: tuple[int, ...] = ()
    lambdas: tuple[float, ...] = ()
    l_effs: tuple[float, ...] = ()
    t_max: float | None = None
    samples: int = 3001
    center: int = 0
    peak_samples: int = 2000

    def __post_init__(self):
        object.__setattr__(self, "id", ScenarioId(self.id))
        for name in ("widths", "distances", "lambdas", "l_effs"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def validate(self) -> None:
        """Check grids and that every packet fits its chain."""
        for name in ("widths", "distances", "lambdas", "l_effs"):
            grid = np.asarray(getattr(self, name), dtype=float)
            if grid.size > 1:
                d = np.diff(grid)
                if not (np.all(d > 0) or np.all(d < 0)):
                    raise InvalidConfigError(f"{name} grid must be sorted without repeats")
        needs = {
            ScenarioId.FIG3: ("widths",),
            ScenarioId.FIG4: ("widths", "l_effs"),
            ScenarioId.FIG5: ("widths", "lambdas", "distances"),
            ScenarioId.FIG7: ("widths", "distances"),
            ScenarioId.FIG8: ("widths", "distances"),
            ScenarioId.CUSTOM: ("widths",),
        }.get(self.id, ())
        for name in needs:
            if not getattr(self, name):
                raise InvalidConfigError(f"{self.id.value} needs a non-empty {name} grid")
        if self.samples < 1:
            raise InvalidConfigError("samples must be >= 1")
        for config, center, delta in self._packets():
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", TruncationWarning)
                    gaussian_packet(config, center, delta)
            except (BoundaryTruncationError, ValueError) as exc:
                raise InvalidConfigError(f"{self.id.value}: {exc}") from exc

    def _packets(self):
        if self.id is ScenarioId.FIG4:
            for l_eff in self.l_effs:
                cfg = self.config.replace(l_eff=l_eff)
                for d in self.widths:
                    yield cfg, _fig4_distance(l_eff) // 2, d
        elif self.id is ScenarioId.CUSTOM:
            for d in self.widths:
                yield self.config, self.center, d
        elif self.id in (ScenarioId.FIG3, ScenarioId.FIG5, ScenarioId.FIG7, ScenarioId.FIG8):
            configs = [self.config.replace(lam=x) for x in self.lambdas] or [self.config]
            for cfg in configs:
                for L in self.distances:
                    for d in self.widths:
                        yield cfg, L // 2, d

    def comments(self) -> list[tuple[str, object]]:
        out: list[tuple[str, object]] = [("scenario", self.id.value)]
        out += self.config.as_items()
        for name in ("widths", "distances", "lambdas", "l_effs"):
            grid = getattr(self, name)
            if grid:
                out.append((name, " ".join(format(float(v), ".17g") for v in grid)))
        out += [("t-max", "default" if self.t_max is None else self.t_max), ("samples", self.samples)]
        if self.id is ScenarioId.CUSTOM:
            out.append(("center", self.center))
        out.append(("tanchain-version", __version__))
        return out


def _fig4_distance(l_eff: float) -> int:
    # transfer distance L = L_eff - 100
    return int(round(l_eff)) - 100


def default_scenario(scenario_id) -> Scenario:
    """Scenario with the figure's parameters."""
    sid = ScenarioId(scenario_id)
    lam1 = ChainConfig(l_eff=500, lam=1.0)
    strong = ChainConfig(l_eff=500, b0=STRONG_FIELD_B0)
    if sid is ScenarioId.FIG2:
        return Scenario(sid, lam1)
    if sid is ScenarioId.FIG3:
        return Scenario(sid, lam1, widths=(24, 18, 12, 6), distances=(400,))
    if sid is ScenarioId.FIG4:
        return Scenario(sid, lam1, widths=(28, 18), l_effs=tuple(float(x) for x in range(500, 1001, 50)))
    if sid is ScenarioId.FIG5:
        lambdas = tuple(round(0.5 + 0.05 * k, 10) for k in range(21))
        return Scenario(sid, lam1, widths=(24,), distances=(400,), lambdas=lambdas)
    if sid is ScenarioId.FIG6:
        return Scenario(sid, strong)
    if sid is ScenarioId.FIG7:
        return Scenario(sid, strong, widths=(6, 4, 2), distances=(120,))
    if sid is ScenarioId.FIG8:
        return Scenario(sid, strong, widths=(6,), distances=(120, 200, 220))
    return Scenario(sid, lam1, widths=(24,), center=0, t_max=0.0, samples=1)


def _time_grid(t_max: float, samples: int) -> np.ndarray:
    if samples == 1:
        return np.array([0.0]) if t_max == 0 else np.array([float(t_max)])
    return np.linspace(0.0, t_max, samples)


def _fidelity_rows(series, delta, distance, config):
    return [[t, f, float(delta), distance, float(config.l_eff), config.lam] for t, f in zip(series.times, series.values)]


def _tag(v) -> str:
    return format(float(v), "g").replace(".", "p")


def run_scenario(scenario: Scenario, output_dir, workers: int | None = 1) -> list[str]:
    """Run a scenario and write its CSV and SVG files; returns their paths."""
    scenario.validate()
    folder = os.path.join(os.fspath(output_dir), scenario.id.value)
    try:
        os.makedirs(folder, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {folder}: {exc.strerror or exc}") from exc
    runner = {
        ScenarioId.FIG2: _run_spacings,
        ScenarioId.FIG6: _run_strong_spectrum,
        ScenarioId.FIG3: _run_fidelity_traces,
        ScenarioId.FIG7: _run_fidelity_traces,
        ScenarioId.FIG8: _run_fidelity_traces,
        ScenarioId.CUSTOM: _run_fidelity_traces,
        ScenarioId.FIG4: _run_sweep,
        ScenarioId.FIG5: _run_sweep,
    }[scenario.id]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return runner(scenario, folder, workers)


def _run_spacings(sc: Scenario, folder: str, workers) -> list[str]:
    config = sc.config
    s = diagonalize(build_hamiltonian(config))
    D = level_spacings(s)
    # analytic labels start at n = 1 for the ground state
    n = np.arange(1, D.size + 1)
    E_an = np.array([analytic_energy(config, k) for k in range(1, D.size + 2)])
    D_an = np.diff(E_an)
    comments = sc.comments() + [("level-label", "n = 1 is the ground state; D(n) = E(n+1) - E(n)")]
    paths = [
        write_csv(os.path.join(folder, "spacings.csv"), ["n", "D", "D_analytic"], zip(n, D, D_an), comments),
        write_csv(
            os.path.join(folder, "spectrum.csv"),
            ["n", "E", "parity", "parity_confidence"],
            zip(np.arange(1, s.size + 1), s.energies, s.parities.tolist(), s.parity_confidence),
            comments,
        ),
    ]
    rep = spmc_check(s, n_max=min(100, s.size - 1), model="quadratic")
    paths.append(
        write_csv(
            os.path.join(folder, "spmc.csv"),
            ["model", "n_max", "c2", "c1", "c0", "max_relative_residual", "parity_alternation_ok", "quadratic_extent", "tolerance"],
            [[rep.model, rep.n_max, *rep.fit_coefficients, rep.max_relative_residual, rep.parity_alternation_ok, rep.quadratic_extent, rep.tolerance]],
            comments,
        )
    )
    paths.append(
        render_svg(
            [Series("numerical", n, D), Series("continuum", n, D_an)],
            os.path.join(folder, "spacings.svg"),
            style="fig2",
        )
    )
    return paths


def _run_strong_spectrum(sc: Scenario, folder: str, workers) -> list[str]:
    config = sc.config
    s = diagonalize(build_hamiltonian(config))
    m = np.arange(s.size)
    E_rel = s.energies - s.energies[0]
    E_an = analytic_strong_field_energy(config, m.astype(float))
    D = np.append(level_spacings(s), math.nan)
    comments = sc.comments() + [("level-label", "n = 0 is the ground state; D(n) = E(n+1) - E(n)")]
    paths = [
        write_csv(
            os.path.join(folder, "spectrum.csv"),
            ["n", "E", "E_rel", "E_analytic", "D", "parity"],
            zip(m, s.energies, E_rel, E_an, D, s.parities.tolist()),
            comments,
        )
    ]
    rep = spmc_check(s, n_max=min(80, s.size - 1), model="linear")
    paths.append(
        write_csv(
            os.path.join(folder, "spmc.csv"),
            ["model", "n_max", "c2", "c1", "c0", "max_relative_residual", "parity_alternation_ok", "quadratic_extent", "tolerance"],
            [[rep.model, rep.n_max, *rep.fit_coefficients, rep.max_relative_residual, rep.parity_alternation_ok, rep.quadratic_extent, rep.tolerance]],
            comments,
        )
    )
    paths.append(
        render_svg(
            [Series("numerical", m, E_rel), Series("harmonic limit", m, E_an)],
            os.path.join(folder, "spectrum.svg"),
            style="fig6",
        )
    )
    return paths


def _run_fidelity_traces(sc: Scenario, folder: str, workers) -> list[str]:
    config = sc.config
    s = diagonalize(build_hamiltonian(config))
    strong = sc.id in (ScenarioId.FIG7, ScenarioId.FIG8)
    if sc.t_max is not None:
        t_max = sc.t_max
    elif strong:
        t_max = 3.0 * harmonic_period(s)
    else:
        t_max = 3.0 * config.revival_time
    times = _time_grid(t_max, sc.samples)
    window_mode = "harmonic" if strong else "revival"

    if sc.id is ScenarioId.CUSTOM:
        runs = [(d, 2 * sc.center) for d in sc.widths]
    else:
        runs = [(d, L) for L in sc.distances for d in sc.widths]

    paths, curves, peaks = [], [], []
    comments = sc.comments()
    for delta, distance in runs:
        psi = gaussian_packet(config, distance // 2, delta)
        series = fidelity_series(config, psi, times, spectral=s)
        name = f"fidelity_delta{_tag(delta)}_L{distance}"
        if sc.id is ScenarioId.CUSTOM:
            name = "fidelity" if len(runs) == 1 else f"fidelity_delta{_tag(delta)}"
        paths.append(
            write_csv(
                os.path.join(folder, f"{name}.csv"),
                FIDELITY_COLUMNS,
                _fidelity_rows(series, delta, distance, config),
                comments + [("delta", delta), ("L", distance), ("fingerprint", series.fingerprint)],
            )
        )
        label = f"Delta={delta:g}" if len({L for _, L in runs}) == 1 else f"Delta={delta:g}, L={distance}"
        curves.append(Series(label, series.times, series.values))
        if sc.id is not ScenarioId.CUSTOM and math.isfinite(config.revival_time):
            window = peak_window(config, s, window_mode)
            t_star, f_star = find_max_fidelity(config, psi, window, spectral=s, samples=sc.peak_samples)
            peaks.append([float(delta), distance, window[0], window[1], t_star, f_star])

    if peaks:
        paths.append(
            write_csv(
                os.path.join(folder, "peaks.csv"),
                ["delta", "L", "window_lo", "window_hi", "t_star", "f_star"],
                peaks,
                comments + [("window", window_mode)],
            )
        )
    paths.append(render_svg(curves, os.path.join(folder, "fidelity.svg"), style=sc.id.value))
    return paths


def _run_sweep(sc: Scenario, folder: str, workers) -> list[str]:
    paths, curves = [], []
    for delta in sc.widths:
        if sc.id is ScenarioId.FIG4:
            points = tuple({"l_eff": float(x), "distance": _fig4_distance(x)} for x in sc.l_effs)
            spec = SweepSpec(sc.config, points, delta=delta, window="revival", samples=sc.peak_samples)
            x_key = "l_eff"
        else:
            points = tuple({"lam": float(x)} for x in sc.lambdas)
            spec = SweepSpec(sc.config, points, delta=delta, distance=sc.distances[0], window="revival", samples=sc.peak_samples)
            x_key = "lambda"
        table = sweep(spec, workers=workers)
        name = f"max_fidelity_delta{_tag(delta)}"
        paths.append(
            write_csv(
                os.path.join(folder, f"{name}.csv"),
                table.columns,
                table.as_rows(),
                sc.comments() + [("delta", delta), ("window", spec.window), ("fingerprint", table.fingerprint)],
            )
        )
        curves.append(Series(f"Delta={delta:g}", table.column(x_key).astype(float), table.column("f_star")))
    paths.append(render_svg(curves, os.path.join(folder, "max_fidelity.svg"), style=sc.id.value))
    return paths
