"""Figure scenarios, parameter sweeps and CSV/SVG emitters."""

from .csvio import read_csv, write_csv
from .scenarios import Scenario, ScenarioId, default_scenario, run_scenario
from .svg import Series, render_svg
from .sweep import SweepRow, SweepSpec, SweepTable, harmonic_period, peak_window, sweep

__all__ = [
    "Scenario",
    "ScenarioId",
    "Series",
    "SweepRow",
    "SweepSpec",
    "SweepTable",
    "default_scenario",
    "harmonic_period",
    "peak_window",
    "read_csv",
    "render_svg",
    "run_scenario",
    "sweep",
    "write_csv",
]
