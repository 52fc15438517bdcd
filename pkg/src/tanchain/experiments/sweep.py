"""Deterministic maximal-fidelity sweeps over configuration grids."""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..dynamics import config_fingerprint, find_max_fidelity, gaussian_packet
from ..model import ChainConfig, build_hamiltonian
from ..spectral import SpectralData, diagonalize

__all__ = [
    "SweepSpec",
    "SweepRow",
    "SweepTable",
    "sweep",
    "run_point",
    "harmonic_period",
    "peak_window",
]

CONFIG_KEYS = ("lam", "b0", "l_eff", "n_half", "j_coupling", "potential", "hopping_ratio")
POINT_KEYS = CONFIG_KEYS + ("delta", "distance")


def harmonic_period(s: SpectralData, levels: int = 20) -> float:
    """``2 pi / omega`` with omega the mean spacing of the lowest levels."""
    k = min(levels, s.size - 1)
    omega = (s.energies[k] - s.energies[0]) / k
    return 2.0 * math.pi / omega


def peak_window(config: ChainConfig, s: SpectralData, mode: str) -> tuple[float, float]:
    """Search window for the first mirror arrival.

    ``"revival"`` brackets ``tau = 2 pi / B0`` as ``[tau/2, 3 tau/2]``.
    ``"harmonic"`` covers one period of the measured low-level spacing,
    ``[0, 2 pi / omega]``, which contains the first arrival at half a period.
    """
    if mode == "revival":
        tau = config.revival_time
        return 0.5 * tau, 1.5 * tau
    if mode == "harmonic":
        return 0.0, harmonic_period(s)
    raise ValueError(f"unknown window mode {mode!r}")


@dataclass(frozen=True)
class SweepSpec:
    """A list of grid points, each a set of overrides on ``base``.

    Recognised override keys are the :class:`ChainConfig` fields plus
    ``delta`` (packet width) and ``distance`` (transfer distance
    ``L = 2 N_A``). Keys absent from a point fall back to the spec defaults.
    """

    base: ChainConfig
    points: tuple[dict, ...]
    delta: float = 24.0
    distance: int = 400
    window: str = "revival"
    samples: int = 2000

    def __post_init__(self):
        if not self.points:
            raise ValueError("sweep grid is empty")
        for p in self.points:
            unknown = set(p) - set(POINT_KEYS)
            if unknown:
                raise ValueError(f"unknown sweep parameter(s): {sorted(unknown)}")
        object.__setattr__(self, "points", tuple(dict(p) for p in self.points))

    @classmethod
    def grid(cls, base: ChainConfig, name: str, values, **kwargs) -> "SweepSpec":
        """One-parameter grid."""
        return cls(base, tuple({name: v} for v in values), **kwargs)


@dataclass(frozen=True)
class SweepRow:
    params: tuple[tuple[str, object], ...]
    t_star: float
    f_star: float
    diagnostics: str = "ok"

    def param(self, key):
        return dict(self.params)[key]


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]
    fingerprint: str
    version: str = __version__
    meta: dict = field(default_factory=dict)

    @property
    def columns(self) -> list[str]:
        keys = [k for k, _ in self.rows[0].params] if self.rows else []
        return keys + ["t_star", "f_star", "diagnostics"]

    def as_rows(self) -> list[list]:
        return [[v for _, v in r.params] + [r.t_star, r.f_star, r.diagnostics] for r in self.rows]

    def column(self, key) -> np.ndarray:
        if key in ("t_star", "f_star"):
            return np.array([getattr(r, key) for r in self.rows], dtype=float)
        return np.array([r.param(key) for r in self.rows])


def _resolve(spec: SweepSpec, point: dict):
    overrides = {k: point[k] for k in CONFIG_KEYS if k in point}
    config = spec.base.replace(**overrides) if overrides else spec.base
    delta = float(point.get("delta", spec.delta))
    distance = int(point.get("distance", spec.distance))
    return config, delta, distance


def run_point(spec: SweepSpec, point: dict) -> SweepRow:
    """Maximal fidelity for one grid point; failures land in ``diagnostics``."""
    messages = []
    params: tuple = ()
    try:
        config, delta, distance = _resolve(spec, point)
        params = (
            ("lambda", config.lam),
            ("b0", config.b0),
            ("l_eff", float(config.l_eff)),
            ("n_half", config.n_half),
            ("delta", delta),
            ("distance", distance),
        )
        if distance % 2:
            raise ValueError(f"distance L = 2 N_A must be even, got {distance}")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            psi = gaussian_packet(config, distance // 2, delta)
        messages.extend(str(w.message) for w in caught)
        s = diagonalize(build_hamiltonian(config))
        window = peak_window(config, s, spec.window)
        t_star, f_star = find_max_fidelity(config, psi, window, spectral=s, samples=spec.samples)
    except Exception as exc:  # recorded per row, never aborts the sweep
        if not params:
            params = tuple((k, point[k]) for k in sorted(point))
        return SweepRow(params, math.nan, math.nan, f"error: {type(exc).__name__}: {exc}")
    return SweepRow(params, t_star, f_star, "; ".join(messages) or "ok")


def _task(args):
    spec, point = args
    return run_point(spec, point)


def sweep(spec: SweepSpec, workers: int | None = 1) -> SweepTable:
    """Run every grid point; rows follow the input order for any worker count."""
    if workers is None:
        workers = os.cpu_count() or 1
    tasks = [(spec, p) for p in spec.points]
    if workers <= 1 or len(tasks) == 1:
        rows = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_task, tasks))
    fp = config_fingerprint(
        spec.base,
        points=spec.points,
        delta=spec.delta,
        distance=spec.distance,
        window=spec.window,
        samples=spec.samples,
    )
    return SweepTable(tuple(rows), fp, meta={"window": spec.window, "samples": spec.samples})
