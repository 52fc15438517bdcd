"""Gaussian wave packets, time evolution and transfer fidelity.

Two propagators are provided. :func:`evolve_spectral` expands the state in
the eigenbasis and is the default. :func:`evolve_chebyshev` expands
``exp(-iHt)`` in Chebyshev polynomials of the rescaled Hamiltonian and never
touches the eigensolver, so the two can check each other.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import jv

from .errors import BoundaryTruncationError, ChebyshevBudgetError
from .model import ChainConfig, Hamiltonian, build_hamiltonian, reflect
from .spectral import SpectralData, diagonalize

__all__ = [
    "WavePacket",
    "FidelitySeries",
    "TruncationWarning",
    "width_to_alpha",
    "alpha_to_width",
    "gaussian_packet",
    "evolve_spectral",
    "evolve_chebyshev",
    "energy_expectation",
    "fidelity",
    "fidelity_series",
    "fidelity_function",
    "find_max_fidelity",
    "config_fingerprint",
]

SILENT_CLIP = 1e-10
MAX_CLIP = 1e-4


class TruncationWarning(UserWarning):
    """Packet weight clipped by the chain ends is small but not negligible."""


def width_to_alpha(delta: float) -> float:
    """``alpha = 2 sqrt(ln 2) / Delta``, where Delta is the FWHM of |psi|^2."""
    if not delta > 0:
        raise ValueError(f"packet width must be positive, got {delta}")
    return 2.0 * math.sqrt(math.log(2.0)) / delta


def alpha_to_width(alpha: float) -> float:
    return 2.0 * math.sqrt(math.log(2.0)) / alpha


@dataclass(frozen=True, eq=False)
class WavePacket:
    """Unit-norm single-magnon state on sites ``-N..N``.

    ``center`` and ``alpha`` describe the packet the state was prepared as;
    evolved states keep them so fidelity knows which mirror to target.
    """

    amplitudes: np.ndarray
    center: int
    alpha: float
    momentum: float = 0.0
    clipped_weight: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size % 2 == 0:
            raise ValueError(f"packet length must be odd, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def size(self) -> int:
        return self.amplitudes.size

    @property
    def width(self) -> float:
        return alpha_to_width(self.alpha)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _amplitudes(psi) -> np.ndarray:
    return psi.amplitudes if isinstance(psi, WavePacket) else np.asarray(psi, dtype=complex)


def _as_packet(psi, amps, t) -> WavePacket:
    if isinstance(psi, WavePacket):
        return replace(psi, amplitudes=amps, time=psi.time + t)
    return WavePacket(amps, center=0, alpha=math.nan, time=t)


def gaussian_packet(
    config: ChainConfig,
    center: int,
    delta: float | None = None,
    *,
    alpha: float | None = None,
    momentum: float = 0.0,
) -> WavePacket:
    """Normalized Gaussian ``exp[-alpha^2 (i - center)^2 / 2]`` on the chain.

    Give the width either as ``delta`` (FWHM of the probability) or as
    ``alpha``. ``momentum`` multiplies by ``exp(i k i)``; the default 0 gives
    the real, positive packet used throughout. Weight that would fall beyond
    the chain ends is discarded: below 1e-10 silently, up to 1e-4 with a
    :class:`TruncationWarning`, and above that the call fails.
    """
    if (delta is None) == (alpha is None):
        raise ValueError("give exactly one of delta or alpha")
    if alpha is None:
        alpha = width_to_alpha(delta)
    elif not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    center = int(center)
    n = config.n_half
    if abs(center) > n:
        raise ValueError(f"center {center} is off the chain (|i| <= {n})")

    sites = config.sites
    envelope = np.exp(-0.5 * alpha**2 * (sites - center) ** 2)
    # weight on an unbounded lattice, summed far enough out to be exact
    reach = int(math.ceil(40.0 / alpha)) + 1
    wide = np.arange(center - reach, center + reach + 1)
    total = float(np.sum(np.exp(-(alpha**2) * (wide - center) ** 2)))
    kept = float(np.sum(envelope**2))
    clipped = max(0.0, 1.0 - kept / total)
    if clipped > MAX_CLIP:
        raise BoundaryTruncationError(
            f"packet at {center} with alpha={alpha:.4g} loses {clipped:.3g} of its weight "
            f"to the chain ends (N={n})"
        )
    if clipped > SILENT_CLIP:
        warnings.warn(
            f"packet at {center} clipped by chain ends, lost weight {clipped:.3g}",
            TruncationWarning,
            stacklevel=2,
        )
    amps = envelope.astype(complex)
    if momentum:
        amps = amps * np.exp(1j * momentum * sites)
    amps /= np.linalg.norm(amps)
    return WavePacket(amps, center=center, alpha=float(alpha), momentum=momentum, clipped_weight=clipped)


def evolve_spectral(s: SpectralData, psi, t: float) -> WavePacket:
    """``sum_n exp(-i E_n t) <v_n|psi> v_n``."""
    amps = _amplitudes(psi)
    if amps.size != s.size:
        raise ValueError(f"state has {amps.size} sites, spectrum has {s.size}")
    coeffs = s.to_eigenbasis(amps)
    out = s.from_eigenbasis(np.exp(-1j * s.energies * t) * coeffs)
    return _as_packet(psi, out, t)


def _chebyshev_order(x: float, tol: float, max_order: int) -> np.ndarray:
    """Bessel coefficients ``J_k(x)`` up to the first one below ``tol``."""
    # J_k(x) decays super-exponentially once k exceeds x
    k_hi = int(x + 10.0 * x ** (1.0 / 3.0) + 30)
    while True:
        k = np.arange(min(k_hi, max_order + 1) + 1)
        coeffs = jv(k, x)
        small = np.flatnonzero((np.abs(coeffs) < tol) & (k > x))
        if small.size:
            return coeffs[: small[0] + 1]
        if k_hi > max_order:
            raise ChebyshevBudgetError(
                f"time step needs more than {max_order} Chebyshev terms (argument {x:.4g}); "
                "split the interval with steps > 1"
            )
        k_hi *= 2


def evolve_chebyshev(
    h: Hamiltonian,
    psi,
    t: float,
    *,
    steps: int = 1,
    tol: float = 1e-14,
    max_order: int = 20000,
    bounds: tuple[float, float] | None = None,
) -> WavePacket:
    """``exp(-iHt) psi`` by Chebyshev expansion.

    The spectrum is mapped into [-1, 1] using ``bounds`` (Gershgorin bounds
    by default). The series for each of the ``steps`` equal sub-steps is cut
    at the first Bessel coefficient below ``tol``.
    """
    amps = _amplitudes(psi)
    if amps.size != h.size:
        raise ValueError(f"state has {amps.size} sites, Hamiltonian has {h.size}")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    lo, hi = h.gershgorin_bounds() if bounds is None else bounds
    half_width = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    if t == 0 or half_width == 0:
        return _as_packet(psi, np.exp(-1j * mid * t) * amps, t)

    dt = t / steps
    coeffs = _chebyshev_order(abs(half_width * dt), tol, max_order)
    phase_k = (-1j * np.sign(dt)) ** np.arange(coeffs.size)
    weights = 2.0 * coeffs * phase_k
    weights[0] = coeffs[0]
    global_phase = np.exp(-1j * mid * dt)

    def scaled(x):
        return (h.matvec(x) - mid * x) / half_width

    state = amps.astype(complex)
    for _ in range(steps):
        prev = state
        curr = scaled(state)
        acc = weights[0] * prev + weights[1] * curr
        for w in weights[2:]:
            prev, curr = curr, 2.0 * scaled(curr) - prev
            acc += w * curr
        state = global_phase * acc
    return _as_packet(psi, state, t)


def energy_expectation(h: Hamiltonian, psi) -> float:
    amps = _amplitudes(psi)
    return float(np.vdot(amps, h.matvec(amps)).real)


def fidelity(psi_initial, psi_t) -> float:
    """Overlap magnitude of ``psi_t`` with the mirror image of ``psi_initial``."""
    a = _amplitudes(psi_initial)
    b = _amplitudes(psi_t)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return float(abs(np.vdot(reflect(a), b)))


def fidelity_function(s: SpectralData, psi):
    """Return ``F(t)`` evaluated in the eigenbasis at O(M) cost per time.

    The returned callable accepts a scalar or an array of times.
    """
    amps = _amplitudes(psi)
    source = s.to_eigenbasis(amps)
    target = s.to_eigenbasis(reflect(amps))
    weights = np.conj(target) * source
    energies = s.energies

    def f(t):
        t_arr = np.asarray(t, dtype=float)
        if t_arr.ndim == 0:
            return float(abs(np.dot(np.exp(-1j * energies * float(t_arr)), weights)))
        return np.array([abs(np.dot(np.exp(-1j * energies * x), weights)) for x in t_arr])

    return f


def config_fingerprint(config: ChainConfig, **extra) -> str:
    """Short hash of the resolved configuration plus any extra settings."""
    items = config.as_items() + sorted((k, repr(v)) for k, v in extra.items())
    text = "\n".join(f"{k} = {v}" for k, v in items)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class FidelitySeries:
    """Fidelity sampled on a time grid, with conservation diagnostics.

    ``norms`` and ``energies`` are recomputed from the site-basis state at
    each sample, independently of the eigenbasis bookkeeping.
    """

    times: np.ndarray
    values: np.ndarray
    norms: np.ndarray
    energies: np.ndarray
    fingerprint: str
    meta: dict = field(default_factory=dict)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.values.tolist()))

    def __len__(self):
        return self.times.size

    def max_norm_error(self) -> float:
        return float(np.max(np.abs(self.norms - 1.0))) if len(self) else 0.0

    def max_energy_drift(self) -> float:
        if not len(self):
            return 0.0
        ref = abs(self.energies[0]) or 1.0
        return float(np.max(np.abs(self.energies - self.energies[0])) / ref)


def fidelity_series(
    config: ChainConfig,
    psi,
    t_grid,
    *,
    spectral: SpectralData | None = None,
    batch: int = 256,
) -> FidelitySeries:
    """Fidelity at each time of a strictly increasing grid.

    One diagonalization is shared by all times. Each ``F(t)`` depends only on
    ``t``, so refining the grid leaves common samples bit-identical.
    """
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1:
        raise ValueError("time grid must be one-dimensional")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValueError("time grid must be strictly increasing")
    h = spectral.hamiltonian if spectral is not None and spectral.hamiltonian is not None else build_hamiltonian(config)
    s = spectral if spectral is not None else diagonalize(h)
    amps = _amplitudes(psi)

    values = fidelity_function(s, amps)(times) if times.size else np.empty(0)
    coeffs = s.to_eigenbasis(amps)
    norms = np.empty(times.size)
    energies = np.empty(times.size)
    for start in range(0, times.size, batch):
        chunk = times[start : start + batch]
        states = s.eigenvectors @ (np.exp(-1j * np.outer(s.energies, chunk)) * coeffs[:, None])
        norms[start : start + batch] = np.linalg.norm(states, axis=0)
        energies[start : start + batch] = np.einsum("ij,ij->j", states.conj(), h.matvec(states)).real

    meta = {}
    if isinstance(psi, WavePacket):
        meta = {"center": psi.center, "alpha": psi.alpha, "delta": psi.width, "clipped_weight": psi.clipped_weight}
    fp = config_fingerprint(config, **meta)
    return FidelitySeries(times, values, norms, energies, fp, meta)


def find_max_fidelity(
    config: ChainConfig,
    psi,
    window: tuple[float, float],
    *,
    spectral: SpectralData | None = None,
    samples: int = 2000,
    resolution: float | None = None,
) -> tuple[float, float]:
    """Locate the largest fidelity inside ``window``.

    A coarse scan at ``(t_hi - t_lo) / samples`` is refined by a bounded
    Brent search on the two coarse cells around the best sample, down to
    ``resolution`` (default ``1e-6 tau``; ``1e-6`` of the window for a
    field-free chain).
    """
    t_lo, t_hi = map(float, window)
    if not t_lo < t_hi:
        raise ValueError(f"empty window ({t_lo}, {t_hi})")
    s = spectral if spectral is not None else diagonalize(build_hamiltonian(config))
    f = fidelity_function(s, psi)

    grid = np.linspace(t_lo, t_hi, samples + 1)
    coarse = f(grid)
    k = int(np.argmax(coarse))
    best_t, best_f = float(grid[k]), float(coarse[k])

    if resolution is None:
        tau = config.revival_time
        resolution = 1e-6 * (tau if math.isfinite(tau) else t_hi - t_lo)
    a = float(grid[max(k - 1, 0)])
    b = float(grid[min(k + 1, samples)])
    res = minimize_scalar(lambda x: -f(x), bounds=(a, b), method="bounded", options={"xatol": resolution})
    if res.success and -res.fun > best_f:
        best_t, best_f = float(res.x), float(-res.fun)
    return best_t, best_f
