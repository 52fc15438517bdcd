"""Chain configuration, confining potentials and the single-magnon Hamiltonian.

Sites are labelled ``i = -N..N`` and stored in arrays at position ``i + N``.
Energies are in units of the exchange coupling ``J`` and times in ``1/J``
(hbar = 1).

In the one-flip sector the chain reduces to a tight-binding model::

    H = -t sum_i (|i><i+1| + h.c.) + sum_i V(i) |i><i|

with on-site potential ``V(i) = B0 tan^2(pi i / L_eff)`` and
``B0 = 2 lambda J pi^2 / L_eff^2``. The hopping amplitude is
``t = hopping_ratio * J``. The default ``hopping_ratio = 1`` gives the band
``-2J cos k``, which is the one consistent with the reported spacing ``B0``
per level at lambda = 1 and the harmonic spacing ``2 sqrt(2 lambda) J pi^2 /
L_eff^2``; ``hopping_ratio = 0.5`` gives the ``-J cos k`` band.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigError, SingularityError

__all__ = [
    "PotentialKind",
    "ChainConfig",
    "Hamiltonian",
    "derive_b0",
    "derive_lambda",
    "default_n_half",
    "potential_at",
    "build_hamiltonian",
    "analytic_energy",
    "analytic_constant",
    "analytic_strong_field_energy",
    "reflect",
]


class PotentialKind(str, enum.Enum):
    TANGENT = "tangent"
    PARABOLIC = "parabolic"
    ZERO = "zero"


def derive_b0(lam: float, l_eff: float, j: float = 1.0) -> float:
    """Field amplitude ``B0 = 2 lambda J pi^2 / L_eff^2``."""
    if lam < 0 or not j > 0 or not l_eff > 0:
        raise InvalidConfigError(
            f"derive_b0 needs lambda >= 0, J > 0, L_eff > 0 (got {lam}, {j}, {l_eff})"
        )
    return 2.0 * lam * j * math.pi**2 / l_eff**2


def derive_lambda(b0: float, l_eff: float, j: float = 1.0) -> float:
    """Inverse of :func:`derive_b0`."""
    if b0 < 0 or not j > 0 or not l_eff > 0:
        raise InvalidConfigError(
            f"derive_lambda needs B0 >= 0, J > 0, L_eff > 0 (got {b0}, {j}, {l_eff})"
        )
    return b0 * l_eff**2 / (2.0 * j * math.pi**2)


def default_n_half(l_eff: float) -> int:
    """Largest half-length whose sites all stay inside the tan^2 poles."""
    return math.ceil(l_eff / 2) - 1


@dataclass(frozen=True)
class ChainConfig:
    """Physical parameters of one chain.

    Give either ``lam`` or ``b0``; the other is derived. Giving both is
    allowed only when they agree to 1e-12 relative. ``n_half`` defaults to
    the largest chain that avoids the tan^2 singularity.

    Parameters
    ----------
    l_eff : float
        Effective length (confinement scale), in sites.
    lam : float, optional
        Dimensionless field strength lambda.
    b0 : float, optional
        Field amplitude in units of J.
    j_coupling : float
        Exchange coupling J (the energy unit).
    n_half : int, optional
        Chain half-length N; the chain has 2N + 1 sites.
    potential : PotentialKind
        Shape of the on-site potential.
    hopping_ratio : float
        Hopping amplitude in units of J.
    """

    l_eff: float
    lam: float | None = None
    b0: float | None = None
    j_coupling: float = 1.0
    n_half: int | None = None
    potential: PotentialKind = PotentialKind.TANGENT
    hopping_ratio: float = 1.0

    def __post_init__(self):
        try:
            potential = PotentialKind(self.potential)
        except ValueError:
            raise InvalidConfigError(f"unknown potential kind {self.potential!r}") from None
        object.__setattr__(self, "potential", potential)

        if not (math.isfinite(self.l_eff) and self.l_eff > 2):
            raise InvalidConfigError(f"l_eff must be > 2, got {self.l_eff}")
        if not (math.isfinite(self.j_coupling) and self.j_coupling > 0):
            raise InvalidConfigError(f"j_coupling must be > 0, got {self.j_coupling}")
        if not (math.isfinite(self.hopping_ratio) and self.hopping_ratio > 0):
            raise InvalidConfigError(f"hopping_ratio must be > 0, got {self.hopping_ratio}")

        lam, b0 = self.lam, self.b0
        if lam is None and b0 is None:
            if potential is not PotentialKind.ZERO:
                raise InvalidConfigError("one of lam or b0 is required")
            lam = b0 = 0.0
        elif b0 is None:
            if not lam > 0:
                raise InvalidConfigError(f"lambda must be > 0, got {lam}")
            b0 = derive_b0(lam, self.l_eff, self.j_coupling)
        elif lam is None:
            if not b0 > 0:
                raise InvalidConfigError(f"b0 must be > 0, got {b0}")
            lam = derive_lambda(b0, self.l_eff, self.j_coupling)
        else:
            if potential is not PotentialKind.ZERO and not (lam > 0 and b0 > 0):
                raise InvalidConfigError(f"lambda and b0 must be > 0, got {lam}, {b0}")
            expected = derive_b0(lam, self.l_eff, self.j_coupling)
            if not math.isclose(b0, expected, rel_tol=1e-12, abs_tol=0.0):
                raise InvalidConfigError(
                    f"b0={b0!r} disagrees with lambda={lam!r} (expected b0={expected!r})"
                )
        object.__setattr__(self, "lam", float(lam))
        object.__setattr__(self, "b0", float(b0))

        n_max = default_n_half(self.l_eff)
        n_half = n_max if self.n_half is None else self.n_half
        if isinstance(n_half, float) and not n_half.is_integer():
            raise InvalidConfigError(f"n_half must be an integer, got {n_half}")
        n_half = int(n_half)
        if n_half < 1:
            raise InvalidConfigError(f"n_half must be >= 1, got {n_half}")
        if n_half > n_max:
            raise InvalidConfigError(
                f"n_half={n_half} reaches the tan^2 pole; at most {n_max} for l_eff={self.l_eff}"
            )
        object.__setattr__(self, "n_half", n_half)

    @property
    def eta(self) -> float:
        return 1.0 / self.l_eff

    @property
    def size(self) -> int:
        return 2 * self.n_half + 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.n_half, self.n_half + 1)

    @property
    def hopping(self) -> float:
        """Magnitude of the nearest-neighbour hopping amplitude."""
        return self.hopping_ratio * self.j_coupling

    @property
    def revival_time(self) -> float:
        """``tau = 2 pi / B0``; infinite for a field-free chain."""
        return 2.0 * math.pi / self.b0 if self.b0 > 0 else math.inf

    def replace(self, **changes) -> "ChainConfig":
        """Copy with changes; switching lam/b0 drops the other derived value."""
        values = {
            "l_eff": self.l_eff,
            "lam": self.lam,
            "b0": self.b0,
            "j_coupling": self.j_coupling,
            "n_half": self.n_half,
            "potential": self.potential,
            "hopping_ratio": self.hopping_ratio,
        }
        if "lam" in changes and "b0" not in changes:
            values["b0"] = None
        if "b0" in changes and "lam" not in changes:
            values["lam"] = None
        if "l_eff" in changes and "n_half" not in changes:
            values["n_half"] = None
        if ("l_eff" in changes or "j_coupling" in changes) and not (
            "lam" in changes or "b0" in changes
        ):
            # keep lambda fixed, recompute B0
            values["b0"] = None
        values.update(changes)
        if values["lam"] == 0.0 and values["b0"] in (0.0, None):
            values["lam"] = values["b0"] = None
        return ChainConfig(**values)

    def as_items(self) -> list[tuple[str, str]]:
        """Resolved parameters as ``(key, text)`` pairs, keys matching CLI flags."""
        return [
            ("j", repr(self.j_coupling)),
            ("lambda", repr(self.lam)),
            ("b0", repr(self.b0)),
            ("l-eff", repr(float(self.l_eff))),
            ("n-half", str(self.n_half)),
            ("potential", self.potential.value),
            ("hopping-ratio", repr(self.hopping_ratio)),
        ]


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Real symmetric tridiagonal matrix over sites ``-N..N``."""

    diagonal: np.ndarray
    off_diagonal: np.ndarray
    config: ChainConfig | None = field(default=None, repr=False)

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=float)
        e = np.array(self.off_diagonal, dtype=float)
        if d.ndim != 1 or e.ndim != 1 or e.size != max(d.size - 1, 0) or d.size == 0:
            raise ValueError(f"inconsistent tridiagonal shapes {d.shape}, {e.shape}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("Hamiltonian entries must be finite")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "off_diagonal", e)

    @property
    def size(self) -> int:
        return self.diagonal.size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """``H @ x`` for a vector or a stack of column vectors."""
        x = np.asarray(x)
        d, e = self.diagonal, self.off_diagonal
        if x.ndim == 2:
            d, e = d[:, None], e[:, None]
        y = d * x
        y[:-1] += e * x[1:]
        y[1:] += e * x[:-1]
        return y

    def to_dense(self) -> np.ndarray:
        return (
            np.diag(self.diagonal)
            + np.diag(self.off_diagonal, 1)
            + np.diag(self.off_diagonal, -1)
        )

    def reflected(self) -> "Hamiltonian":
        """``P H P`` with ``P`` the site reflection ``i -> -i``."""
        return Hamiltonian(self.diagonal[::-1], self.off_diagonal[::-1], self.config)

    def gershgorin_bounds(self) -> tuple[float, float]:
        """Interval containing the whole spectrum, from row sums."""
        radius = np.zeros(self.size)
        a = np.abs(self.off_diagonal)
        radius[:-1] += a
        radius[1:] += a
        return float(np.min(self.diagonal - radius)), float(np.max(self.diagonal + radius))


def potential_at(config: ChainConfig, i):
    """On-site potential energy at site(s) ``i``.

    Constant offsets of the field are dropped. The parabolic kind is the
    quadratic Taylor term ``B0 (pi i / L_eff)^2`` of the tangent potential.
    Accepts a scalar or an integer array and returns the same shape.
    """
    i_arr = np.asarray(i)
    a = np.abs(i_arr)
    if np.any(a > config.n_half):
        raise ValueError(f"site index outside chain |i| <= {config.n_half}")
    kind = config.potential
    if kind is PotentialKind.ZERO:
        out = np.zeros(a.shape, dtype=float)
    elif kind is PotentialKind.TANGENT:
        if np.any(a >= config.l_eff / 2):
            raise SingularityError(f"|i| >= L_eff/2 = {config.l_eff / 2}")
        # evaluating on |i| keeps the potential exactly even
        out = config.b0 * np.tan(math.pi * a / config.l_eff) ** 2
    else:
        out = config.b0 * (math.pi * a / config.l_eff) ** 2
    return float(out) if np.ndim(i) == 0 else out


def build_hamiltonian(config: ChainConfig) -> Hamiltonian:
    """Effective single-magnon Hamiltonian with open boundaries."""
    diag = potential_at(config, config.sites)
    off = np.full(config.size - 1, -config.hopping)
    return Hamiltonian(diag, off, config)


def _mu(lam: float) -> float:
    return 0.25 * (math.sqrt(8.0 * lam + 1.0) - 1.0)


def analytic_energy(config: ChainConfig, n: int) -> float:
    """Continuum tan^2 level ``J pi^2 eta^2 (n^2 + 4 mu n)`` without its constant.

    ``mu = (sqrt(8 lambda + 1) - 1) / 4``. For lambda = 1 this is
    ``n (n + 2) B0 / 2``. The formula's labels start at ``n = 1`` for the
    ground state, so level ``m`` of a numerical spectrum (0-based)
    corresponds to ``n = m + 1``.
    """
    if config.potential is not PotentialKind.TANGENT:
        raise InvalidConfigError("analytic_energy applies to the tangent potential only")
    if n < 0:
        raise ValueError(f"level index must be >= 0, got {n}")
    scale = config.j_coupling * math.pi**2 * config.eta**2
    return scale * (n * n + 4.0 * _mu(config.lam) * n)


def analytic_constant(config: ChainConfig) -> float:
    """The constant ``C`` that accompanies :func:`analytic_energy`.

    Reported as printed (with its own ``J pi^2 eta^2`` prefactor); it drops
    out of every spacing and is never used for comparisons.
    """
    return config.j_coupling * math.pi**2 * config.eta**2 * (math.sqrt(8.0 * config.lam + 1.0) - 1.0)


def analytic_strong_field_energy(config: ChainConfig, n) -> float:
    """Harmonic-limit level ``2 sqrt(2 lambda) J pi^2 eta^2 n``."""
    return 2.0 * math.sqrt(2.0 * config.lam) * config.j_coupling * math.pi**2 * config.eta**2 * n


def reflect(v) -> np.ndarray:
    """Move the amplitude at site ``i`` to site ``-i``."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size % 2 == 0:
        raise ValueError(f"reflect needs an odd-length vector, got shape {v.shape}")
    return v[::-1].copy()
