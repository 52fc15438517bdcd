"""Eigendecomposition, level spacings, parities and spectrum-parity diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import ConvergenceError
from .model import Hamiltonian, reflect

__all__ = [
    "SpectralData",
    "SpmcReport",
    "diagonalize",
    "level_spacings",
    "eigenstate_parity",
    "spmc_check",
]

PARITY_THRESHOLD = 0.99
RESIDUAL_TOL = 1e-10
ORTHO_TOL = 1e-10
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Full eigensystem of a chain Hamiltonian.

    Attributes
    ----------
    energies : ndarray, shape (M,)
        Ascending eigenvalues.
    eigenvectors : ndarray, shape (M, M)
        Orthonormal real eigenvectors; column ``n`` pairs with ``energies[n]``.
    parities : ndarray of int, shape (M,)
        +1 / -1 under site reflection, 0 where the level is indeterminate.
    parity_confidence : ndarray, shape (M,)
        ``|sum_i v_i v_{-i}|`` for each level.
    """

    energies: np.ndarray
    eigenvectors: np.ndarray
    parities: np.ndarray
    parity_confidence: np.ndarray
    hamiltonian: Hamiltonian | None = None

    @property
    def size(self) -> int:
        return self.energies.size

    def to_eigenbasis(self, psi) -> np.ndarray:
        return self.eigenvectors.T @ np.asarray(psi)

    def from_eigenbasis(self, coeffs) -> np.ndarray:
        return self.eigenvectors @ np.asarray(coeffs)


@dataclass(frozen=True)
class SpmcReport:
    """Outcome of :func:`spmc_check`.

    ``fit_coefficients`` is always ``(c2, c1, c0)``; ``c2`` is zero for the
    linear model.
    """

    model: str
    n_max: int
    fit_coefficients: tuple[float, float, float]
    max_relative_residual: float
    parity_alternation_ok: bool
    quadratic_extent: int
    tolerance: float


def eigenstate_parity(v, threshold: float = PARITY_THRESHOLD) -> tuple[int, float]:
    """Reflection parity of a unit vector.

    Returns ``(sign, confidence)`` with ``confidence = |<v, P v>|``. ``sign`` is
    0 when the confidence does not exceed ``threshold``.
    """
    v = np.asarray(v)
    norm2 = float(np.vdot(v, v).real)
    if norm2 == 0.0:
        raise ValueError("parity of a zero vector is undefined")
    overlap = np.vdot(v, reflect(v)).real / norm2
    confidence = min(abs(overlap), 1.0)
    if confidence <= threshold:
        return 0, confidence
    return (1 if overlap > 0 else -1), confidence


def _symmetrize_clusters(energies, vectors):
    """Re-orthogonalize near-degenerate clusters into parity eigenstates."""
    scale = max(float(np.max(np.abs(energies))), 1.0)
    gaps = np.diff(energies)
    start = 0
    for k in range(1, energies.size + 1):
        if k < energies.size and gaps[k - 1] < DEGENERACY_TOL * scale:
            continue
        if k - start > 1:
            block, _ = np.linalg.qr(vectors[:, start:k])
            # P restricted to the cluster is symmetric; its eigenvectors have definite parity
            p_block = block.T @ block[::-1, :]
            _, rot = np.linalg.eigh(0.5 * (p_block + p_block.T))
            vectors[:, start:k] = block @ rot
        start = k
    return vectors


def diagonalize(h: Hamiltonian, parity_threshold: float = PARITY_THRESHOLD) -> SpectralData:
    """Eigenvalues and eigenvectors of a tridiagonal Hamiltonian.

    Every eigenpair is checked against the residual bound
    ``||H v - E v|| <= 1e-10 max|E|`` and the set against orthonormality.
    """
    d, e = h.diagonal, h.off_diagonal
    if h.size == 1:
        energies = d.copy()
        vectors = np.ones((1, 1))
    else:
        try:
            energies, vectors = eigh_tridiagonal(d, e, lapack_driver="stev")
        except LinAlgError as exc:
            raise ConvergenceError(f"tridiagonal eigensolver failed: {exc}") from exc
    vectors = _symmetrize_clusters(energies, np.array(vectors))

    scale = max(float(np.max(np.abs(energies))), np.finfo(float).tiny)
    residual = np.linalg.norm(h.matvec(vectors) - vectors * energies, axis=0)
    bad = np.flatnonzero(residual > RESIDUAL_TOL * scale)
    if bad.size:
        n = int(bad[0])
        raise ConvergenceError(
            f"level {n} (E={energies[n]:.6g}) residual {residual[n]:.3g} exceeds tolerance"
        )
    gram = vectors.T @ vectors
    np.fill_diagonal(gram, np.diag(gram) - 1.0)
    worst = float(np.max(np.abs(gram)))
    if worst > ORTHO_TOL:
        n = int(np.unravel_index(np.argmax(np.abs(gram)), gram.shape)[0])
        raise ConvergenceError(f"level {n} loses orthogonality ({worst:.3g})")

    overlaps = np.einsum("ij,ij->j", vectors, vectors[::-1, :])
    confidence = np.minimum(np.abs(overlaps), 1.0)
    parities = np.where(confidence > parity_threshold, np.sign(overlaps), 0).astype(int)

    for arr in (energies, vectors, parities, confidence):
        arr.setflags(write=False)
    return SpectralData(energies, vectors, parities, confidence, h)


def level_spacings(s) -> np.ndarray:
    """``D(n) = E_{n+1} - E_n``.

    Accepts :class:`SpectralData` or a plain array of ascending energies.
    """
    energies = s.energies if isinstance(s, SpectralData) else np.asarray(s, dtype=float)
    if energies.size < 2:
        raise ValueError("need at least two levels for spacings")
    return np.diff(energies)


def _fit_residual(n, energies, degree):
    coeffs = np.polynomial.polynomial.polyfit(n, energies, degree)
    fitted = np.polynomial.polynomial.polyval(n, coeffs)
    mean_spacing = (energies[-1] - energies[0]) / (energies.size - 1)
    if mean_spacing <= 0:
        return coeffs, np.inf
    return coeffs, float(np.max(np.abs(energies - fitted)) / mean_spacing)


def spmc_check(
    s,
    n_max: int,
    model: str = "quadratic",
    tolerance: float = 1e-2,
    parities=None,
    parity_confidence=None,
    parity_threshold: float = PARITY_THRESHOLD,
) -> SpmcReport:
    """Fit the low spectrum to a polynomial in the level index.

    Levels ``0..n_max`` are fitted by least squares to ``c2 n^2 + c1 n + c0``
    (quadratic) or ``c1 n + c0`` (linear). Residuals are measured in units of
    the mean level spacing of the window. ``quadratic_extent`` is the last
    window end ``k`` reached by growing ``0..k`` before the residual first
    exceeds ``tolerance``.

    ``s`` may be :class:`SpectralData` or an array of energies; in the latter
    case parities can be supplied separately.
    """
    if isinstance(s, SpectralData):
        energies = s.energies
        parities = s.parities if parities is None else parities
        parity_confidence = s.parity_confidence if parity_confidence is None else parity_confidence
    else:
        energies = np.asarray(s, dtype=float)
    if model not in ("quadratic", "linear"):
        raise ValueError(f"model must be 'quadratic' or 'linear', got {model!r}")
    degree = 2 if model == "quadratic" else 1
    if n_max < degree:
        raise ValueError(f"n_max must be >= {degree} for the {model} model")
    if n_max > energies.size - 1:
        raise ValueError(f"n_max={n_max} exceeds the number of levels - 1")

    n = np.arange(n_max + 1, dtype=float)
    coeffs, residual = _fit_residual(n, energies[: n_max + 1], degree)
    c = np.zeros(3)
    c[: degree + 1] = coeffs

    extent = degree
    for k in range(degree + 1, n_max + 1):
        _, r = _fit_residual(n[: k + 1], energies[: k + 1], degree)
        if r > tolerance:
            break
        extent = k

    alternation = False
    if parities is not None:
        p = np.asarray(parities)[: n_max + 1]
        ok = np.all(p != 0)
        if parity_confidence is not None:
            ok = ok and np.all(np.asarray(parity_confidence)[: n_max + 1] > parity_threshold)
        alternation = bool(ok and np.all(p[1:] == -p[:-1]))

    return SpmcReport(
        model=model,
        n_max=n_max,
        fit_coefficients=(float(c[2]), float(c[1]), float(c[0])),
        max_relative_residual=residual,
        parity_alternation_ok=alternation,
        quadratic_extent=extent,
        tolerance=tolerance,
    )
