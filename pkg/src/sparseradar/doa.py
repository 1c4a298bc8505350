"""Classical DoA baselines: windowed delay-and-sum, MUSIC with AIC model
order selection, and the prominence-based peak finder shared project-wide.

MUSIC runs on a single snapshot per range bin, so the covariance is rebuilt
by forward-backward spatial smoothing; sparse layouts are first resampled
onto a virtual uniform grid spanning the same aperture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ShapeError
from .features import CovarianceMatrix, steering_matrix
from .geometry import AngleGrid, DomainError
from .rdproc import window_vector


@dataclass
class PeakSet:
    """Detected peaks of a 1-D spectrum, indices strictly increasing."""

    indices: np.ndarray
    heights: np.ndarray
    prominences: np.ndarray

    def __len__(self) -> int:
        return self.indices.size


def find_peaks(spectrum, min_prominence: float = 0.0, min_height: float = -np.inf) -> PeakSet:
    """Interior local maxima filtered by prominence and height.

    Plateaus report their left-center index. Prominence is the topographic
    definition: height minus the higher of the two valley minima toward the
    nearest higher-or-equal sample (or the array end) on each side.
    """
    x = np.ascontiguousarray(spectrum, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError("spectrum must be finite")
    idx, prom = backend.peak_scan(x)
    keep = (prom >= min_prominence) & (x[idx] >= min_height)
    idx = idx[keep]
    return PeakSet(indices=idx, heights=x[idx], prominences=prom[keep])


def das_windowed(s_if_row, array, grid: AngleGrid, wavelength: float, window: str = "hann") -> np.ndarray:
    """|DaS spectrum| with a taper applied as the steering weights."""
    positions = np.asarray(getattr(array, "positions", array), dtype=float)
    row = np.asarray(s_if_row)
    if row.shape != positions.shape:
        raise ShapeError("row length does not match the array")
    w = window_vector(window, positions.size)
    v = steering_matrix(positions, grid, wavelength, weights=w)
    return np.abs(row @ v.v)


def resample_to_ula(s_if_row, positions, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Interpolate a sparse-array snapshot onto a uniform grid spanning the
    same aperture (real and imaginary parts separately)."""
    pos = np.asarray(positions, dtype=float)
    row = np.asarray(s_if_row, dtype=np.complex128)
    if n is None:
        n = pos.size
    grid = np.linspace(pos[0], pos[-1], n)
    re = np.interp(grid, pos, row.real)
    im = np.interp(grid, pos, row.imag)
    return re + 1j * im, grid


def smoothed_covariance(s_if_row, subarray_length: int) -> CovarianceMatrix:
    """Forward-backward spatially smoothed covariance from one snapshot.

    Averages the outer products of all contiguous length-L subarrays plus
    their exchanged conjugates, then Frobenius-normalizes. The input must be
    uniformly laid out (resample sparse rows first).
    """
    x = np.asarray(s_if_row, dtype=np.complex128)
    n = x.size
    L = int(subarray_length)
    if not 1 <= L <= n:
        raise ShapeError(f"subarray length {L} outside [1, {n}]")
    n_sub = n - L + 1
    sigma = np.zeros((L, L), dtype=np.complex128)
    for s in range(n_sub):
        seg = x[s : s + L]
        sigma += np.outer(seg, seg.conj())
    sigma /= n_sub
    sigma = 0.5 * (sigma + sigma[::-1, ::-1].conj())  # backward term via exchange
    norm = np.linalg.norm(sigma)
    if norm == 0.0:
        return CovarianceMatrix(sigma=sigma, degenerate=True)
    return CovarianceMatrix(sigma=sigma / norm)


def default_subarray_length(n_v: int) -> int:
    return int(np.ceil(2 * n_v / 3))


def effective_snapshots(n_v: int, subarray_length: int) -> int:
    """Snapshot count the smoothing is worth for model-order selection.

    Overlapping subarrays of one snapshot are strongly correlated; feeding
    their raw count into AIC makes it overestimate the order badly. Only the
    non-overlapping subarrays count as independent looks, doubled by the
    forward-backward conjugate pair.
    """
    return 2 * (n_v // subarray_length)


@dataclass
class EigenDecomposition:
    """Hermitian eigendecomposition, eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns match eigenvalues


def eigendecompose(cov: CovarianceMatrix | np.ndarray) -> EigenDecomposition:
    sigma = cov.sigma if isinstance(cov, CovarianceMatrix) else np.asarray(cov)
    vals, vecs = np.linalg.eigh(sigma)
    return EigenDecomposition(eigenvalues=vals[::-1].copy(), eigenvectors=vecs[:, ::-1].copy())


def aic_order(eigs: EigenDecomposition, n_snapshots: int) -> int:
    """Akaike information criterion source count from covariance eigenvalues.

    AIC(k) = 2 N (M - k) log(arith mean / geom mean of the M - k smallest
    eigenvalues) + 2 k (2 M - k); the estimate is the minimizing k. Negative
    eigenvalues are clamped to a tiny positive value before the logs.
    """
    lam = np.asarray(eigs.eigenvalues, dtype=float)
    m = lam.size
    if m < 2 or n_snapshots < 1:
        raise DomainError("need at least two eigenvalues and one snapshot")
    if lam[0] <= 0.0:
        return 0
    lam = np.maximum(lam, 1e-15 * lam[0])
    aic = np.empty(m - 1)
    for k in range(m - 1):
        tail = lam[k:]
        log_ratio = np.log(tail.mean()) - np.log(tail).mean()
        aic[k] = 2.0 * n_snapshots * (m - k) * log_ratio + 2.0 * k * (2 * m - k)
    return int(np.argmin(aic))


def music_spectrum(
    cov: CovarianceMatrix | np.ndarray,
    positions,
    k: int,
    grid: AngleGrid,
    wavelength: float,
) -> np.ndarray:
    """MUSIC pseudo-spectrum 1 / ||E_n^H a(u)||^2, normalized to max 1.

    ``positions`` are the element coordinates the covariance refers to (the
    subarray grid when spatial smoothing was used)."""
    sigma = cov.sigma if isinstance(cov, CovarianceMatrix) else np.asarray(cov)
    m = sigma.shape[0]
    pos = np.asarray(positions, dtype=float)
    if pos.size != m:
        raise ShapeError("positions must match the covariance size")
    if not 1 <= k < m:
        raise DomainError(f"source count k={k} must lie in [1, {m - 1}]")
    eigs = eigendecompose(sigma)
    noise = eigs.eigenvectors[:, k:]
    a = steering_matrix(pos, grid, wavelength).v  # (m, n_theta)
    denom = np.sum(np.abs(noise.conj().T @ a) ** 2, axis=0)
    denom = np.maximum(denom, 1e-300)
    p = 1.0 / denom
    return p / p.max()


def music_from_row(
    s_if_row,
    positions,
    grid: AngleGrid,
    wavelength: float,
    subarray_length: int | None = None,
    k: int | None = None,
) -> tuple[np.ndarray, int]:
    """Full single-snapshot MUSIC chain: virtual-ULA resampling, FB spatial
    smoothing, AIC model order (unless forced), pseudo-spectrum.

    Returns the spectrum and the model order used. A degenerate (all-zero)
    row yields a zero spectrum and order 0.
    """
    row, ula = resample_to_ula(s_if_row, positions)
    L = subarray_length or default_subarray_length(row.size)
    cov = smoothed_covariance(row, L)
    if cov.degenerate:
        return np.zeros(grid.n_theta), 0
    if k is None:
        # Order estimation wants many independent subarrays, the spectrum
        # wants a long subarray; use a shorter smoothing just for AIC.
        l_aic = max(3, row.size // 4)
        cov_aic = smoothed_covariance(row, l_aic)
        eigs = eigendecompose(cov_aic)
        k = aic_order(eigs, effective_snapshots(row.size, l_aic))
        k = min(max(k, 1), L - 1)
    return music_spectrum(cov, ula[:L], k, grid, wavelength), k
