"""Network input features: steering matrix, delay-and-sum spectra, the
normalized single-snapshot covariance, and the 5-plane feature image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rdproc
from .errors import ShapeError
from .geometry import AngleGrid, VirtualArray


@dataclass
class SteeringMatrix:
    """V[m, n] = w_m * exp(-j 2 pi / lambda * u_n * x_m), shape (n_v, n_theta)."""

    v: np.ndarray
    weights: np.ndarray
    grid: AngleGrid
    wavelength: float


def steering_matrix(array, grid: AngleGrid, wavelength: float, weights=None) -> SteeringMatrix:
    """Steering matrix for an arbitrary 1-D element layout.

    ``array`` may be a VirtualArray or a plain position vector. All-ones
    weights by default; a taper vector of length n_v applies per element.
    """
    positions = np.asarray(getattr(array, "positions", array), dtype=float)
    if weights is None:
        w = np.ones(positions.size)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != positions.shape:
            raise ShapeError("weights length must equal the element count")
    phase = -2j * np.pi / wavelength * np.outer(positions, grid.u_values)
    return SteeringMatrix(v=w[:, None] * np.exp(phase), weights=w, grid=grid, wavelength=wavelength)


def das_spectrum(s_if_row: np.ndarray, v: SteeringMatrix | np.ndarray) -> np.ndarray:
    """Delay-and-sum beamforming of one range bin: i_s = S_IF(r) V."""
    mat = v.v if isinstance(v, SteeringMatrix) else v
    row = np.asarray(s_if_row)
    if row.shape != (mat.shape[0],):
        raise ShapeError(f"row length {row.shape} does not match steering matrix {mat.shape}")
    return row @ mat


@dataclass
class CovarianceMatrix:
    """Frobenius-normalized snapshot covariance; all-zero input is flagged
    degenerate and yields the zero matrix."""

    sigma: np.ndarray
    degenerate: bool = False


def covariance(s_if_row: np.ndarray) -> CovarianceMatrix:
    x = np.asarray(s_if_row, dtype=np.complex128)
    outer = np.outer(x, x.conj())
    norm = np.linalg.norm(outer)
    if norm == 0.0:
        return CovarianceMatrix(sigma=outer, degenerate=True)
    return CovarianceMatrix(sigma=outer / norm)


def crop_size(n_v: int, n_theta: int) -> int:
    """Largest K <= n_v whose packed upper triangle fits into n_theta."""
    k = int((np.sqrt(8.0 * n_theta + 1.0) - 1.0) // 2)
    return min(n_v, k)


def cov_feature(cov: CovarianceMatrix | np.ndarray, n_theta: int) -> np.ndarray:
    """Upper triangle of the covariance, unrolled row-major and zero-padded.

    If the packed triangle exceeds n_theta, the largest centered K x K block
    with K (K + 1) / 2 <= n_theta is cropped out first (equal margins on both
    ends, the extra row going to the top/left when the margin is odd).
    """
    sigma = cov.sigma if isinstance(cov, CovarianceMatrix) else np.asarray(cov)
    n_v = sigma.shape[0]
    k = crop_size(n_v, n_theta)
    off = (n_v - k) // 2
    block = sigma[off : off + k, off : off + k]
    tri = block[np.triu_indices(k)]
    out = np.zeros(n_theta, dtype=np.complex128)
    out[: tri.size] = tri
    return out


PLANE_NAMES = ("abs_spectrum", "phase_spectrum", "real_cov", "imag_cov", "phase_cov")
N_FEAT = len(PLANE_NAMES)


@dataclass
class FeatureImage:
    """Real-valued network input, (5, n_r, n_theta):
    log10|i_s|, phase(i_s), Re(i_cov), Im(i_cov), phase(i_cov)."""

    planes: np.ndarray
    range_axis: np.ndarray
    angles: AngleGrid
    log_epsilon: float

    def __post_init__(self):
        if self.planes.shape != (N_FEAT, self.range_axis.size, self.angles.n_theta):
            raise ShapeError("feature planes do not match the image axes")
        if not np.all(np.isfinite(self.planes)):
            raise ShapeError("feature planes must be finite")


def assemble_input(
    i_s: np.ndarray,
    i_cov: np.ndarray,
    range_axis: np.ndarray,
    angles: AngleGrid,
) -> FeatureImage:
    """Stack the per-range spectra and covariance features into the 5-plane
    input. The magnitude plane is log10-scaled with epsilon at 1e-6 of the
    plane maximum (absolute 1e-12 when the spectrum is all zero)."""
    i_s = np.asarray(i_s)
    i_cov = np.asarray(i_cov)
    if i_s.shape != i_cov.shape:
        raise ShapeError("spectrum and covariance stacks must have equal shapes")
    mag = np.abs(i_s)
    eps = 1e-6 * mag.max() if mag.max() > 0 else 1e-12
    planes = np.stack(
        [
            np.log10(mag + eps),
            np.angle(i_s),
            i_cov.real,
            i_cov.imag,
            np.angle(i_cov),
        ]
    )
    return FeatureImage(planes=planes, range_axis=range_axis, angles=angles, log_epsilon=eps)


def reference_cnn_input(x: np.ndarray) -> np.ndarray:
    """Covariance tensor of the baseline CNN estimator: planes
    (Re, Im, arg) of the normalized snapshot covariance, (3, n_v, n_v)."""
    sigma = covariance(x).sigma
    return np.stack([sigma.real, sigma.imag, np.angle(sigma)])


def features_from_cube(
    cube,
    grid: AngleGrid,
    rank: int = 1,
    k: int = 1,
    window: rdproc.WindowSpec | None = None,
) -> tuple[FeatureImage, rdproc.RangeChannelMatrix]:
    """Full input pipeline: 2-D FFT, Doppler selection at the given rank,
    channel sorting, and feature assembly."""
    rd = rdproc.range_doppler(cube, window=window)
    sel = rdproc.select_doppler_bins(rdproc.mean_magnitude(rd), k=k)
    sif = rdproc.extract_range_channel(rd, sel, rank=rank)
    v = steering_matrix(sif.positions, grid, cube.params.wavelength)
    i_s = sif.s_if @ v.v
    i_cov = np.zeros((sif.s_if.shape[0], grid.n_theta), dtype=np.complex128)
    for r in range(sif.s_if.shape[0]):
        i_cov[r] = cov_feature(covariance(sif.s_if[r]), grid.n_theta)
    img = assemble_input(i_s, i_cov, rd.range_axis, grid)
    return img, sif
