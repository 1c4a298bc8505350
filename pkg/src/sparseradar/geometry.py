"""Antenna geometry: FMCW waveform constants, MIMO virtual arrays, thinning,
and analytic resolution figures.

All arrays are 1-D (azimuth-only). Element coordinates are metres along the
array axis; the boresight direction is perpendicular to it. Steering is done
in the sine-of-angle domain u = sin(theta).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Beamwidth constant of the theta_3 = 51.05 * lambda / D rule (degrees).
BEAMWIDTH_FACTOR_DEG = 51.05


class GeometryError(ValueError):
    """Invalid antenna geometry (empty arrays, bad thinning sets, ...)."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


@dataclass(frozen=True)
class RadarParams:
    """FMCW waveform and array-count constants.

    Defaults describe the 77 GHz automotive MIMO sensor used throughout:
    3 TX / 16 RX, 1 GHz sweep, 128 chirps of 80.6 us. The element pitches
    are nominally 2 mm (TX) and 6 mm (RX); the exact values used here are
    0.58 lambda and 1.74 lambda so that the virtual pitch and the 1.83 deg
    resolution figure of the full array come out consistently.

    ``n_samples`` is the fast-time sample count per chirp; 1260 samples give
    630 one-sided range bins.
    """

    f_c: float = 77e9
    bandwidth: float = 1e9
    n_chirp: int = 128
    t_chirp: float = 80.6e-6
    n_tx: int = 3
    n_rx: int = 16
    d_tx: float = 0.58 * SPEED_OF_LIGHT / 77e9
    d_rx: float = 3 * 0.58 * SPEED_OF_LIGHT / 77e9
    n_samples: int = 1260

    def __post_init__(self):
        if self.f_c <= 0 or self.bandwidth <= 0 or self.t_chirp <= 0:
            raise DomainError("f_c, bandwidth and t_chirp must be positive")
        for name in ("n_chirp", "n_tx", "n_rx", "n_samples"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1")

    @property
    def wavelength(self) -> float:
        """Carrier wavelength c / f_c [m]."""
        return SPEED_OF_LIGHT / self.f_c

    @property
    def chirp_rate(self) -> float:
        """Frequency slope bandwidth / t_chirp [Hz/s]."""
        return self.bandwidth / self.t_chirp

    @property
    def range_bin(self) -> float:
        """Range extent of one FFT bin, c / (2 B) [m]."""
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth)

    @property
    def n_range_bins(self) -> int:
        """One-sided range bin count after the fast-time FFT."""
        return self.n_samples // 2

    @property
    def max_range(self) -> float:
        """Unambiguous range covered by the one-sided spectrum [m]."""
        return self.n_range_bins * self.range_bin

    @property
    def max_radial_speed(self) -> float:
        """Unambiguous radial speed lambda / (4 T_c) [m/s]."""
        return self.wavelength / (4.0 * self.t_chirp)

    def to_dict(self) -> dict:
        return {
            "f_c": self.f_c,
            "bandwidth": self.bandwidth,
            "n_chirp": self.n_chirp,
            "t_chirp": self.t_chirp,
            "n_tx": self.n_tx,
            "n_rx": self.n_rx,
            "d_tx": self.d_tx,
            "d_rx": self.d_rx,
            "n_samples": self.n_samples,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RadarParams":
        return cls(**d)


@dataclass(frozen=True)
class AngleGrid:
    """Uniform grid in the sine-of-angle domain."""

    u_values: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u_values, dtype=float)
        if u.ndim != 1 or u.size < 2:
            raise DomainError("angle grid needs at least two points")
        if np.any(np.diff(u) <= 0):
            raise DomainError("angle grid must be strictly increasing")
        if np.max(np.abs(u)) > 1.0 + 1e-12:
            raise DomainError("|u| must not exceed 1")
        object.__setattr__(self, "u_values", u)

    @property
    def n_theta(self) -> int:
        return self.u_values.size

    @property
    def theta_deg(self) -> np.ndarray:
        """Grid points converted to degrees via arcsin."""
        return np.degrees(np.arcsin(np.clip(self.u_values, -1.0, 1.0)))


def default_angle_grid(n_theta: int = 450) -> AngleGrid:
    """Full visible space u in [-1, 1], 450 bins by default."""
    return AngleGrid(np.linspace(-1.0, 1.0, n_theta))


@dataclass(frozen=True)
class VirtualArray:
    """MIMO virtual array: all pairwise TX+RX coordinate sums.

    ``positions`` is sorted ascending; duplicates are kept as distinct
    (redundant) channels. ``channel_tx`` / ``channel_rx`` map each virtual
    channel back to the generating physical elements, which the signal
    simulator needs for exact per-element path lengths.
    """

    positions: np.ndarray
    tx_positions: np.ndarray
    rx_positions: np.ndarray
    kept_rx: np.ndarray
    channel_tx: np.ndarray = field(repr=False, default=None)
    channel_rx: np.ndarray = field(repr=False, default=None)

    @property
    def n_v(self) -> int:
        return self.positions.size

    @property
    def aperture(self) -> float:
        """Physical extent of the virtual array [m]."""
        return float(self.positions[-1] - self.positions[0])

    def to_dict(self) -> dict:
        return {
            "tx_positions_m": self.tx_positions.tolist(),
            "rx_positions_m": self.rx_positions.tolist(),
            "kept_rx": self.kept_rx.tolist(),
        }


def build_virtual_array(tx_positions, rx_positions, kept_rx=None) -> VirtualArray:
    """Form the virtual array from physical TX and RX coordinates.

    Every TX/RX pair contributes one virtual element at the coordinate sum
    tx + rx. Channels are returned sorted by virtual position (ties broken
    by TX then RX index so the ordering is reproducible).
    """
    tx = np.atleast_1d(np.asarray(tx_positions, dtype=float))
    rx_all = np.atleast_1d(np.asarray(rx_positions, dtype=float))
    if tx.size == 0 or rx_all.size == 0:
        raise GeometryError("tx_positions and rx_positions must be non-empty")
    if not (np.all(np.isfinite(tx)) and np.all(np.isfinite(rx_all))):
        raise GeometryError("antenna coordinates must be finite")

    if kept_rx is None:
        kept = np.arange(rx_all.size)
    else:
        kept = np.unique(np.asarray(kept_rx, dtype=int))
        if kept.size == 0:
            raise GeometryError("kept_rx must be non-empty")
        if kept.min() < 0 or kept.max() >= rx_all.size:
            raise GeometryError("kept_rx indices out of range")

    tx_idx, rx_idx = np.meshgrid(np.arange(tx.size), kept, indexing="ij")
    tx_idx = tx_idx.ravel()
    rx_idx = rx_idx.ravel()
    pos = tx[tx_idx] + rx_all[rx_idx]
    order = np.lexsort((rx_idx, tx_idx, pos))
    return VirtualArray(
        positions=pos[order],
        tx_positions=tx,
        rx_positions=rx_all,
        kept_rx=kept,
        channel_tx=tx_idx[order],
        channel_rx=rx_idx[order],
    )


def thin_array(array: VirtualArray, keep_rx) -> VirtualArray:
    """Rebuild a virtual array keeping only the given physical RX channels."""
    keep = np.unique(np.asarray(keep_rx, dtype=int))
    if keep.size == 0:
        raise GeometryError("keep_rx must be non-empty")
    if keep.min() < 0 or keep.max() >= array.rx_positions.size:
        raise GeometryError("keep_rx indices out of range")
    return build_virtual_array(array.tx_positions, array.rx_positions, keep)


def resolution_3db(aperture_length: float, wavelength: float) -> float:
    """3-dB beamwidth 51.05 * lambda / D in degrees.

    Follows the paper's arithmetic verbatim: D is element count times pitch,
    not (count - 1) times pitch.
    """
    if aperture_length <= 0:
        raise DomainError("aperture_length must be positive")
    if wavelength <= 0:
        raise DomainError("wavelength must be positive")
    return BEAMWIDTH_FACTOR_DEG * wavelength / aperture_length


# Thinning patterns for the two sparse variants. The exact retained RX
# subsets are chosen to preserve the full aperture (first and last RX kept)
# with even spacing in between.
RX6_KEEP = (0, 3, 6, 9, 12, 15)
RX4_KEEP = (0, 5, 10, 15)


def _centered(n: int, pitch: float) -> np.ndarray:
    return (np.arange(n) - (n - 1) / 2.0) * pitch


def full_mimo_array(params: RadarParams | None = None) -> VirtualArray:
    """Full 3x16 MIMO array: 48 virtual elements at constant pitch."""
    p = params or RadarParams()
    return build_virtual_array(_centered(p.n_tx, p.d_tx), _centered(p.n_rx, p.d_rx))


def rx6_mimo_array(params: RadarParams | None = None) -> VirtualArray:
    """Sparse variant keeping 6 of 16 RX (18 virtual elements)."""
    return thin_array(full_mimo_array(params), RX6_KEEP)


def rx4_mimo_array(params: RadarParams | None = None) -> VirtualArray:
    """Sparse variant keeping 4 of 16 RX (12 virtual elements)."""
    return thin_array(full_mimo_array(params), RX4_KEEP)


def enhanced_ula(params: RadarParams | None = None, n_rx: int = 256) -> VirtualArray:
    """Ground-truth imager array: 1 TX with a half-wavelength 256-element ULA."""
    p = params or RadarParams()
    rx = _centered(n_rx, p.wavelength / 2.0)
    return build_virtual_array([0.0], rx)


ARRAY_BUILDERS = {
    "full": full_mimo_array,
    "rx6": rx6_mimo_array,
    "rx4": rx4_mimo_array,
    "enhanced": enhanced_ula,
}


def array_by_name(name: str, params: RadarParams | None = None) -> VirtualArray:
    try:
        builder = ARRAY_BUILDERS[name]
    except KeyError:
        raise GeometryError(
            f"unknown array {name!r}; choose from {sorted(ARRAY_BUILDERS)}"
        ) from None
    return builder(params)


def save_array_config(array: VirtualArray, path) -> None:
    """Write {tx_positions_m, rx_positions_m, kept_rx} as JSON."""
    Path(path).write_text(json.dumps(array.to_dict(), indent=2))


def load_array_config(path) -> VirtualArray:
    d = json.loads(Path(path).read_text())
    return build_virtual_array(
        d["tx_positions_m"], d["rx_positions_m"], d.get("kept_rx")
    )


# Scene coordinates are (x, y) with the array along x and boresight +y.
# The steering convention of the processing chain (positive-exponent IF
# phase together with the e^{-j 2 pi u x / lambda} steering matrix) maps a
# target at x > 0 to u < 0, so the u coordinate of a position carries a
# minus sign. Both helpers below use it; nothing else needs to know.


def position_from_range_u(range_m: float, u: float) -> np.ndarray:
    """Scene position of a point at the given range and steering coordinate."""
    if range_m <= 0:
        raise DomainError("range must be positive")
    if abs(u) > 1:
        raise DomainError("|u| must not exceed 1")
    return np.array([-range_m * u, range_m * np.sqrt(1.0 - u * u)])


def range_u_of_position(position) -> tuple[float, float]:
    """Inverse of :func:`position_from_range_u`."""
    p = np.asarray(position, dtype=float)
    r = float(np.hypot(p[0], p[1]))
    if r == 0.0:
        raise DomainError("position coincides with the sensor origin")
    return r, float(-p[0] / r)
