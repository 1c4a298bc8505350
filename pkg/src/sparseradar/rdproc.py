"""Range-Doppler processing: 2-D FFT, mean-magnitude image, per-range
Doppler bin selection, and extraction of the range-channel matrix S_IF."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import backend
from .errors import ConfigError, ShapeError

if TYPE_CHECKING:  # avoid a circular import; cubes are duck-typed here
    from .synthesis import RadarCube


@dataclass(frozen=True)
class WindowSpec:
    """FFT window names along fast time (range) and slow time (Doppler)."""

    range_window: str = "hann"
    doppler_window: str = "hann"


def window_vector(name: str, n: int) -> np.ndarray:
    if name in ("rect", "rectangular", "none"):
        return np.ones(n)
    if name in ("hann", "hanning"):
        return np.hanning(n)
    raise ConfigError(f"unknown window {name!r}")


@dataclass
class RangeDopplerCube:
    """Complex data indexed (virtual channel, doppler bin, range bin)."""

    data: np.ndarray
    range_axis: np.ndarray  # m per bin, one-sided
    velocity_axis: np.ndarray  # m/s per Doppler bin, zero-centered
    channel_positions: np.ndarray
    params: object
    array: object


def range_doppler(cube: "RadarCube", window: WindowSpec | None = None, zero_pad: int = 1) -> RangeDopplerCube:
    """Windowed 2-D FFT per channel.

    The one-sided range spectrum is kept (beat frequencies are positive for
    the +j IF convention) and the Doppler axis is shifted so zero velocity
    sits at bin n_chirp // 2. ``zero_pad`` upsamples the range axis, which
    the ground-truth imager uses for interpolation accuracy.
    """
    w = window or WindowSpec()
    p = cube.params
    data = cube.data
    w_r = window_vector(w.range_window, p.n_samples)
    w_d = window_vector(w.doppler_window, p.n_chirp)

    spec = np.fft.fft(data * w_r[None, None, :], n=zero_pad * p.n_samples, axis=2)
    n_r = zero_pad * p.n_samples // 2
    spec = spec[:, :, :n_r]
    spec = np.fft.fftshift(np.fft.fft(spec * w_d[None, :, None], axis=1), axes=1)

    range_axis = np.arange(n_r) * (p.range_bin / zero_pad)
    f_d = np.fft.fftshift(np.fft.fftfreq(p.n_chirp, d=p.t_chirp))
    velocity_axis = f_d * p.wavelength / 2.0
    return RangeDopplerCube(
        data=spec,
        range_axis=range_axis,
        velocity_axis=velocity_axis,
        channel_positions=cube.array.positions.copy(),
        params=p,
        array=cube.array,
    )


def mean_magnitude(rd: RangeDopplerCube) -> np.ndarray:
    """Mean over per-channel magnitudes, (n_doppler, n_range). Averaging the
    magnitudes (not the complex values) is what guarantees every channel
    shares the same selected range-Doppler pixel downstream."""
    return np.abs(rd.data).mean(axis=0)


@dataclass
class DopplerSelection:
    """Per range bin, the k selected Doppler bins, strongest first.

    When fewer than k distinct peaks exist, the strongest index is repeated
    to fill the remaining ranks.
    """

    indices: np.ndarray  # (n_range, k) int
    magnitudes: np.ndarray  # (n_range, k)

    @property
    def k(self) -> int:
        return self.indices.shape[1]


def select_doppler_bins(mean_img: np.ndarray, k: int = 1, min_prominence: float = 0.0) -> DopplerSelection:
    """Rank Doppler bins per range bin by magnitude.

    Rank 1 is always the arg-max bin. Further ranks come from prominence
    peaks of the Doppler profile (shared peak-finder semantics), sorted by
    height; missing ranks repeat the strongest bin.
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    n_dop, n_range = mean_img.shape
    indices = np.zeros((n_range, k), dtype=np.int64)
    mags = np.zeros((n_range, k))
    for r in range(n_range):
        profile = np.ascontiguousarray(mean_img[:, r])
        best = int(np.argmax(profile))
        order = [best]
        if k > 1:
            pk, prom = backend.peak_scan(profile)
            keep = prom >= min_prominence
            pk = pk[keep]
            for idx in pk[np.argsort(profile[pk])[::-1]]:
                if idx != best:
                    order.append(int(idx))
                if len(order) == k:
                    break
        while len(order) < k:
            order.append(best)
        indices[r] = order
        mags[r] = profile[indices[r]]
    return DopplerSelection(indices=indices, magnitudes=mags)


@dataclass
class RangeChannelMatrix:
    """S_IF: per range bin, the complex snapshot across virtual channels
    taken at that bin's selected Doppler pixel."""

    s_if: np.ndarray  # (n_range, n_v) complex
    doppler_rank: np.ndarray  # (n_range,) int, 1-based rank used per row
    positions: np.ndarray  # virtual element coordinate per column


def extract_range_channel(rd: RangeDopplerCube, sel: DopplerSelection, rank: int = 1) -> RangeChannelMatrix:
    """Pick the same (range, Doppler) pixel across all channels.

    Columns are ordered by ascending virtual element position regardless of
    the cube's channel storage order.
    """
    if not 1 <= rank <= sel.k:
        raise ShapeError(f"rank {rank} out of bounds for k={sel.k} selection")
    n_range = rd.data.shape[2]
    if sel.indices.shape[0] != n_range:
        raise ShapeError("selection was made for a different range axis")
    order = np.argsort(rd.channel_positions, kind="stable")
    dop = sel.indices[:, rank - 1]
    s_if = rd.data[order][:, dop, np.arange(n_range)].T
    return RangeChannelMatrix(
        s_if=np.ascontiguousarray(s_if),
        doppler_rank=np.full(n_range, rank, dtype=np.int64),
        positions=rd.channel_positions[order],
    )
