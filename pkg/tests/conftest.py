import numpy as np
import pytest

from sparseradar.geometry import RadarParams, default_angle_grid, full_mimo_array


@pytest.fixture(scope="session")
def params():
    return RadarParams()


@pytest.fixture(scope="session")
def short_params():
    # 8 chirps keep simulation cheap; everything else is the full waveform
    return RadarParams(n_chirp=8)


@pytest.fixture(scope="session")
def full_array(params):
    return full_mimo_array(params)


@pytest.fixture(scope="session")
def grid450():
    return default_angle_grid(450)


def interp_halfpower_width_deg(u_values: np.ndarray, cut: np.ndarray) -> float:
    """3-dB width in degrees via linear interpolation of the crossings."""
    peak_idx = int(np.argmax(cut))
    half = cut[peak_idx] / np.sqrt(2.0)
    i = peak_idx
    while i > 0 and cut[i] > half:
        i -= 1
    left = np.interp(half, [cut[i], cut[i + 1]], [u_values[i], u_values[i + 1]])
    j = peak_idx
    while j < cut.size - 1 and cut[j] > half:
        j += 1
    right = np.interp(half, [cut[j], cut[j - 1]], [u_values[j], u_values[j - 1]])
    return float(np.degrees(np.arcsin(right) - np.arcsin(left)))
