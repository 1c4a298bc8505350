"""NumPy reference implementations of the hot kernels.

These are the import-time fallback when the compiled extension is missing;
they are also the behavioural reference the Cython versions are tested
against. Keep the two in lockstep.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def peak_scan(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All interior local maxima of a 1-D array with their prominences.

    Plateaus count once and report their left-center index. The prominence
    of a peak of height h is h minus the higher of the two valley minima,
    where each valley runs from the peak to the nearest sample >= h on that
    side (or to the array end if none exists).
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    peaks: list[int] = []
    lefts: list[int] = []
    rights: list[int] = []
    i = 1
    while i < n - 1:
        if x[i] > x[i - 1]:
            j = i
            while j + 1 < n and x[j + 1] == x[i]:
                j += 1
            if j + 1 < n and x[j + 1] < x[i]:
                peaks.append((i + j) // 2)
                lefts.append(i)
                rights.append(j)
            i = j + 1
        else:
            i += 1

    proms = np.empty(len(peaks), dtype=np.float64)
    for p, (l, r) in enumerate(zip(lefts, rights)):
        h = x[lefts[p]]
        left_min = np.inf
        k = l - 1
        while k >= 0 and x[k] < h:
            if x[k] < left_min:
                left_min = x[k]
            k -= 1
        right_min = np.inf
        k = r + 1
        while k < n and x[k] < h:
            if x[k] < right_min:
                right_min = x[k]
            k += 1
        proms[p] = h - max(left_min, right_min)
    return np.asarray(peaks, dtype=np.int64), proms


def backproject(
    sif: np.ndarray,
    tx_x: np.ndarray,
    rx_x: np.ndarray,
    ranges: np.ndarray,
    us: np.ndarray,
    f_c: float,
    bins_per_second: float,
    inv_c: float,
) -> np.ndarray:
    """Near-field matched-filter accumulation over channels.

    ``sif`` is the range-compressed (channel, range-bin) matrix. For each
    image pixel the per-channel two-way delay is computed exactly, the range
    profile is linearly interpolated at the corresponding fractional bin and
    the carrier phase is compensated before summation.
    """
    sif = np.ascontiguousarray(sif, dtype=np.complex128)
    n_ch, n_bins = sif.shape
    r = np.asarray(ranges, dtype=np.float64)
    u = np.asarray(us, dtype=np.float64)
    px = -np.outer(r, u)  # (n_r, n_u)
    py = np.outer(r, np.sqrt(np.maximum(0.0, 1.0 - u * u)))
    out = np.zeros((r.size, u.size), dtype=np.complex128)
    for m in range(n_ch):
        d = np.hypot(px - tx_x[m], py) + np.hypot(px - rx_x[m], py)
        tau = d * inv_c
        b = tau * bins_per_second
        k = np.floor(b).astype(np.int64)
        frac = b - k
        valid = (k >= 0) & (k < n_bins - 1)
        k_safe = np.where(valid, k, 0)
        z = sif[m, k_safe] * (1.0 - frac) + sif[m, np.minimum(k_safe + 1, n_bins - 1)] * frac
        out += np.where(valid, z * np.exp(-1j * TWO_PI * f_c * tau), 0.0)
    return out


def accumulate_if(
    out: np.ndarray,
    tau: np.ndarray,
    amp: np.ndarray,
    t: np.ndarray,
    mu: float,
    f_c: float,
) -> None:
    """Add one chirp's IF contribution of all targets to ``out`` in place.

    out: (n_ch, n_s) complex. tau: (n_ch, n_targets) two-way delays.
    amp: (n_targets,) complex amplitudes (pattern gain folded in).
    Each sample accumulates amp_k * exp(2 pi j (mu tau t + f_c tau)).
    """
    for k in range(amp.size):
        phase = TWO_PI * (mu * np.outer(tau[:, k], t) + f_c * tau[:, k][:, None])
        out += amp[k] * (np.cos(phase) + 1j * np.sin(phase))
