"""Backend parity: the compiled kernels must agree with the NumPy reference,
and the peak scan must match an exhaustive prominence oracle."""

import numpy as np
import pytest

from sparseradar import backend
from sparseradar._kernels_np import accumulate_if, backproject, peak_scan


def oracle_peaks(x):
    """O(n^2) literal implementation of the peak/prominence definition."""
    x = np.asarray(x, dtype=float)
    n = x.size
    peaks, proms = [], []
    i = 1
    while i < n - 1:
        if x[i] > x[i - 1]:
            j = i
            while j + 1 < n and x[j + 1] == x[i]:
                j += 1
            if j + 1 < n and x[j + 1] < x[i]:
                h = x[i]
                left = [x[k] for k in range(i - 1, -1, -1)]
                lv, valley = np.inf, []
                for v in left:
                    if v >= h:
                        break
                    valley.append(v)
                lv = min(valley)
                valley = []
                for k in range(j + 1, n):
                    if x[k] >= h:
                        break
                    valley.append(x[k])
                rv = min(valley)
                peaks.append((i + j) // 2)
                proms.append(h - max(lv, rv))
            i = j + 1
        else:
            i += 1
    return np.array(peaks, dtype=np.int64), np.array(proms)


def random_signal(rng):
    n = int(rng.integers(3, 65))
    if rng.random() < 0.5:
        return rng.integers(0, 6, size=n).astype(float)  # plateaus and ties
    return rng.standard_normal(n)


def test_peak_scan_matches_oracle_1000():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        x = random_signal(rng)
        for impl in backend.backends_available().values():
            idx, prom = impl.peak_scan(x)
            oidx, oprom = oracle_peaks(x)
            assert np.array_equal(idx, oidx), x
            assert np.array_equal(prom, oprom), x


def test_peak_scan_examples():
    idx, prom = peak_scan(np.array([0.0, 1.0, 0.0]))
    assert idx.tolist() == [1] and prom.tolist() == [1.0]
    idx, prom = peak_scan(np.array([0.0, 3.0, 1.0, 2.0, 0.0]))
    assert idx.tolist() == [1, 3]
    assert prom.tolist() == [3.0, 1.0]
    idx, _ = peak_scan(np.arange(10.0))  # monotone ramp
    assert idx.size == 0


def test_peak_scan_plateau_left_center():
    x = np.array([0.0, 2.0, 2.0, 2.0, 0.0])
    idx, _ = peak_scan(x)
    assert idx.tolist() == [2]
    x = np.array([0.0, 2.0, 2.0, 0.0])
    idx, _ = peak_scan(x)
    assert idx.tolist() == [1]  # even plateau reports the left-center


@pytest.mark.skipif(len(backend.backends_available()) < 2, reason="extension not built")
def test_backproject_parity():
    rng = np.random.default_rng(1)
    impls = backend.backends_available()
    sif = rng.standard_normal((16, 64)) + 1j * rng.standard_normal((16, 64))
    tx = np.zeros(16)
    rx = np.linspace(-0.1, 0.1, 16)
    ranges = np.linspace(1.0, 8.0, 40)
    us = np.linspace(-0.9, 0.9, 33)
    out = {
        name: impl.backproject(sif, tx, rx, ranges, us, 77e9, 1e9, 1.0 / 299792458.0)
        for name, impl in impls.items()
    }
    np.testing.assert_allclose(out["compiled"], out["numpy"], rtol=1e-9, atol=1e-9)


@pytest.mark.skipif(len(backend.backends_available()) < 2, reason="extension not built")
def test_accumulate_if_parity():
    rng = np.random.default_rng(2)
    impls = backend.backends_available()
    tau = rng.uniform(1e-8, 5e-7, size=(8, 3))
    amp = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    t = np.arange(256) * (80.6e-6 / 256)
    outs = {}
    for name, impl in impls.items():
        out = np.zeros((8, 256), dtype=np.complex128)
        impl.accumulate_if(out, tau, amp, t, 1e9 / 80.6e-6, 77e9)
        outs[name] = out
    np.testing.assert_allclose(outs["compiled"], outs["numpy"], rtol=1e-9, atol=1e-9)


def test_backproject_interpolation_bounds():
    # a pixel mapping outside the range profile contributes nothing
    sif = np.ones((2, 8), dtype=np.complex128)
    tx = np.zeros(2)
    rx = np.zeros(2)
    out = backproject(sif, tx, rx, np.array([1e6]), np.array([0.0]), 77e9, 1e9, 1.0 / 3e8)
    assert out[0, 0] == 0.0


def test_accumulate_if_single_tone():
    # one target, one channel: exact complex exponential
    tau = np.array([[2e-7]])
    amp = np.array([1.0 + 0.0j])
    t = np.arange(64) * 1e-7
    out = np.zeros((1, 64), dtype=np.complex128)
    mu, f_c = 1e12, 77e9
    accumulate_if(out, tau, amp, t, mu, f_c)
    expected = np.exp(2j * np.pi * (mu * tau[0, 0] * t + f_c * tau[0, 0]))
    np.testing.assert_allclose(out[0], expected, rtol=1e-12)
