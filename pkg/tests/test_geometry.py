import json

import numpy as np
import pytest

from sparseradar.geometry import (
    DomainError,
    GeometryError,
    RadarParams,
    build_virtual_array,
    enhanced_ula,
    full_mimo_array,
    load_array_config,
    position_from_range_u,
    range_u_of_position,
    resolution_3db,
    rx4_mimo_array,
    rx6_mimo_array,
    save_array_config,
    thin_array,
    default_angle_grid,
)


def test_wavelength_derived_exactly():
    p = RadarParams()
    assert p.wavelength == 299_792_458.0 / p.f_c
    assert p.chirp_rate == p.bandwidth / p.t_chirp


def test_table_defaults():
    p = RadarParams()
    assert p.f_c == 77e9
    assert p.bandwidth == 1e9
    assert p.n_chirp == 128
    assert p.t_chirp == 80.6e-6
    assert (p.n_tx, p.n_rx) == (3, 16)
    assert p.range_bin == pytest.approx(0.15, abs=1e-3)


def test_invalid_params_rejected():
    with pytest.raises(DomainError):
        RadarParams(bandwidth=-1)
    with pytest.raises(DomainError):
        RadarParams(n_chirp=0)


def test_single_tx_passthrough():
    lam = RadarParams().wavelength
    arr = build_virtual_array([0.0], [0.0, 0.5 * lam])
    assert arr.n_v == 2
    assert np.allclose(arr.positions, [0.0, 0.5 * lam])


def test_nominal_table_coordinates_give_48_uniform_elements():
    # Nominal 2 mm / 6 mm spacings: 48 virtual elements at a constant pitch
    # (the paper labels that pitch 0.58 lambda).
    arr = build_virtual_array(np.arange(3) * 2e-3, np.arange(16) * 6e-3)
    assert arr.n_v == 48
    diffs = np.diff(arr.positions)
    assert np.all(np.abs(diffs - diffs[0]) <= 1e-12 * np.abs(diffs[0]))


def test_pairwise_sum_enumeration():
    arr = build_virtual_array([0.0, 1.0], [0.0, 1.0])
    assert np.allclose(arr.positions, [0.0, 1.0, 1.0, 2.0])  # duplicates kept


def test_empty_inputs_rejected():
    with pytest.raises(GeometryError):
        build_virtual_array([], [0.0])
    with pytest.raises(GeometryError):
        build_virtual_array([0.0], [])
    with pytest.raises(GeometryError):
        build_virtual_array([np.nan], [0.0])


def test_full_array_uniform_pitch(full_array, params):
    assert full_array.n_v == 48
    diffs = np.diff(full_array.positions)
    assert np.all(np.abs(diffs - diffs[0]) <= 1e-12 * diffs[0])
    assert diffs[0] == pytest.approx(0.58 * params.wavelength, rel=1e-12)


def test_thinning_counts(params, full_array):
    assert thin_array(full_array, range(16)).n_v == 48  # identity
    assert rx6_mimo_array(params).n_v == 18
    assert rx4_mimo_array(params).n_v == 12


def test_thinning_preserves_aperture(params, full_array):
    for arr in (rx6_mimo_array(params), rx4_mimo_array(params)):
        assert arr.positions[0] == full_array.positions[0]
        assert arr.positions[-1] == full_array.positions[-1]


def test_thin_rejects_bad_sets(full_array):
    with pytest.raises(GeometryError):
        thin_array(full_array, [])
    with pytest.raises(GeometryError):
        thin_array(full_array, [16])


def test_thin_full_keepset_idempotent(full_array):
    again = thin_array(full_array, range(16))
    assert np.array_equal(again.positions, full_array.positions)
    assert np.array_equal(again.channel_tx, full_array.channel_tx)


def test_resolution_paper_values(params):
    lam = params.wavelength
    assert resolution_3db(48 * 0.58 * lam, lam) == pytest.approx(1.83, abs=0.01)
    assert resolution_3db(256 * 0.5 * lam, lam) == pytest.approx(0.4, abs=0.01)
    assert resolution_3db(51.05 * lam, lam) == pytest.approx(1.0, rel=1e-12)


def test_resolution_monotone_decreasing(params):
    lam = params.wavelength
    apertures = np.linspace(0.01, 1.0, 50)
    values = [resolution_3db(a, lam) for a in apertures]
    assert np.all(np.diff(values) < 0)


def test_resolution_domain_errors(params):
    with pytest.raises(DomainError):
        resolution_3db(0.0, params.wavelength)
    with pytest.raises(DomainError):
        resolution_3db(-1.0, params.wavelength)


def test_enhanced_ula(params):
    arr = enhanced_ula(params)
    assert arr.n_v == 256
    assert np.allclose(np.diff(arr.positions), params.wavelength / 2)


def test_angle_grid_bounds():
    g = default_angle_grid(450)
    assert g.n_theta == 450
    assert g.u_values[0] == -1.0 and g.u_values[-1] == 1.0
    assert np.all(np.diff(g.u_values) > 0)
    with pytest.raises(DomainError):
        default_angle_grid(1)


def test_array_config_roundtrip(tmp_path, params):
    arr = rx6_mimo_array(params)
    path = tmp_path / "array.json"
    save_array_config(arr, path)
    loaded = load_array_config(path)
    assert np.allclose(loaded.positions, arr.positions)
    assert np.array_equal(loaded.kept_rx, arr.kept_rx)
    blob = json.loads(path.read_text())
    assert set(blob) == {"tx_positions_m", "rx_positions_m", "kept_rx"}


def test_position_u_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(100):
        r = rng.uniform(1.0, 80.0)
        u = rng.uniform(-0.99, 0.99)
        p = position_from_range_u(r, u)
        r2, u2 = range_u_of_position(p)
        assert r2 == pytest.approx(r, rel=1e-12)
        assert u2 == pytest.approx(u, abs=1e-12)
    with pytest.raises(DomainError):
        range_u_of_position([0.0, 0.0])
