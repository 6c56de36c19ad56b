import json

import numpy as np
import pytest

from ltelab.grid import CellConfig, build_dl_grid, build_ul_grid
from ltelab.interference import Footprint, InterferenceScenario, footprint_for_scenario
from ltelab.iq import (
    OfdmLayout,
    acquire_sync,
    footprint_re_values,
    grid_re_values,
    ofdm_demodulate,
    read_iq,
    synthesize_iq,
    useful_energy,
    write_iq,
)


@pytest.fixture(scope="module")
def dl():
    return build_dl_grid(CellConfig(cell_id=57))


def test_layout_10mhz():
    layout = OfdmLayout.for_bandwidth(50)
    assert layout.fft_size == 1024
    assert layout.cp_lengths[:7].tolist() == [80, 72, 72, 72, 72, 72, 72]
    assert layout.frame_length == 153600


@pytest.mark.parametrize("rb,rate", [(50, 10e6), (50, 7.68e6), (100, 15.36e6), (6, 1e6)])
def test_unsupported_rate(rb, rate):
    with pytest.raises(ValueError):
        OfdmLayout.for_bandwidth(rb, rate)


def test_empty_grid_is_silent():
    x = synthesize_iq(np.zeros((600, 140)), frames=1, sample_rate=15.36e6)
    assert x.size == 153600
    assert not x.any()


def test_single_tone_constant_modulus():
    values = np.zeros((600, 140), dtype=complex)
    values[17, 3] = 1.0
    x = synthesize_iq(values)
    layout = OfdmLayout.for_bandwidth(50)
    a = layout.symbol_starts[3]
    n = layout.cp_lengths[3] + layout.fft_size
    # one bin of an orthonormal IDFT: |x| = 1/sqrt(N) over the whole symbol incl. CP
    np.testing.assert_allclose(np.abs(x[a:a + n]), 1 / np.sqrt(1024), rtol=1e-12)
    assert not x[:a].any() and not x[a + n:].any()


@pytest.mark.parametrize("frames", [1, 2])
def test_parseval_full_band(dl, frames):
    fp = footprint_for_scenario(InterferenceScenario.of(1), dl)
    values = footprint_re_values(fp, 3.0, seed=1)
    x = synthesize_iq(values, frames=frames)
    freq = frames * np.sum(np.abs(values) ** 2)
    assert useful_energy(x, 50) / freq == pytest.approx(1.0, abs=1e-6)


def test_parseval_cell_grid(dl):
    values = grid_re_values(dl)
    x = synthesize_iq(values)
    assert useful_energy(x, 50) / np.sum(np.abs(values) ** 2) == pytest.approx(1.0, abs=1e-6)


def test_demodulation_inverts_synthesis(dl):
    values = grid_re_values(dl, seed=3)
    np.testing.assert_allclose(ofdm_demodulate(synthesize_iq(values), 50), values, atol=1e-12)


def test_grid_values_unit_power(dl):
    np.testing.assert_allclose(np.abs(grid_re_values(dl)), 1.0, atol=1e-12)
    ul = build_ul_grid(CellConfig())
    np.testing.assert_allclose(np.abs(grid_re_values(ul)), 1.0, atol=1e-12)


def test_footprint_source(dl):
    fp = footprint_for_scenario(InterferenceScenario.of(6), dl)
    x = synthesize_iq(fp, isr_re_db=5.0, seed=2)
    assert x.size == 153600
    empty = synthesize_iq(Footprint.empty(dl))
    assert not empty.any()


def test_repeatable_bytes(dl):
    a = synthesize_iq(dl, frames=2, seed=9)
    b = synthesize_iq(dl, frames=2, seed=9)
    assert a.tobytes() == b.tobytes()


def test_file_format(tmp_path):
    samples = np.array([1 + 2j, -0.5 + 0.25j, 3e-3 - 7j])
    path = write_iq(tmp_path / "x.iq", samples, {"sample_rate": 15.36e6, "frames": 1,
                                                 "scenario": "test", "isr_re_db": 0.0})
    raw = path.read_bytes()
    assert raw == np.array([1, 2, -0.5, 0.25, 3e-3, -7], dtype="<f4").tobytes()
    meta = json.loads((tmp_path / "x.iq.json").read_text())
    assert meta["samples"] == 3 and meta["sample_rate"] == 15.36e6
    back, meta2 = read_iq(path)
    np.testing.assert_allclose(back, samples.astype(np.complex64))
    assert meta2 == meta


@pytest.mark.parametrize("cell_id,shift", [(57, 12345), (0, 0), (503, 100_001), (200, 77_000)])
def test_acquire_sync(cell_id, shift):
    grid = build_dl_grid(CellConfig(cell_id=cell_id))
    x = np.roll(synthesize_iq(grid, frames=2, seed=cell_id), shift)
    state = acquire_sync(x, 50)
    assert state.locked
    assert state.detected_cell_id == cell_id
    assert state.detected_n_id_2 == cell_id % 3
    assert state.within(shift, tolerance=2, frame_length=153600)


def test_acquire_sync_on_noise_is_unlocked():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(2 * 153600) + 1j * rng.standard_normal(2 * 153600)
    assert not acquire_sync(x, 50).locked


def test_acquire_needs_a_frame():
    with pytest.raises(ValueError):
        acquire_sync(np.zeros(1000, dtype=complex), 50)
