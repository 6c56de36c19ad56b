"""Baseband IQ synthesis for grids and interference footprints.

Each OFDM symbol is an orthonormal inverse DFT of its occupied subcarriers
with the normal cyclic prefix prepended, so the energy of the useful part of
every symbol equals the energy of its REs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import signal

from .grid import (
    CRS_SLOT_SYMBOLS,
    PSS_SYMBOLS,
    SLOTS_PER_FRAME,
    SSS_SYMBOLS,
    SYMBOLS_PER_FRAME,
    SYMBOLS_PER_SLOT,
    Direction,
    ResourceGrid,
    central_subcarriers,
    crs_subcarriers,
)
from .interference import Footprint, SyncState
from .sequences import gold_sequence, pss_sequence, qpsk_from_bits, sss_sequence

SUBCARRIER_SPACING = 15_000.0
FRAME_DURATION = 0.010


@dataclass(frozen=True)
class OfdmLayout:
    n_rb: int
    sample_rate: float

    def __post_init__(self):
        n = self.sample_rate / SUBCARRIER_SPACING
        if n != int(n) or int(n) % 128:
            raise ValueError(
                f"sample rate {self.sample_rate:g} Hz is not a multiple of 1.92 MHz")
        if int(n) <= 12 * self.n_rb:
            raise ValueError(
                f"sample rate {self.sample_rate:g} Hz is too low for {self.n_rb} RB")

    @classmethod
    def for_bandwidth(cls, n_rb: int, sample_rate: float | None = None) -> "OfdmLayout":
        return cls(n_rb, standard_sample_rate(n_rb) if sample_rate is None else sample_rate)

    @property
    def fft_size(self) -> int:
        return int(self.sample_rate / SUBCARRIER_SPACING)

    @cached_property
    def cp_lengths(self) -> np.ndarray:
        """Cyclic-prefix length of each of the 140 symbols of a frame."""
        first, rest = 160 * self.fft_size // 2048, 144 * self.fft_size // 2048
        slot = np.array([first] + [rest] * (SYMBOLS_PER_SLOT - 1))
        return np.tile(slot, SLOTS_PER_FRAME)

    @cached_property
    def symbol_starts(self) -> np.ndarray:
        """Sample index where each symbol's cyclic prefix begins."""
        lengths = self.cp_lengths + self.fft_size
        return np.concatenate(([0], np.cumsum(lengths)[:-1]))

    @property
    def useful_starts(self) -> np.ndarray:
        return self.symbol_starts + self.cp_lengths

    @property
    def frame_length(self) -> int:
        return int(np.sum(self.cp_lengths) + SYMBOLS_PER_FRAME * self.fft_size)

    def bins(self) -> np.ndarray:
        """DFT bin of each subcarrier; the DC bin is left empty."""
        n_sc = 12 * self.n_rb
        k = np.arange(n_sc)
        freq = np.where(k < n_sc // 2, k - n_sc // 2, k - n_sc // 2 + 1)
        return freq % self.fft_size


def standard_sample_rate(n_rb: int) -> float:
    fft = {6: 128, 15: 256, 25: 512, 50: 1024, 75: 1536, 100: 2048}
    if n_rb not in fft:
        raise ValueError(f"no standard sample rate for {n_rb} RB")
    return fft[n_rb] * SUBCARRIER_SPACING


def crs_c_init(cell_id: int, slot: int, slot_symbol: int) -> int:
    return (2**10 * (7 * (slot + 1) + slot_symbol + 1) * (2 * cell_id + 1)
            + 2 * cell_id + 1)


def grid_re_values(grid: ResourceGrid, seed: int = 0) -> np.ndarray:
    """Complex RE values for one frame of ``grid``.

    PSS, SSS and CRS carry their sequences; every other RE carries a seeded
    QPSK symbol. Each RE is scaled to the grid's per-RE power.
    """
    cfg = grid.config
    n_sc = cfg.n_subcarriers
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=2 * grid.n_total)
    values = qpsk_from_bits(bits).reshape(grid.shape)
    if grid.direction is Direction.DL:
        sync_sc = central_subcarriers(n_sc, 62)
        for sym in PSS_SYMBOLS:
            values[sync_sc, sym] = pss_sequence(cfg.n_id_2)
        for sym, subframe in zip(SSS_SYMBOLS, (0, 5)):
            values[sync_sc, sym] = sss_sequence(cfg.n_id_1, cfg.n_id_2, subframe)
        # 2 * 110 CRS per symbol at max bandwidth, read from the band centre
        m = np.arange(n_sc // 6) + 110 - cfg.bandwidth_rb
        for slot in range(SLOTS_PER_FRAME):
            for l in CRS_SLOT_SYMBOLS:
                c = gold_sequence(crs_c_init(cfg.cell_id, slot, l), 4 * 110)
                r = qpsk_from_bits(c)[m]
                values[crs_subcarriers(cfg, l), slot * SYMBOLS_PER_SLOT + l] = r
    return values * np.sqrt(grid.power)


def footprint_re_values(footprint: Footprint, isr_re_db: float = 0.0, seed: int = 0,
                        power: np.ndarray | None = None) -> np.ndarray:
    """Circular complex Gaussian interference on the targeted REs only."""
    rng = np.random.default_rng(seed)
    shape = footprint.mask.shape
    noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    scale = 10.0 ** (isr_re_db / 20.0)
    if power is not None:
        scale = scale * np.sqrt(power)
    return np.where(footprint.mask, noise * scale, 0.0)


def synthesize_iq(source, frames: int = 1, sample_rate: float | None = None,
                  isr_re_db: float = 0.0, seed: int = 0, n_rb: int | None = None) -> np.ndarray:
    """Time-domain complex baseband for ``frames`` frames.

    ``source`` is a ResourceGrid, a Footprint (requires ``n_rb`` unless it can be
    inferred from its shape) or a ``[subcarrier, symbol]`` array of RE values
    spanning one or ``frames`` frames. One-frame sources repeat every frame.
    """
    if frames < 1:
        raise ValueError(f"frames must be >= 1, got {frames}")
    if isinstance(source, ResourceGrid):
        values = grid_re_values(source, seed=seed)
    elif isinstance(source, Footprint):
        values = footprint_re_values(source, isr_re_db=isr_re_db, seed=seed)
    else:
        values = np.asarray(source, dtype=complex)
    n_sc = values.shape[0]
    if n_rb is None:
        if n_sc % 12:
            raise ValueError(f"{n_sc} subcarriers is not a whole number of RBs")
        n_rb = n_sc // 12
    layout = OfdmLayout.for_bandwidth(n_rb, sample_rate)
    if values.shape[1] == SYMBOLS_PER_FRAME:
        values = np.tile(values, (1, frames))
    elif values.shape[1] != SYMBOLS_PER_FRAME * frames:
        raise ValueError(f"RE array has {values.shape[1]} symbols, expected "
                         f"{SYMBOLS_PER_FRAME} or {SYMBOLS_PER_FRAME * frames}")

    n_fft = layout.fft_size
    spectrum = np.zeros((n_fft, values.shape[1]), dtype=complex)
    spectrum[layout.bins(), :] = values
    body = np.fft.ifft(spectrum, axis=0, norm="ortho")
    out = np.empty(layout.frame_length * frames, dtype=complex)
    cps = np.tile(layout.cp_lengths, frames)
    pos = 0
    for j, cp in enumerate(cps):
        out[pos:pos + cp] = body[n_fft - cp:, j]
        out[pos + cp:pos + cp + n_fft] = body[:, j]
        pos += cp + n_fft
    return out


def ofdm_demodulate(samples: np.ndarray, n_rb: int, sample_rate: float | None = None,
                    start: int = 0) -> np.ndarray:
    """Inverse of :func:`synthesize_iq` for whole frames beginning at ``start``."""
    layout = OfdmLayout.for_bandwidth(n_rb, sample_rate)
    samples = np.asarray(samples)[start:]
    frames = samples.size // layout.frame_length
    if frames == 0:
        raise ValueError("fewer samples than one frame")
    n_fft = layout.fft_size
    idx = (np.arange(frames)[:, None] * layout.frame_length + layout.useful_starts[None, :]).ravel()
    body = samples[idx[None, :] + np.arange(n_fft)[:, None]]
    spectrum = np.fft.fft(body, axis=0, norm="ortho")
    return spectrum[layout.bins(), :]


def useful_energy(samples: np.ndarray, n_rb: int, sample_rate: float | None = None) -> float:
    """Energy of the samples outside the cyclic prefixes."""
    layout = OfdmLayout.for_bandwidth(n_rb, sample_rate)
    frames = samples.size // layout.frame_length
    keep = np.ones(samples.size, dtype=bool)
    for f in range(frames):
        for s, cp in zip(layout.symbol_starts, layout.cp_lengths):
            a = f * layout.frame_length + s
            keep[a:a + cp] = False
    return float(np.sum(np.abs(samples[keep]) ** 2))


def write_iq(path, samples: np.ndarray, sidecar: dict | None = None) -> Path:
    """Write interleaved float32 little-endian I/Q with a JSON sidecar next to it."""
    path = Path(path)
    iq = np.empty(2 * samples.size, dtype="<f4")
    iq[0::2] = samples.real
    iq[1::2] = samples.imag
    path.write_bytes(iq.tobytes())
    meta = dict(sidecar or {})
    meta.setdefault("format", "cf32_le")
    meta["samples"] = int(samples.size)
    path.with_name(path.name + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def read_iq(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    sidecar_path = path.with_name(path.name + ".json")
    meta = json.loads(sidecar_path.read_text()) if sidecar_path.exists() else {}
    return (raw[0::2] + 1j * raw[1::2]).astype(np.complex64), meta


def _pss_replica(n_rb: int, n_id_2: int, layout: OfdmLayout) -> np.ndarray:
    spectrum = np.zeros(layout.fft_size, dtype=complex)
    bins = layout.bins()[central_subcarriers(12 * n_rb, 62)]
    spectrum[bins] = pss_sequence(n_id_2)
    ref = np.fft.ifft(spectrum, norm="ortho")
    return ref / np.linalg.norm(ref)


def acquire_sync(samples: np.ndarray, n_rb: int, sample_rate: float | None = None,
                 threshold: float = 0.2) -> SyncState:
    """Simplified cell search: PSS correlation for timing and sector, then SSS
    matching for the group identity and the half-frame.

    ``peak_metric`` is the normalised correlation magnitude at the best PSS
    peak; below ``threshold`` the state is reported unlocked.
    """
    layout = OfdmLayout.for_bandwidth(n_rb, sample_rate)
    samples = np.asarray(samples, dtype=complex)
    n_fft = layout.fft_size
    if samples.size < layout.frame_length + n_fft:
        raise ValueError("need at least one frame plus one symbol of samples")
    window = np.ones(n_fft)
    seg_energy = signal.correlate(np.abs(samples) ** 2, window, mode="valid")
    best = (0.0, 0, 0)
    for n_id_2 in range(3):
        ref = _pss_replica(n_rb, n_id_2, layout)
        corr = np.abs(signal.correlate(samples, ref, mode="valid", method="fft"))
        metric = corr / np.sqrt(np.maximum(seg_energy, 1e-30))
        # search one frame so the peak is followed by a full SSS lookup
        i = int(np.argmax(metric[: layout.frame_length]))
        if metric[i] > best[0]:
            best = (float(metric[i]), i, n_id_2)
    peak, pss_start, n_id_2 = best
    if peak < threshold:
        return SyncState(n_id_2, n_id_2, 0, False, peak)

    # SSS occupies the symbol right before the PSS; CP lengths match within a slot
    sss_start = pss_start - n_fft - layout.cp_lengths[PSS_SYMBOLS[0]]
    if sss_start < 0:
        sss_start += layout.frame_length
    sss_time = samples[sss_start:sss_start + n_fft]
    rx = np.fft.fft(sss_time, norm="ortho")[layout.bins()[central_subcarriers(12 * n_rb, 62)]]
    best_sss = (-np.inf, 0, 0)
    for n_id_1 in range(168):
        for subframe in (0, 5):
            score = abs(np.vdot(sss_sequence(n_id_1, n_id_2, subframe), rx))
            if score > best_sss[0]:
                best_sss = (score, n_id_1, subframe)
    _, n_id_1, subframe = best_sss
    pss_symbol = PSS_SYMBOLS[0] if subframe == 0 else PSS_SYMBOLS[1]
    frame_start = (pss_start - int(layout.useful_starts[pss_symbol])) % layout.frame_length
    return SyncState(n_id_2, 3 * n_id_1 + n_id_2, frame_start, True, peak)
