"""Interference scenarios, their RE footprints and the ISR metrics."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import (
    PSS_SYMBOLS,
    SSS_SYMBOLS,
    SYMBOLS_PER_FRAME,
    ChannelKind,
    Direction,
    ResourceGrid,
    central_subcarriers,
)

PAPER_SYNC_FRACTION = 0.0123
DEFAULT_SPOOF_SYMBOL_OFFSET = 31


class ScenarioKind(enum.IntEnum):
    """Interference test cases, numbered as in the published test table."""

    NONE = 0
    FULL_BAND = 1
    HALF_BAND = 2
    PUCCH = 3
    PUSCH = 4
    PSS_SSS_SPOOF = 5
    PSS_SSS_INTERFERENCE = 6


# kind -> (direction, synchronous, label)
SCENARIO_TABLE = {
    ScenarioKind.NONE: (Direction.NONE, False, "No interference"),
    ScenarioKind.FULL_BAND: (Direction.BOTH, False, "Full-band interference"),
    ScenarioKind.HALF_BAND: (Direction.BOTH, False, "Half-band interference"),
    ScenarioKind.PUCCH: (Direction.UL, False, "PUCCH interference"),
    ScenarioKind.PUSCH: (Direction.UL, False, "PUSCH interference"),
    ScenarioKind.PSS_SSS_SPOOF: (Direction.DL, False, "PSS/SSS spoofing"),
    ScenarioKind.PSS_SSS_INTERFERENCE: (Direction.DL, True, "PSS/SSS interference"),
}


class FootprintMode(str, enum.Enum):
    GRID_EXACT = "grid-exact"
    PAPER_FRACTION = "paper-fraction"


@dataclass(frozen=True)
class InterferenceScenario:
    kind: ScenarioKind
    direction: Direction
    synchronous: bool
    isr_re_db: float = 0.0
    timing_offset: int = 0
    duty_cycle: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        object.__setattr__(self, "direction", Direction(self.direction))
        direction, synchronous, _ = SCENARIO_TABLE[self.kind]
        if self.direction is not direction or bool(self.synchronous) != synchronous:
            raise ValueError(
                f"{self.kind.name} must be direction={direction.value}, synchronous={synchronous}; "
                f"got direction={self.direction.value}, synchronous={self.synchronous}")
        if not math.isfinite(self.isr_re_db):
            raise ValueError(f"isr_re_db must be finite, got {self.isr_re_db!r}")
        if not 0 < self.duty_cycle <= 1:
            raise ValueError(f"duty_cycle must be in (0, 1], got {self.duty_cycle!r}")
        if self.timing_offset and not self.synchronous:
            raise ValueError("timing_offset only applies to synchronous scenarios")

    @classmethod
    def of(cls, kind, isr_re_db: float = 0.0, **kwargs) -> "InterferenceScenario":
        """Build a scenario with the direction/synchronous flags of its table row."""
        kind = ScenarioKind(kind)
        direction, synchronous, _ = SCENARIO_TABLE[kind]
        return cls(kind, direction, synchronous, isr_re_db=isr_re_db, **kwargs)

    @property
    def label(self) -> str:
        return SCENARIO_TABLE[self.kind][2]

    def with_isr(self, isr_re_db: float) -> "InterferenceScenario":
        return replace(self, isr_re_db=float(isr_re_db))

    def to_dict(self) -> dict:
        return {
            "id": int(self.kind),
            "kind": self.kind.name,
            "direction": self.direction.value,
            "synchronous": self.synchronous,
            "isr_re_db": self.isr_re_db,
            "timing_offset": self.timing_offset,
            "duty_cycle": self.duty_cycle,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InterferenceScenario":
        kind = ScenarioKind[d["kind"]] if "kind" in d else ScenarioKind(d["id"])
        return cls.of(kind, isr_re_db=d.get("isr_re_db", 0.0),
                      timing_offset=d.get("timing_offset", 0),
                      duty_cycle=d.get("duty_cycle", 1.0))


@dataclass(frozen=True, eq=False)
class Footprint:
    """Targeted REs of one frame, stored as a boolean ``[subcarrier, symbol]`` mask."""

    mask: np.ndarray
    direction: Direction
    spoof: bool = False
    symbol_shift: int = 0

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def n_target(self) -> int:
        return int(np.count_nonzero(self.mask))

    @property
    def n_total(self) -> int:
        return self.mask.size

    @property
    def fraction(self) -> float:
        return self.n_target / self.n_total

    @property
    def targeted_res(self) -> np.ndarray:
        """``(n_target, 2)`` array of (subcarrier, symbol) pairs."""
        return np.argwhere(self.mask)

    def shifted(self, symbols: int) -> "Footprint":
        return replace(self, mask=np.roll(self.mask, symbols, axis=1),
                       symbol_shift=self.symbol_shift + symbols)

    @classmethod
    def empty(cls, grid: ResourceGrid) -> "Footprint":
        return cls(np.zeros(grid.shape, dtype=bool), grid.direction)


@dataclass(frozen=True)
class IsrMetrics:
    isr_re_db: float
    isr_f_db: float
    fraction: float

    @classmethod
    def from_fraction(cls, isr_re_db: float, fraction: float) -> "IsrMetrics":
        return cls(isr_re_db, isr_f(isr_re_db, fraction), fraction)

    def to_dict(self) -> dict:
        return {"isr_re_db": self.isr_re_db, "isr_f_db": self.isr_f_db, "fraction": self.fraction}


@dataclass(frozen=True)
class SyncState:
    """What an interferer knows about the victim cell after acquiring it."""

    detected_n_id_2: int
    detected_cell_id: int
    frame_timing: int
    locked: bool
    peak_metric: float = field(default=float("nan"), compare=False)

    def within(self, true_frame_timing: int, tolerance: int, frame_length: int) -> bool:
        err = (self.frame_timing - true_frame_timing) % frame_length
        err = min(err, frame_length - err)
        return self.locked and err <= tolerance


def perfect_sync(cell_id: int, frame_timing: int = 0) -> SyncState:
    """Sync shortcut: locked exactly at the true frame boundary."""
    return SyncState(cell_id % 3, cell_id, frame_timing, True, 1.0)


def _check_fraction(fraction: float) -> float:
    fraction = float(fraction)
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must be in (0, 1], got {fraction!r}")
    return fraction


def isr_f(isr_re_db: float, fraction: float) -> float:
    """Frame-level ISR in dB: the per-RE ratio scaled by the targeted-RE fraction."""
    return float(isr_re_db) + 10.0 * math.log10(_check_fraction(fraction))


def isr_re_for_target(isr_f_db: float, fraction: float) -> float:
    """Per-RE ISR needed to reach a frame-level ISR over ``fraction`` of the REs."""
    return float(isr_f_db) - 10.0 * math.log10(_check_fraction(fraction))


def _sync_core_mask(n_sc: int) -> np.ndarray:
    mask = np.zeros((n_sc, SYMBOLS_PER_FRAME), dtype=bool)
    sc = central_subcarriers(n_sc, 72)
    mask[np.ix_(sc, PSS_SYMBOLS + SSS_SYMBOLS)] = True
    return mask


def _sync_window_mask(n_sc: int, n_target: int) -> np.ndarray:
    """Central-72 window around each PSS/SSS pair, widened in time until the
    frame holds ``n_target`` REs.

    Symbols are added alternately after and before the SSS/PSS pair; the
    last, partially filled symbol is filled from the band centre outwards.
    """
    core = 4 * 72
    if n_target < core:
        raise ValueError(
            f"paper-fraction footprint ({n_target} REs) is smaller than the PSS/SSS "
            f"core ({core} REs) at this bandwidth; use grid-exact mode")
    band = central_subcarriers(n_sc, 72)
    centre = (n_sc - 1) / 2
    band_order = band[np.argsort(np.abs(band - centre), kind="stable")]
    mask = np.zeros((n_sc, SYMBOLS_PER_FRAME), dtype=bool)
    bursts = [(n_target + 1) // 2, n_target // 2]
    for sss, need in zip(SSS_SYMBOLS, bursts):
        order = [sss, sss + 1]
        for step in range(1, SYMBOLS_PER_FRAME):
            order += [sss + 1 + step, sss - step]
        for sym in order:
            if need <= 0:
                break
            take = min(need, 72)
            mask[band_order[:take], sym % SYMBOLS_PER_FRAME] = True
            need -= take
    return mask


def _sync_mask(n_sc, n_total, mode, paper_fraction):
    mode = FootprintMode(mode)
    if mode is FootprintMode.GRID_EXACT:
        return _sync_core_mask(n_sc)
    return _sync_window_mask(n_sc, int(round(paper_fraction * n_total)))


def footprint_for_scenario(scenario: InterferenceScenario, grid: ResourceGrid,
                           mode: FootprintMode | str = FootprintMode.PAPER_FRACTION,
                           paper_fraction: float = PAPER_SYNC_FRACTION,
                           spoof_symbol_offset: int = DEFAULT_SPOOF_SYMBOL_OFFSET) -> Footprint:
    """REs targeted by ``scenario`` on ``grid``, at the victim's own frame timing.

    PSS/SSS footprints come in two flavours. ``grid-exact`` targets the
    central 72 subcarriers of the four PSS/SSS symbols (288 REs at any
    bandwidth). ``paper-fraction`` widens that window in time until it covers
    ``paper_fraction`` of the frame. A spoofer transmits the same burst shape
    but free-running, modelled as a shift of ``spoof_symbol_offset`` symbols.
    """
    kind = scenario.kind
    if kind is ScenarioKind.NONE:
        raise ValueError("the no-interference scenario has no footprint")
    if not scenario.direction.covers(grid.direction):
        raise ValueError(
            f"{kind.name} is a {scenario.direction.value} scenario, grid is {grid.direction.value}")
    n_sc, n_sym = grid.shape
    mask = np.zeros((n_sc, n_sym), dtype=bool)
    if kind is ScenarioKind.FULL_BAND:
        mask[:] = True
    elif kind is ScenarioKind.HALF_BAND:
        mask[: n_sc // 2, :] = True
    elif kind is ScenarioKind.PUCCH:
        mask = grid.mask(ChannelKind.PUCCH)
    elif kind is ScenarioKind.PUSCH:
        mask = grid.mask(ChannelKind.PUSCH)
    else:
        mask = _sync_mask(n_sc, grid.n_total, mode, paper_fraction)
        if kind is ScenarioKind.PSS_SSS_SPOOF:
            return Footprint(mask, grid.direction, spoof=True).shifted(spoof_symbol_offset)
    return Footprint(mask, grid.direction)


def offset_to_symbols(offset_samples: int, frame_length: int) -> int:
    """Nearest whole-symbol equivalent of a timing offset in samples."""
    return int(round(offset_samples * SYMBOLS_PER_FRAME / frame_length))


def sync_align(scenario: InterferenceScenario, sync: SyncState, grid: ResourceGrid,
               true_frame_timing: int = 0, frame_length: int | None = None,
               mode: FootprintMode | str = FootprintMode.PAPER_FRACTION,
               paper_fraction: float = PAPER_SYNC_FRACTION) -> Footprint:
    """Place a synchronous footprint on the victim frame.

    The interferer schedules its burst relative to the frame boundary it
    acquired, delayed by ``scenario.timing_offset`` samples. Any residual is
    rounded to whole symbols, since offsets inside the cyclic prefix do not
    move interference onto another symbol.
    """
    if not scenario.synchronous:
        raise ValueError(f"{scenario.kind.name} is asynchronous; there is nothing to align")
    if not sync.locked:
        raise ValueError("interferer has not acquired the cell (SyncState not locked)")
    if frame_length is None:
        from .iq import OfdmLayout
        frame_length = OfdmLayout.for_bandwidth(grid.config.bandwidth_rb).frame_length
    base = footprint_for_scenario(scenario, grid, mode=mode, paper_fraction=paper_fraction)
    error = sync.frame_timing - true_frame_timing + scenario.timing_offset
    return base.shifted(offset_to_symbols(error, frame_length))


def apply_interference(grid: ResourceGrid, footprint: Footprint, isr_re_db: float) -> np.ndarray:
    """Per-RE interference power: the ISR times the RE's signal power on targeted REs."""
    if footprint.mask.shape != grid.shape:
        raise ValueError(f"footprint shape {footprint.mask.shape} does not match grid {grid.shape}")
    if footprint.direction is not grid.direction:
        raise ValueError("footprint was derived for the other link direction")
    return np.where(footprint.mask, 10.0 ** (isr_re_db / 10.0) * grid.power, 0.0)


def isr_metrics(footprint: Footprint, isr_re_db: float) -> IsrMetrics:
    return IsrMetrics.from_fraction(isr_re_db, footprint.fraction)
