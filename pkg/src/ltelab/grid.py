"""LTE FDD resource grid for one 10 ms frame with a channel label per RE.

Grids are indexed ``[subcarrier, symbol]`` with symbol 0..139 counted across
the frame (7 symbols per slot, normal cyclic prefix).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

SUBCARRIERS_PER_RB = 12
SYMBOLS_PER_SLOT = 7
SLOTS_PER_FRAME = 20
SYMBOLS_PER_SUBFRAME = 2 * SYMBOLS_PER_SLOT
SUBFRAMES_PER_FRAME = 10
SYMBOLS_PER_FRAME = SYMBOLS_PER_SLOT * SLOTS_PER_FRAME

VALID_BANDWIDTHS_RB = (6, 15, 25, 50, 75, 100)

# PSS sits on the last symbol of slots 0 and 10, SSS on the one before it.
PSS_SYMBOLS = (6, 10 * SYMBOLS_PER_SLOT + 6)
SSS_SYMBOLS = (5, 10 * SYMBOLS_PER_SLOT + 5)
PBCH_SYMBOLS = tuple(range(SYMBOLS_PER_SLOT, SYMBOLS_PER_SLOT + 4))
CRS_SLOT_SYMBOLS = (0, 4)


class Direction(str, enum.Enum):
    DL = "DL"
    UL = "UL"
    BOTH = "UL/DL"
    NONE = "-"

    def covers(self, other: "Direction") -> bool:
        return self is other or self is Direction.BOTH


class ChannelKind(enum.IntEnum):
    PSS = 0
    SSS = 1
    PBCH = 2
    PCFICH = 3
    PDCCH = 4
    CRS = 5
    PDSCH = 6
    PUCCH = 7
    PUSCH = 8

    @property
    def direction(self) -> Direction:
        return Direction.UL if self >= ChannelKind.PUCCH else Direction.DL


DL_KINDS = tuple(k for k in ChannelKind if k.direction is Direction.DL)
UL_KINDS = tuple(k for k in ChannelKind if k.direction is Direction.UL)


@dataclass(frozen=True)
class CellConfig:
    """Cell parameters. Only normal CP, FDD and antenna port 0 are modelled."""

    bandwidth_rb: int = 50
    cell_id: int = 0
    cfi: int = 2
    cyclic_prefix: str = "normal"
    duplex: str = "FDD"
    antenna_ports: int = 1

    def __post_init__(self):
        if self.bandwidth_rb not in VALID_BANDWIDTHS_RB:
            raise ValueError(
                f"bandwidth_rb must be one of {VALID_BANDWIDTHS_RB}, got {self.bandwidth_rb!r}")
        if not 0 <= self.cell_id <= 503:
            raise ValueError(f"cell_id must be in [0, 503], got {self.cell_id!r}")
        if self.cfi not in (1, 2, 3):
            raise ValueError(f"cfi must be 1, 2 or 3, got {self.cfi!r}")
        if self.cyclic_prefix != "normal":
            raise ValueError("only the normal cyclic prefix is supported")
        if self.duplex != "FDD":
            raise ValueError("only FDD is supported")
        if self.antenna_ports != 1:
            raise ValueError("only a single antenna port (port 0) is supported")

    @property
    def n_subcarriers(self) -> int:
        return SUBCARRIERS_PER_RB * self.bandwidth_rb

    @property
    def n_id_1(self) -> int:
        return self.cell_id // 3

    @property
    def n_id_2(self) -> int:
        return self.cell_id % 3

    @property
    def v_shift(self) -> int:
        return self.cell_id % 6

    @property
    def total_res(self) -> int:
        return self.n_subcarriers * SYMBOLS_PER_FRAME

    def to_dict(self) -> dict:
        return {
            "bandwidth_rb": self.bandwidth_rb,
            "cell_id": self.cell_id,
            "cfi": self.cfi,
            "cyclic_prefix": self.cyclic_prefix,
            "duplex": self.duplex,
            "antenna_ports": self.antenna_ports,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CellConfig":
        return cls(**d)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ResourceGrid:
    """One frame of labelled REs plus the per-RE signal power (linear)."""

    config: CellConfig
    direction: Direction
    labels: np.ndarray
    power: np.ndarray = field(default=None)

    def __post_init__(self):
        labels = _readonly(np.array(self.labels, dtype=np.int8))
        expected = (self.config.n_subcarriers, SYMBOLS_PER_FRAME)
        if labels.shape != expected:
            raise ValueError(f"label map has shape {labels.shape}, expected {expected}")
        allowed = DL_KINDS if self.direction is Direction.DL else UL_KINDS
        if not np.isin(labels, [int(k) for k in allowed]).all():
            raise ValueError(f"label map contains channels foreign to {self.direction.value}")
        power = np.ones(expected) if self.power is None else np.array(self.power, dtype=float)
        if power.shape != expected:
            raise ValueError(f"power map has shape {power.shape}, expected {expected}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "power", _readonly(power))

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    @property
    def n_total(self) -> int:
        return self.labels.size

    def mask(self, kind: ChannelKind) -> np.ndarray:
        return self.labels == int(kind)

    def count(self, kind: ChannelKind) -> int:
        return int(np.count_nonzero(self.labels == int(kind)))

    def to_json(self) -> str:
        """Config echo plus a run-length encoded label map.

        The map is flattened symbol-major (all subcarriers of symbol 0 first)
        and stored as ``[label_name, run_length]`` pairs.
        """
        flat = self.labels.T.ravel()
        edges = np.flatnonzero(np.diff(flat)) + 1
        starts = np.concatenate(([0], edges))
        lengths = np.diff(np.concatenate((starts, [flat.size])))
        runs = [[ChannelKind(int(flat[s])).name, int(n)] for s, n in zip(starts, lengths)]
        doc = {
            "config": self.config.to_dict(),
            "direction": self.direction.value,
            "shape": list(self.shape),
            "order": "symbol-major",
            "labels_rle": runs,
        }
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ResourceGrid":
        doc = json.loads(text)
        config = CellConfig.from_dict(doc["config"])
        n_sc, n_sym = doc["shape"]
        values = [ChannelKind[name].value for name, _ in doc["labels_rle"]]
        counts = [n for _, n in doc["labels_rle"]]
        flat = np.repeat(np.array(values, dtype=np.int8), counts)
        labels = flat.reshape(n_sym, n_sc).T
        return cls(config, Direction(doc["direction"]), labels)


def central_subcarriers(n_subcarriers: int, width: int) -> np.ndarray:
    """Indices of the ``width`` subcarriers straddling the band centre."""
    start = n_subcarriers // 2 - width // 2
    return np.arange(start, start + width)


def crs_subcarriers(config: CellConfig, slot_symbol: int) -> np.ndarray:
    """Port-0 CRS subcarriers on symbol 0 or 4 of a slot."""
    v = 0 if slot_symbol == 0 else 3
    offset = (v + config.v_shift) % 6
    return np.arange(offset, config.n_subcarriers, 6)


def crs_symbols() -> np.ndarray:
    return np.array([slot * SYMBOLS_PER_SLOT + l
                     for slot in range(SLOTS_PER_FRAME) for l in CRS_SLOT_SYMBOLS])


def pcfich_subcarriers(config: CellConfig) -> np.ndarray:
    """16 PCFICH REs in four groups of four spread evenly across the band.

    Each group is the first four non-CRS REs of a 6-subcarrier REG; the REG
    positions are rotated by ``cell_id mod 12`` subcarriers.
    """
    n_sc = config.n_subcarriers
    crs = set(crs_subcarriers(config, 0).tolist())
    out = []
    for group in range(4):
        base = (group * n_sc // 4 + config.cell_id % 12) % n_sc
        reg_start = base - base % 6
        out.extend([k for k in range(reg_start, reg_start + 6) if k not in crs][:4])
    return np.array(sorted(out))


def build_dl_grid(config: CellConfig) -> ResourceGrid:
    n_sc = config.n_subcarriers
    labels = np.full((n_sc, SYMBOLS_PER_FRAME), ChannelKind.PDSCH, dtype=np.int8)

    sync_sc = central_subcarriers(n_sc, 62)
    for sym in PSS_SYMBOLS:
        labels[sync_sc, sym] = ChannelKind.PSS
    for sym in SSS_SYMBOLS:
        labels[sync_sc, sym] = ChannelKind.SSS

    labels[np.ix_(central_subcarriers(n_sc, 72), PBCH_SYMBOLS)] = ChannelKind.PBCH

    for sf in range(SUBFRAMES_PER_FRAME):
        first = sf * SYMBOLS_PER_SUBFRAME
        labels[:, first:first + config.cfi] = ChannelKind.PDCCH
        labels[pcfich_subcarriers(config), first] = ChannelKind.PCFICH

    # CRS last: it punctures PBCH/PDCCH wherever they overlap
    for slot in range(SLOTS_PER_FRAME):
        for l in CRS_SLOT_SYMBOLS:
            labels[crs_subcarriers(config, l), slot * SYMBOLS_PER_SLOT + l] = ChannelKind.CRS

    return ResourceGrid(config, Direction.DL, labels)


def pucch_edge_width(n_subcarriers: int, pucch_fraction: float) -> int:
    return int(round(n_subcarriers * pucch_fraction / 2))


def build_ul_grid(config: CellConfig, pucch_fraction: float = 0.25) -> ResourceGrid:
    """UL grid with PUCCH on both band edges and PUSCH in between.

    ``pucch_fraction`` is the total share of subcarriers given to PUCCH, split
    evenly between the two edges.
    """
    if not 0 < pucch_fraction < 1:
        raise ValueError(f"pucch_fraction must be in (0, 1), got {pucch_fraction!r}")
    n_sc = config.n_subcarriers
    edge = pucch_edge_width(n_sc, pucch_fraction)
    if edge == 0:
        raise ValueError(f"pucch_fraction {pucch_fraction} leaves no PUCCH subcarriers")
    labels = np.full((n_sc, SYMBOLS_PER_FRAME), ChannelKind.PUSCH, dtype=np.int8)
    labels[:edge, :] = ChannelKind.PUCCH
    labels[n_sc - edge:, :] = ChannelKind.PUCCH
    return ResourceGrid(config, Direction.UL, labels)


def channel_occupancy(grid: ResourceGrid, kind: ChannelKind) -> float:
    """Fraction of the frame's REs carrying ``kind``."""
    kind = ChannelKind(kind)
    if kind.direction is not grid.direction:
        raise ValueError(f"{kind.name} is a {kind.direction.value} channel, grid is {grid.direction.value}")
    return grid.count(kind) / grid.n_total


def occupancy_table(grid: ResourceGrid) -> dict[str, tuple[int, float]]:
    kinds = DL_KINDS if grid.direction is Direction.DL else UL_KINDS
    return {k.name: (grid.count(k), channel_occupancy(grid, k)) for k in kinds}


def subframe_of(symbol) -> np.ndarray:
    return np.asarray(symbol) // SYMBOLS_PER_SUBFRAME
